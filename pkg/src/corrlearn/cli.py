"""Command-line entry point.

Exit codes: 0 success, 1 a built-in statistical check failed, 2 malformed
input, 3 precondition violated (dimension mismatch, non-integral N*theta0,
instance too large).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import binomial
from .config import (
    budget_config_from_mapping,
    read_problem,
    variance_config_from_mapping,
)
from .core import discrepancy, empirical_pmf, apply_plan_to_sequence
from .errors import InputError, PreconditionError
from .experiments import (
    SIGMA_RULE,
    plateau_budget,
    run_budget_experiment,
    run_variance_experiment,
    variance_deviations,
)
from .fileio import format_dataset, parse_list, read_dataset, read_keyvalue
from .solver import CorrectionProblem, Direction, solve_exact

EXIT_CHECK_FAILED = 1
EXIT_INPUT = 2
EXIT_PRECONDITION = 3


def _fmt(x) -> str:
    return f"{x:.6g}"


def _global_flags(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default, help="master seed (unsigned 64-bit)")
    parser.add_argument("--out", default=default, help="output path")
    parser.add_argument("--quiet", action="store_true",
                        default=argparse.SUPPRESS if suppress else False,
                        help="suppress the human-readable report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corrlearn", description=__doc__.split("\n")[0])
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="solve a correction problem file")
    p.add_argument("problem", help="key = value problem file")
    p.add_argument("--dataset", help="observation sequence to correct (overrides the file)")
    p.add_argument("--adversarial", action="store_true", help="maximize the discrepancy instead")
    p.add_argument("--budget", type=int, help="override the budget in the file")

    p = sub.add_parser("binomial", parents=[common], help="binomial finite-sample theory")
    p.add_argument("-N", "--N", dest="N", type=int, required=True, help="number of trials")
    p.add_argument("--theta0", type=float, required=True, help="true success probability")
    p.add_argument("-b", "--b", dest="b", type=int, default=0, help="correction budget (default 0)")
    p.add_argument("--pmf", action="store_true", help="corrected pmf of the success count")
    p.add_argument("--variance", action="store_true", help="variance of the corrected estimator")
    p.add_argument("--delta", action="store_true", help="variance removed by the correction")
    p.add_argument("--ratio", action="store_true", help="corrected over uncorrected variance")
    p.add_argument("--oracle", action="store_true",
                   help="cross-check the closed-form pmf against enumeration")

    p = sub.add_parser("experiment", parents=[common], help="run a reproduction experiment")
    p.add_argument("kind", choices=("variance", "budget"))
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--workers", type=int, default=1, help="replicate worker processes")
    p.add_argument("--theta0", type=float, help="true success probability")
    p.add_argument("--n-values", help="comma-separated N grid")
    p.add_argument("--budgets", help="comma-separated budgets")
    p.add_argument("--replicates", type=int, help="replicates per grid point")
    return parser


def _emit(args, text):
    if not args.quiet:
        print(text)


def cmd_solve(args) -> int:
    dataset = read_dataset(args.dataset) if args.dataset else None
    problem, dataset = read_problem(args.problem, dataset)
    overrides = {}
    if args.adversarial:
        overrides["direction"] = Direction.ADVERSARIAL
    if args.budget is not None:
        overrides["budget"] = args.budget
    if overrides:
        fields = {k: getattr(problem, k) for k in
                  ("p0", "counts", "budget", "cost_model", "discrepancy", "direction")}
        problem = CorrectionProblem(**{**fields, **overrides})
    sol = solve_exact(problem)
    baseline = discrepancy(problem.p0, empirical_pmf(problem.counts), problem.discrepancy)
    lines = [
        f"direction:        {problem.direction.value}",
        f"budget:           {problem.budget} ({problem.cost_model.value})",
        f"original_counts:  {' '.join(map(str, problem.counts))}",
        f"corrected_counts: {' '.join(map(str, sol.corrected_counts))}",
        f"baseline:         {_fmt(baseline)} ({problem.discrepancy.value})",
        f"objective:        {_fmt(sol.objective)} ({problem.discrepancy.value})",
        f"cost_used:        {sol.cost_used}",
    ]
    moves = [f"{i + 1}->{j + 1} x{f}" for i, row in enumerate(sol.plan.flows)
             for j, f in enumerate(row) if i != j and f]
    lines.append(f"moves:            {', '.join(moves) if moves else 'none'}")
    _emit(args, "\n".join(lines))
    if dataset is not None:
        corrected = apply_plan_to_sequence(dataset, sol.plan)
        if args.out:
            Path(args.out).write_text(format_dataset(corrected))
        else:
            print(format_dataset(corrected), end="")
    return 0


def cmd_binomial(args) -> int:
    theory = binomial.BinomialTheory(args.N, args.theta0, args.b)
    wanted = [f for f in ("pmf", "variance", "delta", "ratio") if getattr(args, f)]
    if not wanted and not args.oracle:
        wanted = ["pmf", "variance", "delta"]
        if 0.0 < args.theta0 < 1.0:
            wanted.append("ratio")
    out = {}
    for name in wanted:
        if name == "pmf":
            out[name] = " ".join(_fmt(p) for p in binomial.corrected_pmf(theory).as_array())
        elif name == "variance":
            out[name] = _fmt(binomial.variance_corrected(theory))
        elif name == "delta":
            out[name] = _fmt(binomial.delta_reduction(theory))
        else:
            out[name] = _fmt(binomial.variance_ratio(theory))
    if len(out) == 1 and not args.oracle:
        print(next(iter(out.values())))
    else:
        for name, value in out.items():
            print(f"{name}: {value}")
    if args.oracle:
        closed = binomial.corrected_pmf(theory).as_array()
        oracle = binomial.corrected_pmf_oracle(theory).as_array()
        diff = float(abs(closed - oracle).max())
        ok = diff <= 1e-12
        print(f"oracle: {'agree' if ok else 'DISAGREE'} (max diff {diff:.3g})")
        if not ok:
            return EXIT_CHECK_FAILED
    return 0


def cmd_experiment(args) -> int:
    values = read_keyvalue(args.config) if args.config else {}
    base_dir = Path(args.config).parent if args.config else Path(".")
    if args.kind == "variance":
        cfg = variance_config_from_mapping(
            values,
            theta0=args.theta0,
            n_values=tuple(parse_list(args.n_values, int)) if args.n_values else None,
            budgets=tuple(parse_list(args.budgets, int)) if args.budgets else None,
            replicates=args.replicates,
            master_seed=args.seed,
        )
        table = run_variance_experiment(cfg, workers=max(1, args.workers))
        devs = variance_deviations(table)
        worst = max(devs) if devs else 0.0
        passed = worst <= SIGMA_RULE
        summary = (f"variance: {len(table.rows)} cells, max deviation from theory "
                   f"{worst:.3g} sigma over {len(devs)} checked "
                   f"({'pass' if passed else 'FAIL'} at {SIGMA_RULE:g} sigma)")
    else:
        if args.budgets:
            values = {**values, "budgets": args.budgets}
        cfg = budget_config_from_mapping(values, base_dir)
        table = run_budget_experiment(cfg)
        passed = True
        summary = (f"budget: plateau budget {plateau_budget(table)}, "
                   f"e_min {_fmt(table.rows[0][4])}, b_min {table.rows[0][5]}")
    if args.out:
        table.write(args.out)
    else:
        print(table.to_csv(), end="")
    if not args.quiet:
        print(summary, file=sys.stderr if not args.out else sys.stdout)
    return 0 if passed else EXIT_CHECK_FAILED


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"solve": cmd_solve, "binomial": cmd_binomial, "experiment": cmd_experiment}
    try:
        return handler[args.command](args)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
