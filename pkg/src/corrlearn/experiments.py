"""Seeded Monte Carlo harness for the variance and budget experiments."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import binomial
from .core import (
    CostModel,
    CountVector,
    Discrepancy,
    ObservationDataset,
    Pmf,
    counts_from_dataset,
    discrepancy,
    empirical_pmf,
)
from .errors import InputError
from .solver import CorrectionProblem, min_budget, min_error, predicted_error, solve_exact

DEFAULT_SEED = 20210
SIGMA_RULE = 3.0

VARIANCE_COLUMNS = (
    "N", "b", "var_empirical", "var_theoretical", "var_uncorrected_theoretical",
    "stderr", "replicates", "seed",
)
BUDGET_COLUMNS = ("b", "err_uncorrected", "err_corrected", "err_predicted", "e_min", "b_min")


@dataclass(frozen=True)
class VarianceExperimentConfig:
    theta0: float = 0.4
    n_values: tuple[int, ...] = (5, 10, 15, 20, 25, 30)
    budgets: tuple[int, ...] = (0, 1, 2)
    replicates: int = 200
    master_seed: int = DEFAULT_SEED

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "budgets", tuple(int(b) for b in self.budgets))
        if not 0.0 <= self.theta0 <= 1.0:
            raise InputError(f"theta0 must lie in [0, 1], got {self.theta0}")
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise InputError("n_values must be a nonempty list of positive integers")
        if not self.budgets or any(b < 0 for b in self.budgets):
            raise InputError("budgets must be a nonempty list of nonnegative integers")
        if self.replicates < 1:
            raise InputError("replicates must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise InputError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class BudgetExperimentConfig:
    p0: Pmf = Pmf((0.12, 0.63, 0.25))
    initial_counts: CountVector = CountVector((3, 9, 5))
    budgets: tuple[int, ...] = tuple(range(7))
    cost_model: CostModel = CostModel.CHANGE_COUNT
    discrepancy: Discrepancy = Discrepancy.L1

    def __post_init__(self):
        object.__setattr__(self, "budgets", tuple(int(b) for b in self.budgets))
        if len(self.p0) != len(self.initial_counts):
            raise InputError("p0 and initial counts have different dimensions")
        if self.initial_counts.total < 1:
            raise InputError("initial counts are empty")
        if not self.budgets or any(b < 0 for b in self.budgets):
            raise InputError("budgets must be a nonempty list of nonnegative integers")

    @property
    def N(self) -> int:
        return self.initial_counts.total


@dataclass(frozen=True)
class ExperimentTable:
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    metadata: dict = field(default_factory=dict)

    def column(self, name):
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()

    def write(self, path) -> Path:
        """Write the CSV to ``path`` and the metadata to ``<path>.meta.json``."""
        path = Path(path)
        path.write_text(self.to_csv())
        meta_path = path.with_name(path.name + ".meta.json")
        meta_path.write_text(json.dumps(self.metadata, indent=2, sort_keys=True) + "\n")
        return meta_path


def replicate_seed(master_seed: int, replicate: int) -> int:
    """64-bit seed for one replicate, via numpy's ``SeedSequence`` spawn keys."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(replicate,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def sample_dataset(p: Pmf, N: int, seed: int) -> ObservationDataset:
    """``N`` i.i.d. draws from ``p`` by inverse CDF on a PCG64 stream."""
    rng = np.random.Generator(np.random.PCG64(seed))
    cdf = np.cumsum(p.as_array())
    idx = np.searchsorted(cdf, rng.random(N), side="right")
    idx = np.minimum(idx, len(p) - 1)
    return ObservationDataset(tuple(int(i) + 1 for i in idx), len(p))


def variance_stderr(x: np.ndarray) -> float:
    """Standard error of the sample variance from the sample fourth moment."""
    n = len(x)
    if n < 2:
        return math.nan
    d = x - x.mean()
    m2 = np.mean(d**2)
    m4 = np.mean(d**4)
    return math.sqrt(max(0.0, m4 - m2**2 * (n - 3) / (n - 1)) / n)


def theoretical_variance_stderr(theory: binomial.BinomialTheory, replicates: int) -> float:
    """Standard error of the sample variance of ``replicates`` corrected estimates.

    Uses the exact second and fourth central moments of the corrected pmf,
    so a cell whose spread comes from rare outcomes is not judged against a
    sample estimate that happened to see none of them.
    """
    pmf = binomial.corrected_pmf(theory)
    N, n = theory.N, replicates
    probs = [Fraction(p) for p in pmf.probs]
    mean = sum(x * p for x, p in enumerate(probs)) / N
    mu2 = sum((Fraction(x, N) - mean) ** 2 * p for x, p in enumerate(probs))
    mu4 = sum((Fraction(x, N) - mean) ** 4 * p for x, p in enumerate(probs))
    if n < 2:
        return math.nan
    return math.sqrt(float(mu4 / n - mu2**2 * (n - 3) / (n * (n - 1))))


def _corrected_thetas(theta0, N, budgets, seed):
    """Corrected estimates of one replicate, one per budget."""
    data = sample_dataset(Pmf((1.0 - theta0, theta0)), N, seed)
    x = counts_from_dataset(data).counts[1]
    target = binomial.oracle_target(N, theta0)
    return tuple(binomial.correct_success_count(x, target, b) / N for b in budgets)


def _theory_columns(theta0, N, b, replicates):
    """Theoretical variances and the stderr under the theoretical distribution.

    The stderr is ``None`` when ``N theta0`` is not integral; the caller then
    falls back to the sample estimate.
    """
    var_hat = binomial.variance_uncorrected(N, theta0)
    theory = binomial.BinomialTheory(N, theta0, min(b, N))
    try:
        var_tilde = binomial.variance_corrected(theory)
    except binomial.IntegralityError:
        return None, var_hat, None
    return var_tilde, var_hat, theoretical_variance_stderr(theory, replicates)


def run_variance_experiment(cfg: VarianceExperimentConfig, workers: int = 1) -> ExperimentTable:
    seeds = [replicate_seed(cfg.master_seed, r) for r in range(cfg.replicates)]
    rows = []
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for N in cfg.n_values:
            args = ([cfg.theta0] * cfg.replicates, [N] * cfg.replicates,
                    [cfg.budgets] * cfg.replicates, seeds)
            if pool is None:
                results = list(map(_corrected_thetas, *args))
            else:
                chunk = max(1, cfg.replicates // (4 * workers))
                results = list(pool.map(_corrected_thetas, *args, chunksize=chunk))
            thetas = np.array(results)  # (replicates, budgets), replicate order
            for j, b in enumerate(cfg.budgets):
                col = thetas[:, j]
                var_emp = float(np.var(col, ddof=1)) if cfg.replicates > 1 else math.nan
                var_tilde, var_hat, se = _theory_columns(cfg.theta0, N, b, cfg.replicates)
                if se is None:
                    se = variance_stderr(col)
                rows.append((N, b, var_emp, var_tilde, var_hat, se,
                             cfg.replicates, cfg.master_seed))
    finally:
        if pool is not None:
            pool.shutdown()
    return ExperimentTable(VARIANCE_COLUMNS, tuple(rows),
                           {"experiment": "variance", **asdict(cfg)})


def variance_deviations(table: ExperimentTable) -> list[float]:
    """|empirical - theoretical| in standard errors, for rows with a theoretical value."""
    out = []
    for emp, theo, se in zip(table.column("var_empirical"), table.column("var_theoretical"),
                             table.column("stderr")):
        if theo is None:
            continue
        dev = abs(emp - theo)
        if se > 0:
            out.append(dev / se)
        else:
            out.append(0.0 if dev == 0 else math.inf)
    return out


def run_budget_experiment(cfg: BudgetExperimentConfig) -> ExperimentTable:
    N, p0 = cfg.N, cfg.p0
    p_hat = empirical_pmf(cfg.initial_counts)
    err_hat = discrepancy(p0, p_hat, Discrepancy.L1)
    e_min, _ = min_error(N, p0)
    b_min = min_budget(N, p0, p_hat)
    rows = []
    for b in cfg.budgets:
        sol = solve_exact(CorrectionProblem(p0, cfg.initial_counts, b, cfg.cost_model,
                                            cfg.discrepancy))
        err = discrepancy(p0, sol.corrected_pmf, Discrepancy.L1)
        rows.append((b, err_hat, err, predicted_error(N, p0, b, p_hat), e_min, b_min))
    meta = {
        "experiment": "budget",
        "p0": list(p0.probs),
        "initial_counts": list(cfg.initial_counts.counts),
        "N": N,
        "budgets": list(cfg.budgets),
        "cost_model": cfg.cost_model.value,
        "discrepancy": cfg.discrepancy.value,
    }
    return ExperimentTable(BUDGET_COLUMNS, tuple(rows), meta)


def plateau_budget(table: ExperimentTable, tol: float = 1e-12):
    """Smallest budget from which the corrected error stays at ``e_min``."""
    found = None
    for b, err, e_min in zip(table.column("b"), table.column("err_corrected"), table.column("e_min")):
        if abs(err - e_min) <= tol:
            if found is None:
                found = b
        else:
            found = None
    return found
