"""Exact teacher correction for multinomial data, plus the finite-sample formulas.

The teacher picks corrected counts ``c_tilde`` (same total ``N``) whose
transport cost from the original counts fits the budget, minimizing (or, in
adversarial mode, maximizing) the discrepancy to ``p0``. L1, squared L2 and KL
all split into per-category terms, and both cost models split into
per-category (change count) or per-boundary (value distance, via prefix sums)
increments, so a dynamic program over ``(category, prefix sum, cost used)``
is exact.

Ties: objectives within ``TIE_TOL`` of the optimum are treated as equal, and
the lexicographically smallest count vector among them wins. The tolerance
absorbs summation-order rounding so the DP and the enumeration agree.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import accumulate

import numpy as np

from .core import (
    CostModel,
    CountVector,
    Discrepancy,
    Pmf,
    TransportPlan,
    build_min_cost_plan,
    discrepancy,
    discrepancy_term,
    empirical_pmf,
    transport_cost,
)
from .errors import DimensionMismatchError, InputError, InstanceTooLargeError

TIE_TOL = 1e-9
BRUTEFORCE_LIMIT = 10**6


class Direction(enum.Enum):
    COOPERATIVE = "coop"
    ADVERSARIAL = "adv"


@dataclass(frozen=True)
class CorrectionProblem:
    p0: Pmf
    counts: CountVector
    budget: int
    cost_model: CostModel = CostModel.VALUE_DISTANCE
    discrepancy: Discrepancy = Discrepancy.L2
    direction: Direction = Direction.COOPERATIVE

    def __post_init__(self):
        if len(self.p0) != len(self.counts):
            raise DimensionMismatchError(
                f"p0 has {len(self.p0)} categories but counts have {len(self.counts)}"
            )
        if len(self.counts) < 2:
            raise DimensionMismatchError("need at least 2 categories")
        if self.counts.total < 1:
            raise InputError("dataset is empty")
        if int(self.budget) != self.budget or self.budget < 0:
            raise InputError(f"budget must be a nonnegative integer, got {self.budget}")
        object.__setattr__(self, "budget", int(self.budget))

    @property
    def N(self) -> int:
        return self.counts.total


@dataclass(frozen=True)
class CorrectionSolution:
    corrected_counts: CountVector
    plan: TransportPlan
    objective: float
    cost_used: int

    @property
    def corrected_pmf(self) -> Pmf:
        return empirical_pmf(self.corrected_counts)


def _max_cost(N: int, Y: int, cost_model: CostModel) -> int:
    return N * (Y - 1) if cost_model is CostModel.VALUE_DISTANCE else N


def _term_table(problem: CorrectionProblem) -> np.ndarray:
    """``table[k, t]``: signed objective contribution of ``c_tilde[k] = t``."""
    N = problem.N
    sign = -1.0 if problem.direction is Direction.ADVERSARIAL else 1.0
    table = np.empty((len(problem.counts), N + 1))
    for k, pk in enumerate(problem.p0.probs):
        for t in range(N + 1):
            table[k, t] = sign * discrepancy_term(pk, t / N, problem.discrepancy)
    return table


def _finish(problem: CorrectionProblem, counts) -> CorrectionSolution:
    c_tilde = CountVector(tuple(counts))
    return CorrectionSolution(
        corrected_counts=c_tilde,
        plan=build_min_cost_plan(problem.counts, c_tilde, problem.cost_model),
        objective=discrepancy(problem.p0, empirical_pmf(c_tilde), problem.discrepancy),
        cost_used=transport_cost(problem.counts, c_tilde, problem.cost_model),
    )


def _increment(cost_model, c, prefix, k, t, s_next, Y):
    if cost_model is CostModel.CHANGE_COUNT:
        return max(0, c[k] - t)
    # boundary after category k; the final boundary always matches
    return abs(prefix[k] - s_next) if k < Y - 1 else 0


def solve_exact(problem: CorrectionProblem) -> CorrectionSolution:
    """Globally optimal correction by dynamic programming.

    ``best[k][s, u]`` is the best signed objective over categories ``k..Y-1``
    given that categories ``0..k-1`` hold ``s`` observations and have used
    ``u`` budget; unreachable states are tracked in a separate mask so that
    infinite KL terms never meet an infinite sentinel.
    """
    c = problem.counts.counts
    N, Y = problem.N, len(c)
    cost_model = problem.cost_model
    B = min(problem.budget, _max_cost(N, Y, cost_model))
    prefix = list(accumulate(c))
    terms = _term_table(problem)

    best = [None] * (Y + 1)
    ok = [None] * (Y + 1)
    best[Y] = np.zeros((N + 1, B + 1))
    ok[Y] = np.zeros((N + 1, B + 1), dtype=bool)
    ok[Y][N, :] = True

    with np.errstate(invalid="ignore"):
        for k in range(Y - 1, -1, -1):
            val = np.full((N + 1, B + 1), np.inf)
            reach = np.zeros((N + 1, B + 1), dtype=bool)
            nxt_val, nxt_ok = best[k + 1], ok[k + 1]
            for s in range(N + 1):
                t_range = [N - s] if k == Y - 1 else range(N - s + 1)
                for t in t_range:
                    s2 = s + t
                    inc = _increment(cost_model, c, prefix, k, t, s2, Y)
                    if inc > B:
                        continue
                    cand_ok = nxt_ok[s2, inc:]
                    cand = terms[k, t] + nxt_val[s2, inc:]
                    width = B + 1 - inc
                    cur_ok = reach[s, :width]
                    better = cand_ok & (~cur_ok | (cand < val[s, :width]))
                    val[s, :width] = np.where(better, cand, val[s, :width])
                    reach[s, :width] |= cand_ok
            best[k], ok[k] = val, reach

    if not ok[0][0, 0]:  # unreachable: the original counts are always feasible
        raise AssertionError("no feasible correction found")
    threshold = best[0][0, 0] + TIE_TOL

    # forward pass: smallest t at each step that can still reach the optimum
    s = u = 0
    acc = 0.0
    chosen = []
    for k in range(Y):
        t_range = [N - s] if k == Y - 1 else range(N - s + 1)
        for t in t_range:
            s2 = s + t
            inc = _increment(cost_model, c, prefix, k, t, s2, Y)
            u2 = u + inc
            if u2 > B or not ok[k + 1][s2, u2]:
                continue
            total = acc + terms[k, t] + best[k + 1][s2, u2]
            if total <= threshold:
                chosen.append(t)
                acc += terms[k, t]
                s, u = s2, u2
                break
        else:
            raise AssertionError("reconstruction lost the optimal path")
    return _finish(problem, chosen)


def compositions(total: int, parts: int):
    """All nonnegative integer vectors of length ``parts`` summing to ``total``, in lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def solve_bruteforce(problem: CorrectionProblem) -> CorrectionSolution:
    """Optimal correction by enumerating every corrected count vector."""
    N, Y = problem.N, len(problem.counts)
    size = math.comb(N + Y - 1, Y - 1)
    if size > BRUTEFORCE_LIMIT:
        raise InstanceTooLargeError(f"{size} candidate histograms exceeds {BRUTEFORCE_LIMIT}")
    terms = _term_table(problem)
    candidates = []
    for cand in compositions(N, Y):
        cost = transport_cost(problem.counts, CountVector(cand), problem.cost_model)
        if cost <= problem.budget:
            value = 0.0
            for k, t in enumerate(cand):
                value += terms[k, t]
            candidates.append((value, cand))
    opt = min(v for v, _ in candidates)
    for value, cand in candidates:
        if value <= opt + TIE_TOL:
            return _finish(problem, cand)
    raise AssertionError("unreachable")


def round_to_grid(N: int, p0: Pmf) -> CountVector:
    """Nearest-integer rounding of ``N p0``, repaired to sum to ``N``.

    Repair uses largest remainders: when short, increment the entries that
    were rounded down the most; when over, decrement those rounded up the
    most. Ties go to the lower index.
    """
    raw = [N * p for p in p0.probs]
    counts = [math.floor(x + 0.5) for x in raw]
    remainder = [x - r for x, r in zip(raw, counts)]
    diff = N - sum(counts)
    if diff > 0:
        order = sorted(range(len(raw)), key=lambda i: (-remainder[i], i))
        for i in order[:diff]:
            counts[i] += 1
    elif diff < 0:
        order = sorted(range(len(raw)), key=lambda i: (remainder[i], i))
        for i in [i for i in order if counts[i] > 0][:-diff]:
            counts[i] -= 1
    return CountVector(tuple(counts))


def min_error(N: int, p0: Pmf) -> tuple[float, CountVector]:
    """Smallest L1 error reachable on the ``1/N`` grid and the counts achieving it."""
    counts = round_to_grid(N, p0)
    return discrepancy(p0, empirical_pmf(counts), Discrepancy.L1), counts


def _grid_counts(N: int, p_hat: Pmf) -> CountVector:
    raw = [N * p for p in p_hat.probs]
    counts = [round(x) for x in raw]
    if any(abs(x - r) > 1e-9 for x, r in zip(raw, counts)) or sum(counts) != N:
        raise InputError(f"p_hat {list(p_hat.probs)} is not on the 1/{N} grid")
    return CountVector(tuple(counts))


def min_budget(N: int, p0: Pmf, p_hat: Pmf) -> int:
    """Change-count budget that the L1 error formula says reaches ``e_min``."""
    _grid_counts(N, p_hat)
    if len(p0) != len(p_hat):
        raise DimensionMismatchError("p0 and p_hat dimensions differ")
    e_min, _ = min_error(N, p0)
    gap = discrepancy(p0, p_hat, Discrepancy.L1) - e_min
    # ceil with slack for rounding in the L1 sums
    return max(0, math.ceil(N / 2 * gap - 1e-9))


def predicted_error(N: int, p0: Pmf, b: int, p_hat: Pmf) -> float:
    """``max(||p0 - p_hat||_1 - 2b/N, e_min)``."""
    _grid_counts(N, p_hat)
    if b < 0:
        raise InputError(f"budget must be nonnegative, got {b}")
    e_min, _ = min_error(N, p0)
    return max(discrepancy(p0, p_hat, Discrepancy.L1) - 2 * b / N, e_min)
