"""Data types, empirical estimation, discrepancies and correction costs.

Categories are 1-based in datasets (``1..Y``) and 0-based in every vector
(``counts[0]`` is category 1).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import accumulate
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, InputError, PreconditionError

PMF_TOL = 1e-12


class CostModel(enum.Enum):
    """How the teacher is charged for a modification.

    ``VALUE_DISTANCE`` charges ``|y - y_tilde|`` per changed observation,
    ``CHANGE_COUNT`` charges 1 per changed observation.
    """

    VALUE_DISTANCE = "value"
    CHANGE_COUNT = "count"


class Discrepancy(enum.Enum):
    L1 = "l1"
    L2 = "l2"
    KL = "kl"


@dataclass(frozen=True)
class ObservationDataset:
    values: tuple[int, ...]
    num_categories: int

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if self.num_categories < 2:
            raise InputError(f"need at least 2 categories, got {self.num_categories}")
        if not values:
            raise InputError("dataset must contain at least one observation")
        bad = [v for v in values if not 1 <= v <= self.num_categories]
        if bad:
            raise InputError(
                f"observation {bad[0]} outside 1..{self.num_categories}"
            )

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class CountVector:
    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "counts", counts)
        if any(c < 0 for c in counts):
            raise InputError(f"counts must be nonnegative, got {list(counts)}")

    @property
    def total(self) -> int:
        return sum(self.counts)

    def __len__(self):
        return len(self.counts)

    def __iter__(self):
        return iter(self.counts)

    def __getitem__(self, i):
        return self.counts[i]


@dataclass(frozen=True)
class Pmf:
    probs: tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if not probs:
            raise InputError("pmf must have at least one entry")
        for p in probs:
            if not (0.0 <= p <= 1.0):
                raise InputError(f"pmf entries must lie in [0, 1], got {p}")
        total = math.fsum(probs)
        if abs(total - 1.0) > PMF_TOL:
            raise InputError(f"pmf must sum to 1, got {total!r}")

    @classmethod
    def normalized(cls, values: Sequence[float], tol: float = 1e-9) -> "Pmf":
        """Build a pmf from values that sum to 1 within ``tol``, rescaling them."""
        values = [float(v) for v in values]
        if any(v < 0 or not math.isfinite(v) for v in values):
            raise InputError(f"pmf entries must be finite and nonnegative, got {values}")
        total = math.fsum(values)
        if abs(total - 1.0) > tol:
            raise InputError(f"pmf must sum to 1 within {tol:g}, got {total!r}")
        return cls(tuple(v / total for v in values))

    def __len__(self):
        return len(self.probs)

    def __getitem__(self, i):
        return self.probs[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.probs)


@dataclass(frozen=True)
class TransportPlan:
    """Integer flow between an original and a corrected histogram.

    ``flows[i][j]`` observations move from category ``i + 1`` to ``j + 1``;
    the diagonal holds unchanged observations.
    """

    flows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        flows = tuple(tuple(int(f) for f in row) for row in self.flows)
        object.__setattr__(self, "flows", flows)
        if any(len(row) != len(flows) for row in flows):
            raise InputError("transport plan must be square")
        if any(f < 0 for row in flows for f in row):
            raise InputError("transport plan flows must be nonnegative")

    @property
    def source(self) -> CountVector:
        return CountVector(tuple(sum(row) for row in self.flows))

    @property
    def target(self) -> CountVector:
        return CountVector(tuple(sum(col) for col in zip(*self.flows)))

    def cost(self, cost_model: CostModel) -> int:
        n = len(self.flows)
        if cost_model is CostModel.VALUE_DISTANCE:
            return sum(self.flows[i][j] * abs(i - j) for i in range(n) for j in range(n))
        return sum(self.flows[i][j] for i in range(n) for j in range(n) if i != j)


def counts_from_dataset(dataset: ObservationDataset) -> CountVector:
    counts = [0] * dataset.num_categories
    for v in dataset.values:
        counts[v - 1] += 1
    return CountVector(tuple(counts))


def empirical_pmf(counts: CountVector) -> Pmf:
    n = counts.total
    if n < 1:
        raise InputError("cannot form an empirical pmf from zero observations")
    return Pmf(tuple(c / n for c in counts.counts))


def discrepancy_term(p: float, q: float, measure: Discrepancy) -> float:
    """Per-category contribution; L2 contributes its squared term."""
    if measure is Discrepancy.L1:
        return abs(p - q)
    if measure is Discrepancy.L2:
        return (p - q) ** 2
    if q == 0.0:
        return 0.0
    if p == 0.0:
        return math.inf
    return q * math.log(q / p)


def discrepancy(p: Pmf, q: Pmf, measure: Discrepancy) -> float:
    """Discrepancy between a reference pmf ``p`` and an estimate ``q``.

    L1 and L2 are the usual norms of ``p - q``. KL is ``KL(q || p)`` with
    ``0 log 0 = 0``; it is ``math.inf`` when ``q`` puts mass where ``p`` has none.
    """
    if len(p) != len(q):
        raise DimensionMismatchError(f"pmf dimensions differ: {len(p)} vs {len(q)}")
    terms = [discrepancy_term(pi, qi, measure) for pi, qi in zip(p.probs, q.probs)]
    if measure is Discrepancy.KL:
        # rounding can push a true zero slightly negative
        return max(0.0, math.fsum(terms)) if math.inf not in terms else math.inf
    total = math.fsum(terms)
    return math.sqrt(total) if measure is Discrepancy.L2 else total


def _check_same_total(c: CountVector, c_tilde: CountVector):
    if len(c) != len(c_tilde):
        raise DimensionMismatchError(
            f"count vectors have different lengths: {len(c)} vs {len(c_tilde)}"
        )
    if c.total != c_tilde.total:
        raise PreconditionError(
            f"count vectors have different totals: {c.total} vs {c_tilde.total}"
        )


def transport_cost_value(c: CountVector, c_tilde: CountVector) -> int:
    """Minimum total ``|y - y_tilde|`` over relabelings taking ``c`` to ``c_tilde``."""
    _check_same_total(c, c_tilde)
    prefix = accumulate(c.counts[:-1])
    prefix_tilde = accumulate(c_tilde.counts[:-1])
    return sum(abs(a - b) for a, b in zip(prefix, prefix_tilde))


def transport_cost_count(c: CountVector, c_tilde: CountVector) -> int:
    """Minimum number of observations that must change."""
    _check_same_total(c, c_tilde)
    return sum(max(0, a - b) for a, b in zip(c.counts, c_tilde.counts))


def transport_cost(c: CountVector, c_tilde: CountVector, cost_model: CostModel) -> int:
    if cost_model is CostModel.VALUE_DISTANCE:
        return transport_cost_value(c, c_tilde)
    return transport_cost_count(c, c_tilde)


def build_min_cost_plan(
    c: CountVector, c_tilde: CountVector, cost_model: CostModel = CostModel.VALUE_DISTANCE
) -> TransportPlan:
    """Plan that keeps ``min(c_i, c_tilde_i)`` in place and matches the rest left to right.

    The monotone matching of surpluses to deficits is optimal for ``|i - j|``
    ground cost, and any plan with a maximal diagonal is optimal for the
    change count, so the same plan serves both cost models.
    """
    _check_same_total(c, c_tilde)
    n = len(c)
    flows = [[0] * n for _ in range(n)]
    surplus, deficit = [], []
    for i, (a, b) in enumerate(zip(c.counts, c_tilde.counts)):
        flows[i][i] = min(a, b)
        if a > b:
            surplus.append([i, a - b])
        elif b > a:
            deficit.append([i, b - a])
    si = di = 0
    while si < len(surplus):
        src, dst = surplus[si], deficit[di]
        moved = min(src[1], dst[1])
        flows[src[0]][dst[0]] += moved
        src[1] -= moved
        dst[1] -= moved
        if src[1] == 0:
            si += 1
        if dst[1] == 0:
            di += 1
    plan = TransportPlan(tuple(tuple(row) for row in flows))
    assert plan.cost(cost_model) == transport_cost(c, c_tilde, cost_model)
    return plan


def apply_plan_to_sequence(dataset: ObservationDataset, plan: TransportPlan) -> ObservationDataset:
    """Relabel observations according to ``plan``.

    Flows are applied in ascending ``(i, j)`` order; each moves the earliest
    not-yet-reassigned occurrences of category ``i``.
    """
    counts = counts_from_dataset(dataset)
    if len(plan.flows) != dataset.num_categories:
        raise DimensionMismatchError(
            f"plan has {len(plan.flows)} categories, dataset has {dataset.num_categories}"
        )
    if plan.source != counts:
        raise PreconditionError(
            f"plan row sums {list(plan.source)} do not match dataset counts {list(counts)}"
        )
    positions = [[] for _ in range(dataset.num_categories)]
    for k, v in enumerate(dataset.values):
        positions[v - 1].append(k)
    values = list(dataset.values)
    for i, row in enumerate(plan.flows):
        cursor = 0
        for j, f in enumerate(row):
            if i == j or f == 0:
                continue
            for k in positions[i][cursor:cursor + f]:
                values[k] = j + 1
            cursor += f
    return ObservationDataset(tuple(values), dataset.num_categories)
