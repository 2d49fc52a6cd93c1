"""Finite-sample theory for a corrected binomial estimator.

The teacher sees ``X`` successes in ``N`` Bernoulli(theta0) trials and flips
up to ``b`` observations so that the count moves toward ``E[X] = N theta0``.
Everything here is computed in exact rational arithmetic on the binary value
of ``theta0`` and converted to float at the boundary, so identities such as
"ratio is 0 at b = N" hold exactly rather than to rounding error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import InputError, InstanceTooLargeError, IntegralityError, PreconditionError

INTEGRALITY_TOL = 1e-9
ORACLE_MAX_N = 22


@dataclass(frozen=True)
class BinomialTheory:
    N: int
    theta0: float
    b: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise InputError(f"N must be a positive integer, got {self.N}")
        if not 0.0 <= self.theta0 <= 1.0:
            raise InputError(f"theta0 must lie in [0, 1], got {self.theta0}")
        if int(self.b) != self.b or not 0 <= self.b <= self.N:
            raise InputError(f"budget must be an integer in [0, N={self.N}], got {self.b}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "b", int(self.b))

    @property
    def mean_successes(self) -> int:
        """``E[X] = N theta0``; raises unless it is an integer."""
        m = self.N * self.theta0
        k = round(m)
        if abs(m - k) > INTEGRALITY_TOL:
            raise IntegralityError(
                f"N*theta0 = {m:g} is not an integer (N={self.N}, theta0={self.theta0})"
            )
        return int(k)


@dataclass(frozen=True)
class CorrectedPmf:
    """Distribution of the corrected success count, indexed by ``0..N``.

    Entries are exact ``Fraction`` values; use :meth:`as_array` for floats.
    """

    probs: tuple

    def __post_init__(self):
        if any(p < 0 for p in self.probs):
            raise InputError("probabilities must be nonnegative")
        if abs(sum(self.probs) - 1) > 1e-12:
            raise InputError(f"pmf sums to {float(sum(self.probs))!r}, not 1")

    def __len__(self):
        return len(self.probs)

    def __getitem__(self, i):
        return self.probs[i]

    def as_array(self) -> np.ndarray:
        return np.array([float(p) for p in self.probs])


@lru_cache(maxsize=4096)
def binomial_pmf_exact(N: int, theta0: float) -> tuple[Fraction, ...]:
    theta = Fraction(theta0)
    return tuple(math.comb(N, x) * theta**x * (1 - theta) ** (N - x) for x in range(N + 1))


def corrected_pmf(theory: BinomialTheory) -> CorrectedPmf:
    """Closed-form pmf of the corrected success count.

    Outcomes below the mean shift up by ``b``, outcomes above shift down by
    ``b``, and every outcome within ``b`` of the mean lands on it.
    """
    N, b = theory.N, theory.b
    mean = theory.mean_successes
    p = binomial_pmf_exact(N, theory.theta0)

    def p_x(x):
        return p[x] if 0 <= x <= N else Fraction(0)

    probs = []
    for x in range(N + 1):
        if x < mean:
            probs.append(p_x(x - b))
        elif x > mean:
            probs.append(p_x(x + b))
        else:
            probs.append(sum((p_x(mean + k) for k in range(-b, b + 1)), Fraction(0)))
    return CorrectedPmf(tuple(probs))


def oracle_target(N: int, theta0: float) -> int:
    """Nearest integer to ``N theta0``, halves rounded away from zero."""
    return math.floor(N * theta0 + 0.5)


def correct_success_count(x: int, target: int, b: int) -> int:
    """Greedy teacher: move ``x`` toward ``target`` by at most ``b``."""
    step = min(b, abs(x - target))
    return x + step if x < target else x - step


def corrected_pmf_oracle(theory: BinomialTheory) -> CorrectedPmf:
    """Corrected pmf by enumerating every success count with its binomial weight.

    Accepts any ``theta0``; when ``N theta0`` is not integral the teacher
    aims at :func:`oracle_target`.
    """
    N, b = theory.N, theory.b
    if N > ORACLE_MAX_N:
        raise InstanceTooLargeError(f"enumeration oracle supports N <= {ORACLE_MAX_N}, got {N}")
    theta = Fraction(theory.theta0)
    target = oracle_target(N, theory.theta0)
    acc = [Fraction(0)] * (N + 1)
    for x in range(N + 1):
        weight = math.comb(N, x) * theta**x * (1 - theta) ** (N - x)
        acc[correct_success_count(x, target, b)] += weight
    return CorrectedPmf(tuple(acc))


def _moments_exact(pmf: CorrectedPmf, N: int) -> tuple[Fraction, Fraction]:
    probs = [Fraction(p) for p in pmf.probs]
    m1 = sum((x * p for x, p in enumerate(probs)), Fraction(0))
    m2 = sum((x * x * p for x, p in enumerate(probs)), Fraction(0))
    return m1 / N, (m2 - m1 * m1) / (N * N)


def estimator_moments(pmf: CorrectedPmf, N: int) -> tuple[float, float]:
    """Mean and variance of ``theta_tilde = X_tilde / N``."""
    mean, var = _moments_exact(pmf, N)
    return float(mean), float(var)


def _var_uncorrected_exact(N: int, theta0: float) -> Fraction:
    theta = Fraction(theta0)
    return theta * (1 - theta) / N


def variance_uncorrected(N: int, theta0: float) -> float:
    return float(_var_uncorrected_exact(N, theta0))


@lru_cache(maxsize=8192)
def _var_corrected_exact(theory: BinomialTheory) -> Fraction:
    return _moments_exact(corrected_pmf(theory), theory.N)[1]


def variance_corrected(theory: BinomialTheory) -> float:
    return float(_var_corrected_exact(theory))


def delta_reduction(theory: BinomialTheory) -> float:
    """Variance removed by the correction, ``var(theta_hat) - var(theta_tilde) >= 0``."""
    return float(_var_uncorrected_exact(theory.N, theory.theta0) - _var_corrected_exact(theory))


def variance_ratio(theory: BinomialTheory) -> float:
    if theory.theta0 in (0.0, 1.0):
        raise PreconditionError("variance ratio undefined for theta0 in {0, 1}: all observations are equal")
    return float(_var_corrected_exact(theory) / _var_uncorrected_exact(theory.N, theory.theta0))
