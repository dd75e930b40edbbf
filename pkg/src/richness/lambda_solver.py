"""Selection of the Dirichlet prior parameter.

The prior parameter is chosen as ``argmin_{lambda >= 1} |f(lambda)|`` where

    f(lambda) = v - sum_k E[p_k^2]

is the gap between the Good-Toulmin statistic ``v`` and the posterior
second-moment sum, evaluated at the reconciliation value ``T = T_lambda``.
``f`` is increasing above its largest pole ``beta1 = -n/N`` and has a single
root ``lambda2`` there, so the minimiser has a closed form with three
branches (clamped at 1, the root itself, or infinity).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional

import numpy as np

from .exceptions import DegenerateAllSingletons, PoleError
from .freq import FrequencyData


class Branch(str, Enum):
    CLAMPED_TO_ONE = "clamped_to_one"
    INTERIOR_ROOT = "interior_root"
    INFINITE = "infinite"


@dataclass(frozen=True)
class LambdaSolution:
    """Selected prior parameter with the roots and poles of ``f``.

    ``lambda2`` is ``None`` when its denominator ``N*v + u - 1`` vanishes.
    ``lambda_hat_exact`` holds the rational value of a finite estimate when
    the inputs were rational.
    """

    lambda_hat: float
    branch: Branch
    lambda1: float
    lambda2: Optional[float]
    beta1: float
    beta2: float
    lambda_hat_exact: Optional[Fraction] = None

    @property
    def is_infinite(self) -> bool:
        return self.branch is Branch.INFINITE

    @property
    def gamma2_hat(self) -> float:
        """Estimated normalised interspecies variance ``1/lambda_hat``."""
        return 0.0 if self.is_infinite else 1.0 / self.lambda_hat

    def as_dict(self) -> dict:
        return {
            "lambda_hat": None if self.is_infinite else self.lambda_hat,
            "lambda_branch": self.branch.value,
            "gamma2_hat": self.gamma2_hat,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "beta1": self.beta1,
            "beta2": self.beta2,
        }


_FLOAT_SLACK = 1e-12


def lambda_branch(u, v, n, N) -> LambdaSolution:
    """Closed-form minimiser for free variables ``u, v`` with sample sizes.

    ``u`` and ``v`` may be :class:`~fractions.Fraction` (exact branch
    decisions) or floats (decisions with ``1e-12`` slack).  Requires
    ``u < 1``.
    """
    exact = isinstance(u, (Fraction, int)) and isinstance(v, (Fraction, int))
    if not exact:
        u, v = float(u), float(v)
    if u >= 1:
        raise DegenerateAllSingletons()
    one = Fraction(1) if exact else 1.0
    lambda1 = float((-2 * n + n * u) / N)
    beta1 = -n / N
    beta2 = float(-n / N - (one - u) / N)
    denom = N * v + u - one
    numer = one - u - v + u * v - u * v * n
    lambda2 = None if denom == 0 else numer / denom

    if denom <= 0:
        return LambdaSolution(math.inf, Branch.INFINITE, lambda1,
                              None if lambda2 is None else float(lambda2), beta1, beta2)
    limit = 1 if exact else 1 - _FLOAT_SLACK
    if lambda2 >= limit:
        lam = max(lambda2, one)
        return LambdaSolution(float(lam), Branch.INTERIOR_ROOT, lambda1, float(lambda2),
                              beta1, beta2, lam if exact else None)
    return LambdaSolution(1.0, Branch.CLAMPED_TO_ONE, lambda1, float(lambda2),
                          beta1, beta2, Fraction(1) if exact else None)


def solve_lambda(freq: FrequencyData) -> LambdaSolution:
    """Select the prior parameter for a sample.

    Raises
    ------
    DegenerateAllSingletons
        If every observation is a singleton.

    Examples
    --------
    >>> from richness.freq import from_counts
    >>> solve_lambda(from_counts([3, 3, 1, 1])).lambda_hat
    1.5
    """
    if freq.all_singletons:
        raise DegenerateAllSingletons()
    return lambda_branch(freq.u, freq.v, freq.n, freq.N)


def _scaled_total(freq, lam):
    # T_lambda * lambda, finite for every lambda including 0 and negatives
    u = float(freq.u)
    return (freq.N * lam + freq.n * u) / (1.0 - u)


def f_of_lambda(freq: FrequencyData, lam):
    """``v - sum_k E[p_k^2]`` at ``T = T_lambda``; vectorised over ``lam``.

    Defined for every ``lam`` above the pole ``beta1 = -n/N``.
    """
    if freq.all_singletons:
        raise DegenerateAllSingletons()
    lam_arr = np.asarray(lam, dtype=float)
    n, N = freq.n, freq.N
    u = float(freq.u)
    beta1 = -n / N
    beta2 = beta1 - (1 - u) / N
    if np.any(np.isclose(lam_arr, beta1, rtol=0, atol=1e-14)) or np.any(
        np.isclose(lam_arr, beta2, rtol=0, atol=1e-14)
    ):
        raise PoleError(f"f has poles at {beta1} and {beta2}")
    scaled = _scaled_total(freq, lam_arr)
    A = scaled + n
    # q + n(2 lam + 1) + (lam + 1) T lam, rewritten with A = T lam + n
    second = (freq.q + n * lam_arr) / (A * (A + 1)) + (lam_arr + 1) / (A + 1)
    out = float(freq.v) - second
    return float(out) if out.ndim == 0 else out


def f_limit(freq: FrequencyData) -> float:
    """Limit of ``f`` as lambda grows without bound: ``(N v + u - 1)/N``."""
    return float((freq.N * freq.v + freq.u - 1) / freq.N)


def verify_monotonicity(freq: FrequencyData, grid) -> bool:
    """True iff ``f`` is non-decreasing along a sorted grid above ``beta1``."""
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) < 0):
        raise ValueError("grid must be sorted")
    if np.any(grid <= -freq.n / freq.N):
        raise ValueError("grid must lie above the pole -n/N")
    vals = f_of_lambda(freq, grid)
    vals = np.atleast_1d(vals)
    # cancellation noise grows with |f| near the pole
    tol = 1e-9 * (np.maximum(np.abs(vals[:-1]), np.abs(vals[1:])) + 1.0)
    return bool(np.all(np.diff(vals) >= -tol))
