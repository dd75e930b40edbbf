"""Closed-form moments of the symmetric Dirichlet posterior.

With a Dirichlet(lambda, ..., lambda) prior on the probabilities of ``T``
species and a sample with counts ``m_1..m_N`` (``m_i = 0`` for ``i > N``),
the posterior is Dirichlet(m_1 + lambda, ..., m_T + lambda).  All moments
below are ratios of its parameters to ``A = T*lambda + n``.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass

from .exceptions import EqualIndices
from .freq import FrequencyData


@dataclass(frozen=True)
class PosteriorParams:
    """Parameters of the posterior given a sample.

    Parameters
    ----------
    T : float
        Assumed total number of species, ``T >= N``.  Real values are
        allowed because estimators plug in non-integer ``T``.
    lam : float
        Prior parameter.  ``lam >= 1`` unless ``relaxed`` is set, in which
        case any ``lam > 0`` is accepted.
    counts : tuple of int
        Observed counts; may be empty (prior only).
    """

    T: float
    lam: float
    counts: tuple = ()
    relaxed: bool = False

    def __post_init__(self):
        if math.isinf(self.lam):
            raise ValueError(
                "lambda = inf has no posterior; use the uniform limiting forms"
            )
        if self.relaxed:
            if not self.lam > 0:
                raise ValueError(f"lambda must be > 0, got {self.lam}")
        elif not self.lam >= 1:
            raise ValueError(f"lambda must be >= 1, got {self.lam}")
        if self.T < len(self.counts):
            raise ValueError(f"T={self.T} is smaller than N={len(self.counts)}")
        if any(m < 1 for m in self.counts):
            raise ValueError("observed counts must be >= 1")

    @classmethod
    def from_freq(cls, freq: FrequencyData, T, lam, relaxed=False) -> "PosteriorParams":
        return cls(T=T, lam=lam, counts=tuple(freq.counts), relaxed=relaxed)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def N(self) -> int:
        return len(self.counts)

    @property
    def q(self) -> int:
        return sum(m * m for m in self.counts)

    @property
    def total(self) -> float:
        """Posterior concentration ``T*lambda + n``."""
        return self.T * self.lam + self.n

    def count(self, i: int) -> int:
        """``m_i`` for a 1-based species index."""
        if isinstance(i, bool) or not (isinstance(i, numbers.Integral) and 1 <= i <= self.T):
            raise IndexError(f"species index {i!r} outside 1..{self.T}")
        i = int(i)
        return self.counts[i - 1] if i <= self.N else 0


def mean_p(params: PosteriorParams, i: int) -> float:
    """Posterior mean ``(m_i + lambda) / (T*lambda + n)``."""
    return (params.count(i) + params.lam) / params.total


def second_moment_p(params: PosteriorParams, i: int) -> float:
    a = params.count(i) + params.lam
    A = params.total
    return a * (a + 1) / (A * (A + 1))


def cross_moment_p(params: PosteriorParams, i: int, j: int) -> float:
    """``E[p_i p_j]`` for ``i != j``."""
    if i == j:
        raise EqualIndices("use second_moment_p for i == j")
    a = params.count(i) + params.lam
    b = params.count(j) + params.lam
    A = params.total
    return a * b / (A * (A + 1))


def sum_second_moments(params: PosteriorParams) -> float:
    r"""Closed form of :math:`\sum_{k=1}^T E[p_k^2]`.

    .. math::

       \frac{q + n(2\lambda + 1) + T(\lambda^2 + \lambda)}{(T\lambda + n + 1)(T\lambda + n)}
    """
    lam, n, T = params.lam, params.n, params.T
    A = params.total
    return (params.q + n * (2 * lam + 1) + T * (lam * lam + lam)) / ((A + 1) * A)


def posterior_unseen_mass(params: PosteriorParams) -> float:
    """Posterior expected mass of the ``T - N`` unobserved species."""
    return (params.T - params.N) * params.lam / params.total


def mean_vector(params: PosteriorParams, upto: int | None = None) -> list:
    """Posterior means for indices ``1..upto`` (default ``floor(T)``)."""
    upto = int(math.floor(params.T)) if upto is None else upto
    return [mean_p(params, i) for i in range(1, upto + 1)]
