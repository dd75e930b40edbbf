"""Reconstruction of the full species probability vector.

Observed species get their posterior means at ``(T_hat, lambda_hat)``.  The
``T_hat - N`` unobserved species share the Turing-Good mass ``u`` through a
geometric tail ``p_{N+j} = c * alpha**j`` whose second moment is matched to
a target ``V~`` (see :func:`v_tilde`).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy import optimize

from .estimators import t_lambda_hat
from .exceptions import InfeasibleTail, InvalidT, NoUnobservedSpecies
from .freq import FrequencyData
from .lambda_solver import LambdaSolution
from .posterior import PosteriorParams, mean_p, sum_second_moments


class TailMode(str, Enum):
    GEOMETRIC = "geometric_tail"
    UNIFORM = "uniform_tail"
    NO_UNOBSERVED = "no_unobserved"


ALPHA_MIN = 1e-9
_ALPHA_MAX = 1.0 - 1e-12


def _check_t(freq: FrequencyData, t_hat) -> None:
    if not (np.isfinite(t_hat) and t_hat >= freq.N):
        raise InvalidT(f"T_hat={t_hat} must be finite and >= N={freq.N}")


def observed_probs(freq: FrequencyData, solution: LambdaSolution, t_hat) -> np.ndarray:
    """Posterior means of the ``N`` observed species at ``(t_hat, lambda_hat)``.

    ``1/t_hat`` each when ``lambda_hat`` is infinite.
    """
    _check_t(freq, t_hat)
    m = freq.counts_array().astype(float)
    if solution.is_infinite:
        return np.full(freq.N, 1.0 / t_hat)
    lam = solution.lambda_hat
    return (m + lam) / (t_hat * lam + freq.n)


def _posterior_terms(freq, solution, t_hat):
    """``(sum_k E[p_k^2], sum_{k<=N} E[p_k]^2)`` with uniform limits for infinite lambda."""
    if solution.is_infinite:
        return 1.0 / t_hat, freq.N / t_hat**2
    params = PosteriorParams.from_freq(freq, t_hat, solution.lambda_hat)
    means = np.array([mean_p(params, i) for i in range(1, freq.N + 1)])
    return sum_second_moments(params), float(np.sum(means**2))


def v_tilde_raw(freq: FrequencyData, solution: LambdaSolution, t_hat) -> tuple:
    """Unclamped tail second-moment target and whether the posterior sum was used.

    Returns ``(max(v, sum_k E[p_k^2]) - sum_{k<=N} E[p_k]^2, used_posterior)``.
    """
    _check_t(freq, t_hat)
    post_sum, obs_sq = _posterior_terms(freq, solution, t_hat)
    v = float(freq.v)
    used_posterior = post_sum > v
    return max(v, post_sum) - obs_sq, used_posterior


def v_tilde(freq: FrequencyData, solution: LambdaSolution, t_hat) -> float:
    """Second-moment target for the unobserved tail.

    Clamped from below at ``u**2/(t_hat - N)``, the smallest second moment
    any tail of mass ``u`` spread over ``t_hat - N`` species can have.
    """
    _check_t(freq, t_hat)
    if t_hat - freq.N <= 0:
        raise NoUnobservedSpecies(f"T_hat={t_hat} equals N; there is no tail")
    raw, _ = v_tilde_raw(freq, solution, t_hat)
    u = float(freq.u)
    return max(raw, u * u / (t_hat - freq.N))


def tail_ratio(alpha, M: int):
    r"""``sum p^2 / (sum p)^2`` for a geometric tail of ``M`` terms.

    Equals :math:`\frac{1-\alpha}{1+\alpha}\frac{1+\alpha^M}{1-\alpha^M}`,
    decreasing from 1 at ``alpha -> 0`` to ``1/M`` at ``alpha = 1``.
    """
    alpha = np.asarray(alpha, dtype=float)
    with np.errstate(divide="ignore"):
        log_a = np.log(alpha)
    aM = np.exp(M * log_a)
    one_minus_aM = -np.expm1(M * log_a)
    return (1 - alpha) / (1 + alpha) * (1 + aM) / one_minus_aM


@dataclass(frozen=True)
class TailFit:
    c: float
    alpha: float
    mode: TailMode
    M: int

    def probs(self) -> np.ndarray:
        """The ``M`` tail probabilities ``c * alpha**j``, ``j = 1..M``."""
        if self.M == 0:
            return np.zeros(0)
        first = self.c * self.alpha
        return first * self.alpha ** np.arange(self.M, dtype=float)


def _first_term(u_target, alpha, M):
    if alpha == 1.0:
        return u_target / M
    return u_target * (1 - alpha) / -math.expm1(M * math.log(alpha))


def solve_tail(u_target: float, v_target: float, M: int) -> TailFit:
    """Fit ``(c, alpha)`` so that ``M`` geometric terms have the requested
    sum and sum of squares.

    With ``M == 1`` the single tail value is forced to ``u_target`` and
    ``v_target`` is ignored.  A target on the floor ``u_target**2/M``
    returns the uniform tail ``alpha = 1``.

    Raises
    ------
    InfeasibleTail
        If ``v_target`` is below the floor or not below ``u_target**2``.
    """
    if not u_target > 0:
        raise InfeasibleTail(f"tail mass must be positive, got {u_target}")
    if M < 1:
        raise InfeasibleTail("tail needs at least one species")
    if M == 1:
        return TailFit(c=u_target, alpha=1.0, mode=TailMode.UNIFORM, M=1)
    floor = u_target**2 / M
    if v_target < floor * (1 - 1e-12):
        raise InfeasibleTail(f"v_target={v_target} below the floor {floor}")
    if v_target >= u_target**2:
        raise InfeasibleTail(f"v_target={v_target} not below u_target**2={u_target**2}")
    if v_target <= floor * (1 + 1e-12):
        return TailFit(c=u_target / M, alpha=1.0, mode=TailMode.UNIFORM, M=M)
    ratio = v_target / u_target**2
    if ratio >= tail_ratio(ALPHA_MIN, M):
        raise InfeasibleTail(f"v_target={v_target} needs alpha < {ALPHA_MIN}")
    if ratio <= tail_ratio(_ALPHA_MAX, M):
        alpha = _ALPHA_MAX
    else:
        alpha = optimize.brentq(
            lambda a: float(tail_ratio(a, M)) - ratio, ALPHA_MIN, _ALPHA_MAX,
            xtol=1e-15, rtol=4 * np.finfo(float).eps,
        )
    c = _first_term(u_target, alpha, M) / alpha
    return TailFit(c=c, alpha=alpha, mode=TailMode.GEOMETRIC, M=M)


@dataclass(frozen=True)
class ReconstructedPopulation:
    """Estimated probabilities of all ``t_hat`` species.

    The first ``n_observed`` entries belong to the observed species (in the
    order of ``FrequencyData.counts``), the rest form the tail.
    """

    probs: np.ndarray
    n_observed: int
    t_hat: int
    c: float
    alpha: float
    v_tilde: float
    v_tilde_raw: float
    mode: TailMode
    tail_second_moment: float = 0.0
    labels: Optional[tuple] = None

    @property
    def tail(self) -> np.ndarray:
        return self.probs[self.n_observed:]

    def to_csv(self, path_or_file) -> None:
        """Write ``index,probability`` rows (1-based index)."""
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
        try:
            writer = csv.writer(fh)
            writer.writerow(["index", "probability"])
            for i, p in enumerate(self.probs, 1):
                writer.writerow([i, repr(float(p))])
        finally:
            if own:
                fh.close()


def reconstruct_population(freq: FrequencyData, tail: str = "geometric") -> ReconstructedPopulation:
    """Estimate the whole species distribution from a sample.

    Parameters
    ----------
    freq : FrequencyData
    tail : {"geometric", "uniform"}
        Geometric tail fitted to ``(u, V~)``, or ``u`` split evenly.

    The estimate of ``T`` is rounded, which breaks the identity
    ``sum(observed) = 1 - u``; the observed block is rescaled to ``1 - u``
    so that the tail keeps exactly the Turing-Good mass.
    """
    if tail not in ("geometric", "uniform"):
        raise ValueError(f"unknown tail family {tail!r}")
    est = t_lambda_hat(freq)
    sol, t_hat = est.solution, est.t_rounded
    N = freq.N
    u = float(freq.u)
    obs = observed_probs(freq, sol, t_hat)
    M = t_hat - N

    if M <= 0 or u == 0.0:
        probs = obs / obs.sum()
        return ReconstructedPopulation(
            probs=probs, n_observed=N, t_hat=N, c=0.0, alpha=1.0, v_tilde=0.0,
            v_tilde_raw=0.0, mode=TailMode.NO_UNOBSERVED, labels=freq.labels,
        )

    obs = obs * ((1.0 - u) / obs.sum())
    raw, _ = v_tilde_raw(freq, sol, t_hat)
    target = v_tilde(freq, sol, t_hat)
    if M > 1:
        # beyond this ratio the tail would need alpha < ALPHA_MIN
        target = min(target, u * u * float(tail_ratio(ALPHA_MIN, M)) * (1 - 1e-12))
    else:
        # a single unobserved species carries all of u, so its square is fixed
        target = u * u
    if tail == "uniform":
        fit = TailFit(c=u / M, alpha=1.0, mode=TailMode.UNIFORM, M=M)
    else:
        fit = solve_tail(u, target, M)
    tail_p = fit.probs()
    tail_sq = float(np.sum(tail_p**2))
    probs = np.concatenate([obs, tail_p])
    # deep tail entries of a steep geometric can underflow
    probs = np.maximum(probs, np.finfo(float).tiny)
    probs = probs / math.fsum(probs)
    return ReconstructedPopulation(
        probs=probs, n_observed=N, t_hat=t_hat, c=fit.c, alpha=fit.alpha,
        v_tilde=target, v_tilde_raw=raw, mode=fit.mode, tail_second_moment=tail_sq,
        labels=freq.labels,
    )
