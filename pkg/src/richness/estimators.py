"""Point estimators of the number of species.

All estimators take a :class:`~richness.freq.FrequencyData` and require at
least one non-singleton observation (``n1 < n``).  Notation: ``u = n1/n``,
``v`` the Good-Toulmin statistic, ``T_lambda = n (N + n1/lambda)/(n - n1)``
the reconciliation estimate for a given prior parameter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import optimize

from .exceptions import DegenerateAllSingletons, SolverError
from .freq import FrequencyData
from .lambda_solver import LambdaSolution, solve_lambda


def _check(freq: FrequencyData) -> None:
    if freq.all_singletons:
        raise DegenerateAllSingletons()


def round_half_away(x) -> int:
    """Nearest integer, halves rounded away from zero."""
    if isinstance(x, Fraction):
        r = math.floor(abs(x) + Fraction(1, 2))
    else:
        r = math.floor(abs(x) + 0.5)
    return int(r) if x >= 0 else -int(r)


def t_httg(freq: FrequencyData) -> float:
    """Horvitz-Thompson estimate with Turing-Good coverage, ``nN/(n - n1)``."""
    _check(freq)
    return float(Fraction(freq.n * freq.N, freq.n - freq.n1))


def t_esty(freq: FrequencyData, k: float = 2.0) -> float:
    """Esty's negative-binomial correction of :func:`t_httg`."""
    _check(freq)
    if not k > 0:
        raise ValueError(f"k must be positive, got {k}")
    u = float(freq.u)
    return t_httg(freq) + freq.n * u / (1 - u) / k


def t_gamma(freq: FrequencyData, gamma2) -> float:
    """``N/(1-u) + n u/(1-u) * gamma2``: the Chao-Lee form for a given ``gamma2``."""
    _check(freq)
    if math.isinf(gamma2):
        return math.inf
    u = freq.u
    return float(freq.N / (1 - u) + freq.n * u / (1 - u) * Fraction(gamma2))


def t_lambda(freq: FrequencyData, lam) -> float:
    """Reconciliation estimate ``n (N + n1/lam)/(n - n1)``; ``lam = inf`` gives :func:`t_httg`."""
    _check(freq)
    if math.isinf(lam):
        return t_httg(freq)
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return freq.n * (freq.N + freq.n1 / lam) / (freq.n - freq.n1)


def t_plus_one(freq: FrequencyData) -> float:
    """:func:`t_lambda` at ``lam = 1`` (equivalently Chao-Lee with ``gamma2 = 1``)."""
    _check(freq)
    return float(Fraction(freq.n * (freq.N + freq.n1), freq.n - freq.n1))


def gamma2_chao_lee(freq: FrequencyData) -> float:
    """``max(t_httg * v - 1, 0)``."""
    _check(freq)
    g = Fraction(freq.n * freq.N, freq.n - freq.n1) * freq.v - 1
    return float(max(g, Fraction(0)))


def t_chao_lee(freq: FrequencyData) -> float:
    return t_gamma(freq, gamma2_chao_lee(freq))


def t_one(freq: FrequencyData) -> tuple:
    """Simultaneous solution of the Chao-Lee equation and ``gamma2 = T v - 1``.

    Returns ``(t_1, gamma2_1)`` with ``gamma2_1 = 0`` when ``u <= 1 - N v`` and
    ``(N v - 1 + u)/(1 - u + n u v)`` otherwise.
    """
    _check(freq)
    u, v, n, N = freq.u, freq.v, freq.n, freq.N
    if u <= 1 - N * v:
        g = Fraction(0)
    else:
        g = (N * v - 1 + u) / (1 - u + n * u * v)
    return t_gamma(freq, g), float(g)


# -- second-moment estimator ----------------------------------------------

_T2_LOG_LO, _T2_LOG_HI, _T2_SCAN = -3.0, 6.0, 200


def _t2_objective(freq: FrequencyData, lam, coupled: bool = False):
    """``sum_k p_k(lam)^2 - v`` for the extended add-lambda probabilities."""
    lam = np.asarray(lam, dtype=float)
    n, N, n1 = freq.n, freq.N, freq.n1
    if coupled:
        scaled = n * (N * lam + n1) / (n - n1)
    else:
        scaled = lam * (n * N / (n - n1))
    total = scaled + n
    return (freq.q + 2 * lam * n + lam * scaled) / total**2 - float(freq.v)


def t2_objective_limit(freq: FrequencyData) -> float:
    """Limit of the second-moment objective for large lambda (both readings)."""
    return float((1 - freq.u) / freq.N - freq.v)


def t_two(freq: FrequencyData, coupled: bool = False) -> tuple:
    """Second-moment estimator: ``(t_2, lambda_2nd)``.

    ``lambda_2nd`` minimises ``|sum_k p_k(lam)^2 - v|`` over
    ``lam`` in ``[1e-3, inf]``.  With ``coupled=True`` the species total
    inside ``p_k`` is the reconciliation value ``T_lam`` re-evaluated at each
    ``lam``; otherwise it is held at :func:`t_httg`.  ``t_2 = T_lam`` at the
    minimiser (so ``t_httg`` when ``lambda_2nd`` is infinite).

    The search scans 200 log-spaced points, refines a sign change with
    Brent's root finder or an interior minimum with bounded Brent
    minimisation, and compares the result with the large-lambda limit.
    """
    _check(freq)

    def obj(loglam):
        return _t2_objective(freq, 10.0**loglam, coupled)

    grid = np.linspace(_T2_LOG_LO, _T2_LOG_HI, _T2_SCAN)
    vals = obj(grid)
    absvals = np.abs(vals)
    limit = abs(t2_objective_limit(freq))
    k = int(np.argmin(absvals))

    sign_change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if limit <= absvals[k] and not sign_change.size:
        # scan is monotone towards the limit, unless a root sits beyond the scan
        loglam = _search_beyond(obj, grid[-1], vals[-1], t2_objective_limit(freq))
    elif absvals[k] == 0.0:
        loglam = grid[k]
    elif sign_change.size:
        # any root is a global minimiser; take the one closest to the scan minimum
        i = int(sign_change[np.argmin(np.abs(sign_change - k))])
        loglam = optimize.brentq(obj, grid[i], grid[i + 1], xtol=1e-13)
    else:
        lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
        res = optimize.minimize_scalar(
            lambda x: abs(float(obj(x))), bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-10},
        )
        if not res.success:
            raise SolverError(
                "second-moment minimisation failed",
                {"bracket": (lo, hi), "message": res.message},
            )
        loglam = res.x if abs(res.fun) <= absvals[k] else grid[k]

    if loglam is None:
        return t_httg(freq), math.inf
    lam2 = float(10.0**loglam)
    return t_lambda(freq, lam2), lam2


def _search_beyond(obj, start, start_val, limit_val):
    """Root of ``obj`` above ``start`` (log10 scale), or ``None`` for infinity."""
    if limit_val == 0 or np.sign(start_val) == np.sign(limit_val):
        return None
    lo, flo = start, start_val
    for hi in np.arange(start + 1.0, 16.0):
        fhi = float(obj(hi))
        if np.sign(fhi) != np.sign(flo):
            return optimize.brentq(obj, lo, hi, xtol=1e-13)
        lo, flo = hi, fhi
    return None


# -- the Bayesian estimator -----------------------------------------------

@dataclass(frozen=True)
class LambdaHatEstimate:
    t: float
    t_rounded: int
    solution: LambdaSolution

    def __iter__(self):
        return iter((self.t, self.t_rounded, self.solution))


def t_lambda_hat(freq: FrequencyData) -> LambdaHatEstimate:
    """Estimate of ``T`` at the selected prior parameter.

    ``t = n (N + n1/lambda_hat)/(n - n1)``, which is :func:`t_httg` when
    ``lambda_hat`` is infinite; ``t_rounded`` is the nearest integer.

    >>> from richness.freq import from_counts
    >>> t, t_int, sol = t_lambda_hat(from_counts([3, 3, 1, 1]))
    >>> round(t, 6), t_int, sol.lambda_hat
    (7.111111, 7, 1.5)
    """
    _check(freq)
    sol = solve_lambda(freq)
    n, N, n1 = freq.n, freq.N, freq.n1
    if sol.is_infinite:
        exact = Fraction(n * N, n - n1)
    elif sol.lambda_hat_exact is not None:
        exact = n * (N + n1 / sol.lambda_hat_exact) / (n - n1)
    else:
        exact = Fraction(t_lambda(freq, sol.lambda_hat))
    return LambdaHatEstimate(float(exact), round_half_away(exact), sol)


def t_lambda_hat_from_stats(n: int, N: int, n1: int, q: int) -> Fraction:
    """Exact ``T_lambda_hat`` from integer sample statistics.

    Branch decisions use integer arithmetic only (every condition multiplied
    through by ``n**2 (n-1)``), which makes this cheap enough for bootstrap
    loops.  ``q`` is ``sum_k m_k**2``.
    """
    n, N, n1, q = int(n), int(N), int(n1), int(q)
    if n1 >= n:
        raise DegenerateAllSingletons()
    if n == 1:
        return Fraction(N)
    # (N v + u - 1) * n (n-1)
    denom = N * (q - n) + (n1 - n) * (n - 1)
    if denom <= 0:
        return Fraction(n * N, n - n1)
    # (1 - u - v + uv - uvn) * n^2 (n-1)
    numer = n * (n - n1) * (n - 1) - (q - n) * (n - n1 + n * n1)
    if numer >= n * denom:
        # lambda2 = numer / (n * denom)
        return Fraction(n * (N * numer + n1 * n * denom), (n - n1) * numer)
    return Fraction(n * (N + n1), n - n1)


def t_lambda_hat_alternate(freq: FrequencyData) -> float:
    """Same estimate written directly in ``u`` and ``v``.

    Used as an independent cross-check of :func:`t_lambda_hat`.
    """
    _check(freq)
    u, v, n, N = freq.u, freq.v, freq.n, freq.N
    if u <= 1 - N * v:
        t = N / (1 - u)
    elif u <= (2 - v * (N + 1)) / (2 - v + v * n):
        t = (N - N * v - n * u) / (1 - u - v + u * v - u * v * n)
    else:
        t = (N + n * u) / (1 - u)
    return float(t)


# -- jackknife baseline ---------------------------------------------------

@lru_cache(maxsize=256)
def _jackknife_coefficients(k: int, order: int) -> tuple:
    """Coefficients ``a_j`` (j = 1..order) so that ``J = N + sum_j a_j f_j``.

    The order-m jackknife combines the mean species counts of all
    leave-d-out subsamples (d = 0..m) with weights cancelling bias terms in
    ``1/k, ..., 1/k^m``.  A species seen on j of k occasions disappears
    from a leave-d-out subsample with probability C(k-j, d-j)/C(k, d).
    """
    xs = [Fraction(1, k - d) for d in range(order + 1)]
    weights = []
    for d in range(order + 1):
        w = Fraction(1)
        for e in range(order + 1):
            if e != d:
                w *= (0 - xs[e]) / (xs[d] - xs[e])
        weights.append(w)
    coefs = []
    for j in range(1, order + 1):
        lost = sum(
            (weights[d] * Fraction(math.comb(k - j, d - j), math.comb(k, d))
             for d in range(j, order + 1)),
            Fraction(0),
        )
        coefs.append(-lost)
    return tuple(coefs)


@dataclass(frozen=True)
class JackknifeResult:
    estimate: Optional[float]
    order: Optional[int]
    estimates: tuple
    diagnostic: str = ""


def jackknife_estimates(freq: FrequencyData, max_order: int = 5) -> tuple:
    """Jackknife estimates of orders ``1..min(max_order, n-1)``, treating each
    observation as a sampling occasion."""
    _check(freq)
    k = freq.n
    top = min(max_order, k - 1)
    prev = freq.prevalences
    out = []
    for m in range(1, top + 1):
        a = _jackknife_coefficients(k, m)
        out.append(float(freq.N + sum(a[j - 1] * prev.get(j, 0) for j in range(1, m + 1))))
    return tuple(out)


def jackknife(freq: FrequencyData, max_order: int = 5, z: float = 1.959964) -> JackknifeResult:
    """Jackknife estimate with sequential order selection.

    Orders ``m`` and ``m+1`` are compared with the statistic
    ``(J_{m+1} - J_m)/sd``; the first non-significant comparison selects
    ``J_m``, as does an order ``m+1`` estimate below ``N``.  A non-positive
    variance with a non-zero difference yields no estimate.
    """
    _check(freq)
    k, N = freq.n, freq.N
    ests = jackknife_estimates(freq, max_order)
    if not ests:
        return JackknifeResult(None, None, ests, "sample too small for any jackknife order")
    prev = freq.prevalences
    for m in range(1, len(ests)):
        if ests[m] < N:
            # higher orders can undershoot the observed species count
            return JackknifeResult(ests[m - 1], m, ests, f"order {m + 1} falls below N")
        a_lo = _jackknife_coefficients(k, m) + (Fraction(0),)
        a_hi = _jackknife_coefficients(k, m + 1)
        b = [a_hi[j] - a_lo[j] for j in range(m + 1)]
        diff = ests[m] - ests[m - 1]
        if N < 2:
            var = 0.0
        else:
            ssq = float(sum(b[j - 1] ** 2 * prev.get(j, 0) for j in range(1, m + 2)))
            var = N / (N - 1) * (ssq - diff * diff / N)
        if not np.isfinite(var) or var <= 1e-12:
            if abs(diff) <= 1e-12:
                return JackknifeResult(ests[m - 1], m, ests)
            return JackknifeResult(
                None, None, ests, f"non-positive variance comparing orders {m} and {m + 1}"
            )
        if abs(diff) / math.sqrt(var) < z:
            return JackknifeResult(ests[m - 1], m, ests)
    return JackknifeResult(ests[-1], len(ests), ests)


def t_jackknife(freq: FrequencyData) -> Optional[float]:
    """Jackknife estimate, or ``None`` when order selection degenerates."""
    return jackknife(freq).estimate


# -- report ---------------------------------------------------------------

ESTIMATOR_NAMES = (
    "t_httg", "t_esty", "t_chao_lee", "t_plus_one", "t_jackknife",
    "t_1", "t_2", "t_lambda_hat",
)


@dataclass(frozen=True)
class EstimatorReport:
    """Every estimate of ``T`` (and of ``gamma2``) for one sample."""

    n: int
    N: int
    n1: int
    u: float
    v: float
    q: int
    t_httg: float
    t_esty: float
    esty_k: float
    t_chao_lee: float
    gamma2_chao_lee: float
    t_plus_one: float
    t_1: float
    gamma2_1: float
    t_2: float
    lambda_2nd: float
    t_lambda_hat: float
    t_lambda_hat_rounded: int
    lambda_solution: LambdaSolution
    t_jackknife: Optional[float] = None
    jackknife_order: Optional[int] = None
    jackknife_diagnostic: str = ""

    @property
    def lambda_hat(self) -> float:
        return self.lambda_solution.lambda_hat

    @property
    def gamma2_hat(self) -> float:
        return self.lambda_solution.gamma2_hat

    def estimates(self) -> dict:
        """Raw estimates of ``T`` keyed by estimator name."""
        return {name: getattr(self, name) for name in ESTIMATOR_NAMES}

    def to_dict(self) -> dict:
        d = {
            "n": self.n, "N": self.N, "n1": self.n1,
            "u": self.u, "v": self.v, "q": self.q,
        }
        d.update(self.lambda_solution.as_dict())
        d.update({
            "t_httg": self.t_httg,
            "t_esty": self.t_esty,
            "esty_k": self.esty_k,
            "t_chao_lee": self.t_chao_lee,
            "gamma2_chao_lee": self.gamma2_chao_lee,
            "t_plus_one": self.t_plus_one,
            "t_1": self.t_1,
            "gamma2_1": self.gamma2_1,
            "t_2": self.t_2,
            "lambda_2nd": None if math.isinf(self.lambda_2nd) else self.lambda_2nd,
            "t_jackknife": self.t_jackknife,
            "jackknife_order": self.jackknife_order,
            "jackknife_diagnostic": self.jackknife_diagnostic,
            "t_lambda_hat": self.t_lambda_hat,
            "t_lambda_hat_rounded": self.t_lambda_hat_rounded,
        })
        return d


def estimate_all(freq: FrequencyData, esty_k: float = 2.0, t2_coupled: bool = False) -> EstimatorReport:
    """Compute every estimator on one sample."""
    _check(freq)
    t1, g1 = t_one(freq)
    t2, lam2 = t_two(freq, coupled=t2_coupled)
    est = t_lambda_hat(freq)
    jk = jackknife(freq)
    return EstimatorReport(
        n=freq.n, N=freq.N, n1=freq.n1, u=float(freq.u), v=float(freq.v), q=freq.q,
        t_httg=t_httg(freq),
        t_esty=t_esty(freq, esty_k),
        esty_k=float(esty_k),
        t_chao_lee=t_chao_lee(freq),
        gamma2_chao_lee=gamma2_chao_lee(freq),
        t_plus_one=t_plus_one(freq),
        t_1=t1, gamma2_1=g1,
        t_2=t2, lambda_2nd=lam2,
        t_lambda_hat=est.t,
        t_lambda_hat_rounded=est.t_rounded,
        lambda_solution=est.solution,
        t_jackknife=jk.estimate,
        jackknife_order=jk.order,
        jackknife_diagnostic=jk.diagnostic,
    )
