"""Simulation harness: synthetic populations, replicate sampling and
percentile-bootstrap confidence intervals for the number of species.

Randomness
----------
All draws use numpy's PCG64 bit generator.  A run with seed ``s`` gives
replicate ``k`` its own stream seeded by ``SeedSequence(s, spawn_key=(k,))``,
so results depend only on ``(seed, parameters)`` and never on the number of
worker processes.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .estimators import (
    ESTIMATOR_NAMES, estimate_all, round_half_away, t_lambda_hat, t_lambda_hat_from_stats,
)
from .exceptions import CIUnreliable, EmptySample
from .freq import FrequencyData, from_count_vector
from .reconstruct import reconstruct_population

GENERATORS = ("normal", "uniform", "exponential", "gamma")


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent PCG64 generator for ``(seed, key...)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass(frozen=True)
class PopulationSpec:
    """Recipe for a synthetic population of ``T`` species.

    ``T`` i.i.d. positive draws from ``generator`` are normalised to sum to 1.

    Parameters
    ----------
    generator : {"normal", "uniform", "exponential", "gamma"}
        ``normal`` draws N(mu, sigma) truncated to positive values (default
        ``gamma2`` close to 0.009); ``uniform`` is U[0, 1] (about 1/3);
        ``exponential`` is Exp(1) (about 1); ``gamma`` is Gamma(shape, 1)
        (about ``1/shape``).
    """

    T: int
    generator: str = "uniform"
    seed: int = 0
    mu: float = 1.0
    sigma: float = 0.095
    shape: float = 0.11

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}; choose from {GENERATORS}")
        if self.T < 1:
            raise ValueError("T must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "PopulationSpec":
        return cls(**{k: d[k] for k in ("T", "generator", "seed", "mu", "sigma", "shape") if k in d})


def _draw(rng, spec: PopulationSpec, size: int) -> np.ndarray:
    if spec.generator == "normal":
        return rng.normal(spec.mu, spec.sigma, size)
    if spec.generator == "uniform":
        return rng.uniform(0.0, 1.0, size)
    if spec.generator == "exponential":
        return rng.exponential(1.0, size)
    return rng.gamma(spec.shape, 1.0, size)


def generate_population(spec: PopulationSpec) -> np.ndarray:
    """Probability vector of length ``spec.T``; non-positive draws are redrawn."""
    rng = stream(spec.seed)
    x = _draw(rng, spec, spec.T)
    bad = x <= 0
    while bad.any():
        x[bad] = _draw(rng, spec, int(bad.sum()))
        bad = x <= 0
    return x / math.fsum(x)


def true_gamma2(probs) -> float:
    """Normalised interspecies variance ``T * sum p_k^2 - 1``."""
    p = np.asarray(probs, dtype=float)
    return max(p.size * math.fsum(p * p) - 1.0, 0.0)


def sample_counts(probs, n: int, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Per-species counts of ``n`` draws with replacement."""
    return rng.multinomial(n, probs, size=size)


# -- replicates -----------------------------------------------------------

@dataclass(frozen=True)
class EstimatorStats:
    mean: float
    sd: float
    rmse: float
    count: int

    @property
    def mse(self) -> float:
        """Mean squared error, the square of ``rmse``."""
        return self.rmse**2

    def as_dict(self) -> dict:
        return {"mean": self.mean, "sd": self.sd, "rmse": self.rmse, "mse": self.mse,
                "count": self.count}


def summarize(values, true_t: float) -> EstimatorStats:
    """Mean, population SD and root-mean-square error against ``true_t``."""
    x = np.asarray([v for v in values if v is not None and np.isfinite(v)], dtype=float)
    if x.size == 0:
        return EstimatorStats(math.nan, math.nan, math.nan, 0)
    mean = math.fsum(x) / x.size
    sd = math.sqrt(math.fsum((x - mean) ** 2) / x.size)
    rmse = math.sqrt(math.fsum((x - true_t) ** 2) / x.size)
    return EstimatorStats(mean, sd, rmse, int(x.size))


@dataclass(frozen=True)
class ReplicateSummary:
    """Per-estimator summary over ``R`` replicate samples of size ``n``.

    The error column is the root-mean-square error, so ``rmse**2 = sd**2 +
    bias**2``.  Replicates where every observation was a singleton are
    excluded and counted in ``n_degenerate``.
    """

    n: int
    R: int
    true_t: float
    n_degenerate: int
    stats: dict
    gamma2_true: Optional[float] = None

    @property
    def degenerate_fraction(self) -> float:
        return self.n_degenerate / self.R

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "R": self.R,
            "true_t": self.true_t,
            "gamma2_true": self.gamma2_true,
            "n_degenerate": self.n_degenerate,
            "degenerate_fraction": self.degenerate_fraction,
            "estimators": {k: s.as_dict() for k, s in self.stats.items()},
        }

    def rows(self) -> list:
        return [
            {"estimator": name, "n": self.n, "mean": s.mean, "sd": s.sd,
             "rmse": s.rmse, "mse": s.mse, "count": s.count}
            for name, s in self.stats.items()
        ]


def _replicate_estimates(args):
    probs, n, seed, indices, esty_k, t2_coupled = args
    out = []
    for k in indices:
        counts = sample_counts(probs, n, stream(seed, k))
        freq = from_count_vector(counts)
        if freq.all_singletons:
            out.append(None)
            continue
        out.append(estimate_all(freq, esty_k=esty_k, t2_coupled=t2_coupled).estimates())
    return out


def run_replicates(
    probs,
    n: int,
    R: int,
    seed: int = 0,
    true_t: Optional[float] = None,
    esty_k: float = 2.0,
    t2_coupled: bool = False,
    workers: int = 1,
) -> ReplicateSummary:
    """Draw ``R`` samples of size ``n`` from ``probs`` and summarise every estimator.

    ``true_t`` defaults to ``len(probs)``.  ``workers > 1`` spreads replicates
    over processes without changing the result.
    """
    probs = np.asarray(probs, dtype=float)
    if n < 2:
        raise ValueError("sample size n must be >= 2")
    if R < 1:
        raise ValueError("need at least one replicate")
    true_t = float(probs.size if true_t is None else true_t)
    idx = list(range(R))
    if workers > 1:
        chunks = [idx[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(
                _replicate_estimates,
                [(probs, n, seed, c, esty_k, t2_coupled) for c in chunks],
            ))
        results = [None] * R
        for c, part in zip(chunks, parts):
            for k, r in zip(c, part):
                results[k] = r
    else:
        results = _replicate_estimates((probs, n, seed, idx, esty_k, t2_coupled))
    good = [r for r in results if r is not None]
    stats = {
        name: summarize([r[name] for r in good], true_t) for name in ESTIMATOR_NAMES
    }
    return ReplicateSummary(
        n=n, R=R, true_t=true_t, n_degenerate=R - len(good), stats=stats,
        gamma2_true=true_gamma2(probs),
    )


# -- bootstrap ------------------------------------------------------------

def resample_t_lambda_hat(probs, n: int, B: int, rng: np.random.Generator) -> tuple:
    """Rounded ``T_lambda_hat`` on ``B`` samples of size ``n`` drawn from ``probs``.

    Returns ``(estimates, n_degenerate)``; degenerate resamples are dropped.
    """
    X = sample_counts(probs, n, rng, size=B)
    N = (X > 0).sum(axis=1)
    n1 = (X == 1).sum(axis=1)
    q = (X.astype(np.int64) ** 2).sum(axis=1)
    out = []
    for Ni, n1i, qi in zip(N.tolist(), n1.tolist(), q.tolist()):
        if n1i >= n:
            continue
        out.append(round_half_away(t_lambda_hat_from_stats(n, Ni, n1i, qi)))
    return np.asarray(out, dtype=float), B - len(out)


def percentile_interval(estimates, level: float, floor: int = 0) -> tuple:
    """Integer percentile interval ``[(1-level)/2, 1-(1-level)/2]``.

    The lower end is rounded down and clamped at ``floor``; the upper end is
    rounded up.
    """
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    a = (1 - level) / 2
    lo, hi = np.quantile(np.asarray(estimates, dtype=float), [a, 1 - a])
    return max(int(math.floor(lo)), floor), int(math.ceil(hi))


@dataclass(frozen=True)
class BootstrapCI:
    lower: int
    upper: int
    level: float
    point: int
    B: int
    n_degenerate: int
    unreliable: bool

    def __iter__(self):
        return iter((self.lower, self.upper))

    @property
    def width(self) -> int:
        return self.upper - self.lower

    def to_dict(self) -> dict:
        return {
            "level": self.level, "lower": self.lower, "upper": self.upper,
            "point": self.point, "B": self.B, "n_degenerate": self.n_degenerate,
            "unreliable": self.unreliable,
        }


_UNRELIABLE_FRACTION = 0.2


def bootstrap_distribution(freq: FrequencyData, n: Optional[int] = None, B: int = 1000,
                           seed: int = 0, rng: Optional[np.random.Generator] = None) -> tuple:
    """Resampled estimates from the reconstructed population.

    Returns ``(estimates, n_degenerate, population)``.
    """
    if B < 100:
        raise ValueError("need at least 100 bootstrap resamples")
    n = freq.n if n is None else n
    pop = reconstruct_population(freq)
    rng = stream(seed) if rng is None else rng
    est, bad = resample_t_lambda_hat(pop.probs, n, B, rng)
    return est, bad, pop


def bootstrap_ci(freq: FrequencyData, n: Optional[int] = None, level=0.95, B: int = 1000,
                 seed: int = 0):
    """Percentile bootstrap interval(s) for ``T``.

    ``level`` may be a single value or a sequence; several levels share one
    set of resamples.  More than 20% degenerate resamples marks the result
    unreliable and emits :class:`~richness.exceptions.CIUnreliable`.
    """
    est, bad, pop = bootstrap_distribution(freq, n, B, seed)
    point = t_lambda_hat(freq).t_rounded
    unreliable = bad > _UNRELIABLE_FRACTION * B
    if unreliable:
        warnings.warn(f"{bad} of {B} bootstrap resamples were degenerate", CIUnreliable,
                      stacklevel=2)
    if est.size == 0:
        raise EmptySample("every bootstrap resample was degenerate")
    levels = [level] if np.isscalar(level) else list(level)
    out = []
    for lv in levels:
        lo, hi = percentile_interval(est, lv, floor=freq.N)
        out.append(BootstrapCI(lo, hi, float(lv), point, B, bad, unreliable))
    return out[0] if np.isscalar(level) else out


@dataclass(frozen=True)
class ConfidenceRun:
    """Coverage of bootstrap intervals over repeated samples."""

    level: float
    B: int
    repeats: int
    n: int
    true_t: float
    hits: int
    mean_width: float
    n_unreliable: int = 0

    @property
    def hit_fraction(self) -> float:
        return self.hits / self.repeats

    def to_dict(self) -> dict:
        return {
            "level": self.level, "B": self.B, "repeats": self.repeats, "n": self.n,
            "true_t": self.true_t, "hits": self.hits, "hit_fraction": self.hit_fraction,
            "mean_width": self.mean_width, "n_unreliable": self.n_unreliable,
        }


def confidence_coverage(
    probs,
    n: int,
    levels: Sequence[float] = (0.90, 0.95, 0.99),
    B: int = 1000,
    repeats: int = 100,
    seed: int = 0,
    true_t: Optional[float] = None,
) -> list:
    """Repeat: sample ``n`` from ``probs``, build bootstrap intervals, check for ``true_t``.

    Returns one :class:`ConfidenceRun` per level; all levels share the same
    samples and resamples.
    """
    probs = np.asarray(probs, dtype=float)
    true_t = float(probs.size if true_t is None else true_t)
    hits = {lv: 0 for lv in levels}
    widths = {lv: [] for lv in levels}
    done = 0
    unreliable = 0
    for r in range(repeats):
        rng = stream(seed, r)
        freq = from_count_vector(sample_counts(probs, n, rng))
        if freq.all_singletons:
            # no interval can be built; counts as a miss
            unreliable += 1
            done += 1
            continue
        est, bad, _ = bootstrap_distribution(freq, n, B, rng=rng)
        if bad > _UNRELIABLE_FRACTION * B:
            unreliable += 1
        done += 1
        if est.size == 0:
            continue
        for lv in levels:
            lo, hi = percentile_interval(est, lv, floor=freq.N)
            widths[lv].append(hi - lo)
            hits[lv] += int(lo <= true_t <= hi)
    return [
        ConfidenceRun(
            level=float(lv), B=B, repeats=done, n=n, true_t=true_t, hits=hits[lv],
            mean_width=math.fsum(widths[lv]) / len(widths[lv]) if widths[lv] else math.nan,
            n_unreliable=unreliable,
        )
        for lv in levels
    ]
