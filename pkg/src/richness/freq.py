"""Sample ingestion and the frequency statistics every estimator consumes.

A sample of size ``n`` drawn with replacement is summarised by its species
counts ``m_1 >= m_2 >= ... >= m_N >= 1`` or, equivalently, by its
prevalences ``n_j`` (the number of species seen exactly ``j`` times).  The
derived statistics ``u`` (Turing-Good unseen mass ``n_1/n``) and ``v``
(Good-Toulmin estimate of ``sum p_k^2``) are kept as exact fractions so
that branch decisions downstream never flip on rounding noise.
"""
from __future__ import annotations

import numbers
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .exceptions import EmptySample, InvalidCount, InvalidPrevalence


def _as_positive_int(value, exc=InvalidCount) -> int:
    if isinstance(value, bool):
        raise exc(f"boolean is not a valid count: {value!r}")
    if isinstance(value, numbers.Integral):
        ivalue = int(value)
    elif isinstance(value, numbers.Real) and float(value).is_integer():
        ivalue = int(value)
    else:
        raise exc(f"count must be an integer, got {value!r}")
    if ivalue < 1:
        raise exc(f"count must be >= 1, got {ivalue}")
    return ivalue


@dataclass(frozen=True)
class FrequencyData:
    """Immutable summary of a sample.

    Parameters
    ----------
    counts : tuple of int
        Observations per observed species, sorted in non-increasing order.
    labels : tuple, optional
        Species labels aligned with ``counts`` when the sample came from raw
        tokens.

    Use :func:`from_raw_sample`, :func:`from_counts` or
    :func:`from_prevalences` rather than calling the constructor directly.
    """

    counts: tuple
    labels: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.counts) == 0:
            raise EmptySample("sample contains no observations")
        for a, b in zip(self.counts, self.counts[1:]):
            if a < b:
                raise InvalidCount("counts must be sorted in non-increasing order")
        if self.counts[-1] < 1:
            raise InvalidCount("counts must be >= 1")
        if self.labels is not None and len(self.labels) != len(self.counts):
            raise ValueError("labels and counts differ in length")

    @cached_property
    def prevalences(self) -> dict:
        """Mapping ``j -> n_j`` sorted by ``j``."""
        return dict(sorted(Counter(self.counts).items()))

    @cached_property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def N(self) -> int:
        return len(self.counts)

    @cached_property
    def n1(self) -> int:
        return self.prevalences.get(1, 0)

    @cached_property
    def q(self) -> int:
        return sum(j * j * nj for j, nj in self.prevalences.items())

    @cached_property
    def u(self) -> Fraction:
        return Fraction(self.n1, self.n)

    @cached_property
    def v(self) -> Fraction:
        n = self.n
        if n == 1:
            # numerator sum j(j-1)n_j is 0 as well
            return Fraction(0)
        return Fraction(self.q - n, n * (n - 1))

    @property
    def coverage_hat(self) -> Fraction:
        return 1 - self.u

    @property
    def all_singletons(self) -> bool:
        return self.n1 == self.n

    def counts_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.int64)

    def summary(self) -> dict:
        """Plain-dict record of the sample statistics."""
        return {
            "n": self.n,
            "N": self.N,
            "n1": self.n1,
            "u": float(self.u),
            "v": float(self.v),
            "q": self.q,
            "coverage_hat": float(self.coverage_hat),
            "prevalences": {str(j): nj for j, nj in self.prevalences.items()},
        }


def from_raw_sample(tokens: Iterable[Hashable]) -> FrequencyData:
    """Build frequency data from a sequence of species labels.

    Ties in the descending sort are broken by first appearance.

    >>> from_raw_sample("aabbc").counts
    (2, 2, 1)
    """
    tally = Counter(tokens)
    if not tally:
        raise EmptySample("sample contains no observations")
    # Counter preserves first-insertion order; sorted() is stable
    items = sorted(tally.items(), key=lambda kv: -kv[1])
    return FrequencyData(
        counts=tuple(c for _, c in items), labels=tuple(k for k, _ in items)
    )


def from_counts(counts: Iterable) -> FrequencyData:
    """Build frequency data from per-species observation counts."""
    raw = counts.ravel().tolist() if isinstance(counts, np.ndarray) else list(counts)
    values = [_as_positive_int(c) for c in raw]
    if not values:
        raise EmptySample("sample contains no observations")
    return FrequencyData(counts=tuple(sorted(values, reverse=True)))


def from_prevalences(pairs: Mapping | Iterable[Sequence]) -> FrequencyData:
    """Build frequency data from ``j -> n_j`` pairs.

    Accepts a mapping or an iterable of ``(j, n_j)`` pairs; a repeated ``j``
    is rejected.
    """
    items = pairs.items() if isinstance(pairs, Mapping) else pairs
    prev = {}
    for pair in items:
        try:
            j, nj = pair
        except (TypeError, ValueError):
            raise InvalidPrevalence(f"malformed prevalence pair {pair!r}") from None
        j = _as_positive_int(j, InvalidPrevalence)
        nj = _as_positive_int(nj, InvalidPrevalence)
        if j in prev:
            raise InvalidPrevalence(f"duplicate frequency class j={j}")
        prev[j] = nj
    if not prev:
        raise EmptySample("sample contains no observations")
    counts = []
    for j in sorted(prev, reverse=True):
        counts.extend([j] * prev[j])
    return FrequencyData(counts=tuple(counts))


def from_count_vector(counts) -> FrequencyData:
    """Build frequency data from a per-species count vector that may hold zeros.

    This is the natural output of a multinomial draw over a known
    population; zero entries (unobserved species) are dropped.
    """
    arr = np.asarray(counts)
    arr = arr[arr > 0]
    if arr.size == 0:
        raise EmptySample("sample contains no observations")
    return FrequencyData(counts=tuple(np.sort(arr)[::-1].tolist()))


# -- file readers ---------------------------------------------------------

def read_tokens(path) -> FrequencyData:
    """One token per line (UTF-8); blank lines are ignored."""
    with open(path, encoding="utf-8") as fh:
        tokens = [line.rstrip("\r\n") for line in fh]
    return from_raw_sample(t for t in tokens if t.strip())


def read_counts(path) -> FrequencyData:
    """Whitespace separated integers."""
    with open(path, encoding="utf-8") as fh:
        fields = fh.read().split()
    try:
        values = [int(f) for f in fields]
    except ValueError as err:
        raise InvalidCount(str(err)) from None
    return from_counts(values)


def read_prevalences(path) -> FrequencyData:
    """Lines of ``j n_j``; ``#`` starts a comment."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise InvalidPrevalence(f"line {lineno}: expected 'j n_j', got {line!r}")
            try:
                pairs.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise InvalidPrevalence(f"line {lineno}: non-integer field in {line!r}") from None
    return from_prevalences(pairs)
