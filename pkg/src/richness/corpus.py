"""Letter-sampling experiments on text corpora.

A text is reduced to its letters, the empirical letter distribution is
treated as the population, and samples of ``n`` letters are drawn from it
with replacement.
"""
from __future__ import annotations

import unicodedata
from collections import Counter
from typing import Optional

import numpy as np

from .exceptions import EmptySample
from .montecarlo import ReplicateSummary, run_replicates


def normalize_text(text: str, charset: Optional[str] = None) -> str:
    """Case-fold ``text`` and keep only alphabetic code points.

    Text is NFC-normalised first so that a letter and its combining accent
    count as one character.  With ``charset`` only characters of that
    (case-folded) alphabet are kept.

    Examples
    --------
    >>> normalize_text("Hello, World! 42")
    'helloworld'
    >>> normalize_text("Città è bella", charset="abcdefghilmnopqrstuvz")
    'cittbella'
    """
    folded = unicodedata.normalize("NFC", text).casefold()
    letters = (ch for ch in folded if ch.isalpha())
    if charset is None:
        return "".join(letters)
    keep = set(unicodedata.normalize("NFC", charset).casefold())
    return "".join(ch for ch in letters if ch in keep)


def letter_distribution(text: str, charset: Optional[str] = None) -> tuple:
    """``(letters, probs)`` of the normalised text, most frequent first.

    Raises
    ------
    EmptySample
        If no letter survives normalisation.
    """
    letters = normalize_text(text, charset)
    if not letters:
        raise EmptySample("text contains no letters after normalisation")
    counts = Counter(letters).most_common()
    chars = tuple(c for c, _ in counts)
    freq = np.array([k for _, k in counts], dtype=float)
    return chars, freq / freq.sum()


def run_corpus(
    text: str,
    n: int,
    R: int,
    seed: int = 0,
    true_t: Optional[float] = None,
    charset: Optional[str] = None,
    esty_k: float = 2.0,
    workers: int = 1,
) -> ReplicateSummary:
    """Sample ``R`` strings of ``n`` letters and summarise every estimator.

    ``true_t`` defaults to the number of distinct letters in the text, which
    is the size of the population actually sampled.
    """
    chars, probs = letter_distribution(text, charset)
    if true_t is None:
        true_t = len(chars)
    return run_replicates(probs, n, R, seed=seed, true_t=true_t, esty_k=esty_k, workers=workers)
