"""Input checks shared by the estimator class and the CLI helpers."""
from __future__ import annotations

from collections.abc import Mapping

import numpy as np

from .exceptions import InvalidCount
from .freq import FrequencyData, from_count_vector, from_prevalences, from_raw_sample

INPUT_KINDS = ("auto", "labels", "counts", "prevalences")


def check_count_vector(X) -> np.ndarray:
    """One-dimensional array of non-negative integer counts.

    Accepts integer-valued floats; rejects negatives, non-integers, NaN and
    anything that is not one-dimensional after squeezing.
    """
    arr = np.asarray(X)
    if arr.ndim > 1:
        arr = np.squeeze(arr)
    if arr.ndim != 1:
        raise InvalidCount(f"counts must be one-dimensional, got shape {np.shape(X)}")
    if arr.dtype.kind not in "biuf":
        raise InvalidCount(f"counts must be numeric, got dtype {arr.dtype}")
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)):
            raise InvalidCount("counts contain NaN or infinity")
        if np.any(arr != np.round(arr)):
            raise InvalidCount("counts must be whole numbers")
    if np.any(arr < 0):
        raise InvalidCount("counts must be non-negative")
    return arr.astype(np.int64)


def _looks_like_counts(X) -> bool:
    arr = np.asarray(X)
    return arr.ndim >= 1 and arr.dtype.kind in "biuf"


def check_frequency_input(X, kind: str = "auto") -> FrequencyData:
    """Convert ``X`` into :class:`FrequencyData`.

    Parameters
    ----------
    X : FrequencyData, mapping, array-like or sequence of labels
    kind : {"auto", "labels", "counts", "prevalences"}
        ``auto`` treats a mapping as prevalences, a numeric array as a
        per-species count vector (zeros allowed) and anything else as a list
        of observed labels.
    """
    if kind not in INPUT_KINDS:
        raise ValueError(f"kind must be one of {INPUT_KINDS}, got {kind!r}")
    if isinstance(X, FrequencyData):
        return X
    if kind == "auto":
        if isinstance(X, Mapping):
            kind = "prevalences"
        elif _looks_like_counts(X):
            kind = "counts"
        else:
            kind = "labels"
    if kind == "prevalences":
        return from_prevalences(X)
    if kind == "counts":
        return from_count_vector(check_count_vector(X))
    if isinstance(X, (str, bytes)):
        raise ValueError("labels must be a sequence, not a single string")
    arr = np.asarray(X, dtype=object)
    return from_raw_sample(arr.ravel().tolist())
