import contextlib
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from richness.freq import from_counts

settings.register_profile(
    "default", max_examples=200, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@st.composite
def count_lists(draw, max_species=50, max_count=40, nondegenerate=False):
    """Multisets of positive counts; with ``nondegenerate`` at least one count exceeds 1."""
    counts = draw(st.lists(st.integers(1, max_count), min_size=1, max_size=max_species))
    if nondegenerate and max(counts) == 1:
        counts[0] = draw(st.integers(2, max(max_count, 2)))
    return counts


def freqs(**kw):
    return count_lists(**kw).map(from_counts)


def random_freq(rng, max_species=50, max_n=500, nondegenerate=True):
    """A random sample summary built from a random prevalence map."""
    while True:
        N = int(rng.integers(1, max_species + 1))
        # mix flat and heavy-tailed count profiles
        if rng.random() < 0.5:
            counts = rng.integers(1, 12, size=N)
        else:
            counts = 1 + rng.geometric(rng.uniform(0.05, 0.9), size=N) - 1
        counts = np.maximum(counts, 1)
        if counts.sum() > max_n:
            continue
        if nondegenerate and counts.max() == 1:
            continue
        return from_counts(counts.tolist())


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


EXAMPLE_221 = (2, 2, 1)
EXAMPLE_3311 = (3, 3, 1, 1)
EXAMPLE_3111 = (3, 1, 1, 1)


# -- acceptance reporting --------------------------------------------------------

ACCEPTANCE_RESULTS = {}


@pytest.fixture
def criterion():
    """Context manager recording one acceptance criterion as PASS or FAIL."""

    @contextlib.contextmanager
    def _criterion(number, title):
        start = time.perf_counter()
        notes = []
        try:
            yield notes
        except BaseException as exc:
            detail = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
            ACCEPTANCE_RESULTS[number] = ("FAIL", title, time.perf_counter() - start,
                                          notes + [detail])
            raise
        ACCEPTANCE_RESULTS[number] = ("PASS", title, time.perf_counter() - start, notes)

    return _criterion


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        status, title, seconds, notes = ACCEPTANCE_RESULTS[number]
        extra = f" [{'; '.join(notes)}]" if notes else ""
        terminalreporter.write_line(f"criterion {number}: {status} {title} ({seconds:.1f} s){extra}")
