import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from richness.estimators import (
    ESTIMATOR_NAMES, estimate_all, gamma2_chao_lee, jackknife, jackknife_estimates,
    round_half_away, t_chao_lee, t_esty, t_gamma, t_httg, t_jackknife, t_lambda,
    t_lambda_hat, t_lambda_hat_alternate, t_lambda_hat_from_stats, t_one, t_plus_one, t_two,
)
from richness.exceptions import DegenerateAllSingletons
from richness.freq import from_counts

from conftest import EXAMPLE_221, EXAMPLE_3111, EXAMPLE_3311, freqs, random_freq

F221, F3311, F3111 = (from_counts(c) for c in (EXAMPLE_221, EXAMPLE_3311, EXAMPLE_3111))


# -- closed forms -------------------------------------------------------------

def test_httg():
    assert t_httg(F221) == 3.75
    assert t_httg(F3111) == 8
    assert t_httg(from_counts([4, 2, 2])) == 3


def test_esty():
    assert t_esty(F221) == pytest.approx(4.375)
    assert t_esty(F221, 1) == pytest.approx(5.0)
    assert t_esty(F221, 1e12) == pytest.approx(t_httg(F221))
    with pytest.raises(ValueError):
        t_esty(F221, 0)


def test_chao_lee():
    assert gamma2_chao_lee(F221) == 0
    assert t_chao_lee(F221) == 3.75
    assert gamma2_chao_lee(F3311) == pytest.approx(1 / 7)
    assert t_chao_lee(F3311) == pytest.approx(16 / 3 + 8 / 3 / 7)
    assert t_gamma(F3111, 1) == 14


def test_chao_lee_gamma2_clamped():
    # t_httg * v = 15 * (1/15) exactly: boundary of the clamp
    f = from_counts([2, 1, 1, 1, 1])
    assert (t_httg(f), f.v) == (15, Fraction(1, 15))
    assert gamma2_chao_lee(f) == 0
    assert gamma2_chao_lee(from_counts([2, 1, 1, 1, 1, 1])) == 0


def test_t_one_branches():
    assert t_one(F221) == (3.75, 0.0)
    t1, g1 = t_one(F3311)
    # (N v - 1 + u)/(1 - u + n u v) = (3/28)/(33/28)
    assert g1 == pytest.approx(1 / 11)
    assert t1 == pytest.approx(184 / 33)


@given(freqs(nondegenerate=True))
def test_t_one_minimises_displayed_objective(freq):
    # the function (1 - u + n u v) g + 1 - u - N v is minimised in |.| over g >= 0
    u, v, n, N = (float(x) for x in (freq.u, freq.v, freq.n, freq.N))
    t1, g1 = t_one(freq)
    assert g1 >= 0
    obj = lambda g: abs((1 - u + n * u * v) * g + 1 - u - N * v)
    grid = np.linspace(0, max(4 * g1, 1.0), 2001)
    assert obj(g1) <= obj(grid).min() + 1e-12
    assert t1 == pytest.approx(t_gamma(freq, g1))


def test_plus_one():
    assert t_plus_one(F221) == 5
    assert t_plus_one(F3111) == 14


def test_degenerate_everywhere():
    f = from_counts([1, 1, 1])
    for fn in (t_httg, t_esty, gamma2_chao_lee, t_chao_lee, t_one, t_plus_one, t_two,
               t_lambda_hat, t_jackknife, estimate_all):
        with pytest.raises(DegenerateAllSingletons):
            fn(f)


def test_round_half_away():
    assert [round_half_away(x) for x in (2.5, 3.5, -2.5, 2.4999, Fraction(7, 2))] == [3, 4, -3, 2, 4]


# -- the Bayesian estimator ----------------------------------------------------

def test_t_lambda_hat_examples():
    t, r, s = t_lambda_hat(F221)
    assert (t, r) == (3.75, 4) and s.is_infinite
    t, r, s = t_lambda_hat(F3311)
    assert t == pytest.approx(64 / 9, abs=1e-12) and r == 7 and s.lambda_hat == 1.5
    assert t_lambda_hat_alternate(F3311) == pytest.approx(64 / 9, abs=1e-12)
    t, r, s = t_lambda_hat(F3111)
    assert (t, r, s.lambda_hat) == (14, 14, 1)


def test_fast_path_examples():
    assert t_lambda_hat_from_stats(5, 3, 1, 9) == Fraction(15, 4)
    assert t_lambda_hat_from_stats(8, 4, 2, 20) == Fraction(64, 9)
    assert t_lambda_hat_from_stats(6, 4, 3, 12) == 14
    with pytest.raises(DegenerateAllSingletons):
        t_lambda_hat_from_stats(3, 3, 3, 3)


@given(freqs(nondegenerate=True))
def test_three_routes_agree(freq):
    t = t_lambda_hat(freq).t
    assert t_lambda_hat_alternate(freq) == pytest.approx(t, rel=1e-12)
    assert float(t_lambda_hat_from_stats(freq.n, freq.N, freq.n1, freq.q)) == pytest.approx(t, rel=1e-12)


@given(freqs(nondegenerate=True))
def test_ordering(freq):
    t = t_lambda_hat(freq).t
    assert freq.N <= t_httg(freq) <= t + 1e-9
    assert t <= t_plus_one(freq) + 1e-9


@given(freqs(nondegenerate=True), st.floats(1e-3, 1e6))
def test_reconciliation_fixed_point(freq, lam):
    T = t_lambda(freq, lam)
    assert (T - freq.N) * lam / (T * lam + freq.n) == pytest.approx(float(freq.u), abs=1e-12)


@given(freqs(nondegenerate=True), st.floats(1e-3, 1e6))
def test_chao_lee_form_equivalence(freq, lam):
    assert t_gamma(freq, 1 / lam) == pytest.approx(t_lambda(freq, lam), rel=1e-12)


@given(freqs(nondegenerate=True))
def test_infinite_branch_equals_httg(freq):
    est = t_lambda_hat(freq)
    if est.solution.is_infinite:
        assert est.t == t_httg(freq)


@given(freqs(nondegenerate=True))
def test_all_estimates_at_least_n(freq):
    rep = estimate_all(freq)
    for name, value in rep.estimates().items():
        if value is not None:
            assert value >= freq.N - 1e-9, name
    assert rep.t_lambda_hat_rounded >= freq.N


# -- second-moment estimator -----------------------------------------------------

def t2_objective_oracle(freq, lam, T):
    """|sum of squared extended add-lambda probabilities - v| from explicit vectors."""
    m = np.array(freq.counts, dtype=float)
    denom = T * lam + freq.n
    obs = (m + lam) / denom
    unseen = (T - freq.N) * (lam / denom) ** 2
    return abs(np.sum(obs**2) + unseen - float(freq.v))


def test_t_two_221_infinite():
    t2, lam2 = t_two(F221)
    assert math.isinf(lam2) and t2 == 3.75


def test_t_two_3311_matches_grid():
    grid = np.logspace(-3, 6, 20001)
    T = t_httg(F3311)
    vals = np.array([t2_objective_oracle(F3311, x, T) for x in grid])
    k = int(np.argmin(vals))
    t2, lam2 = t_two(F3311)
    assert grid[k - 1] <= lam2 <= grid[k + 1]
    assert t2 == pytest.approx(t_lambda(F3311, lam2))


@pytest.mark.parametrize("coupled", [False, True])
def test_t_two_local_minimum_certificate(rng, coupled):
    for _ in range(40):
        f = random_freq(rng)
        t2, lam2 = t_two(f, coupled=coupled)
        if math.isinf(lam2):
            assert t2 == t_httg(f)
            continue
        T = (lambda x: t_lambda(f, x)) if coupled else (lambda x: t_httg(f))
        here = t2_objective_oracle(f, lam2, T(lam2))
        for factor in (0.5, 2.0):
            if lam2 * factor < 1e-3:
                continue  # outside the search domain
            assert here <= t2_objective_oracle(f, lam2 * factor, T(lam2 * factor)) + 1e-12


def test_t_two_single_species():
    f = from_counts([5])
    assert t_two(f)[0] == 1


# -- jackknife -------------------------------------------------------------------

def closed_form_jackknives(freq):
    """Published first- to fourth-order jackknife formulas (k = n occasions)."""
    k, N = freq.n, freq.N
    f = [freq.prevalences.get(j, 0) for j in range(5)]
    j1 = N + f[1] * (k - 1) / k
    j2 = N + f[1] * (2 * k - 3) / k - f[2] * (k - 2) ** 2 / (k * (k - 1))
    j3 = (N + f[1] * (3 * k - 6) / k - f[2] * (3 * k**2 - 15 * k + 19) / (k * (k - 1))
          + f[3] * (k - 3) ** 3 / (k * (k - 1) * (k - 2)))
    j4 = (N + f[1] * (4 * k - 10) / k - f[2] * (6 * k**2 - 36 * k + 55) / (k * (k - 1))
          + f[3] * (4 * k**3 - 42 * k**2 + 148 * k - 175) / (k * (k - 1) * (k - 2))
          - f[4] * (k - 4) ** 4 / (k * (k - 1) * (k - 2) * (k - 3)))
    return j1, j2, j3, j4


def test_first_order_jackknife():
    assert jackknife_estimates(F221)[0] == pytest.approx(3.8)
    assert t_jackknife(F221) == pytest.approx(3.8)
    assert jackknife_estimates(from_counts([3, 2, 2]))[0] == 3


def test_jackknife_against_closed_forms(rng):
    for _ in range(100):
        f = random_freq(rng)
        if f.n < 5:
            continue
        ours = jackknife_estimates(f, 4)
        assert ours == pytest.approx(closed_form_jackknives(f), rel=1e-10, abs=1e-9)


def test_jackknife_never_below_n():
    res = jackknife(from_counts([2, 2]))
    assert res.estimate == 2 and res.order == 1 and "below N" in res.diagnostic


def test_jackknife_too_small():
    res = jackknife(from_counts([2]))
    assert res.order == 1
    res = jackknife(from_counts([1, 1, 2]), max_order=0)
    assert res.estimate is None and res.diagnostic


# -- report ------------------------------------------------------------------------

def test_report_fields():
    rep = estimate_all(F3311, esty_k=3)
    assert set(rep.estimates()) == set(ESTIMATOR_NAMES)
    d = rep.to_dict()
    assert d["lambda_hat"] == 1.5 and d["lambda_branch"] == "interior_root"
    assert d["t_lambda_hat_rounded"] == 7 and d["esty_k"] == 3
    assert rep.gamma2_hat == pytest.approx(2 / 3)
    assert estimate_all(F221).to_dict()["lambda_hat"] is None
