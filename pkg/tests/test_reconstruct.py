import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from richness.estimators import t_lambda_hat
from richness.exceptions import InfeasibleTail, InvalidT, NoUnobservedSpecies
from richness.freq import from_counts
from richness.lambda_solver import f_of_lambda, solve_lambda
from richness.posterior import PosteriorParams, mean_p, second_moment_p
from richness.reconstruct import (
    TailMode, observed_probs, reconstruct_population, solve_tail, tail_ratio, v_tilde,
    v_tilde_raw,
)

from conftest import EXAMPLE_221, EXAMPLE_3311, freqs, random_freq

F221, F3311 = from_counts(EXAMPLE_221), from_counts(EXAMPLE_3311)


def geometric_sums(c, alpha, M):
    terms = [c * alpha**j for j in range(1, M + 1)]
    return math.fsum(terms), math.fsum(t * t for t in terms)


# -- observed block -----------------------------------------------------------

def test_observed_probs_3311():
    sol = solve_lambda(F3311)
    p = observed_probs(F3311, sol, 64 / 9)
    assert p[0] == pytest.approx(27 / 112, abs=1e-15)
    assert p.sum() + 0.25 == pytest.approx(1.0, abs=1e-10)


def test_observed_probs_uniform_branch():
    p = observed_probs(F221, solve_lambda(F221), 4)
    assert np.allclose(p, 0.25)


def test_observed_probs_rejects_bad_t():
    sol = solve_lambda(F3311)
    for bad in (3, math.inf, math.nan):
        with pytest.raises(InvalidT):
            observed_probs(F3311, sol, bad)


@given(freqs(nondegenerate=True))
def test_observed_mass_is_coverage(freq):
    t, _, sol = t_lambda_hat(freq)
    if not sol.is_infinite:
        p = observed_probs(freq, sol, t)
        assert p.sum() + float(freq.u) == pytest.approx(1.0, abs=1e-10)


# -- V tilde ------------------------------------------------------------------

def test_v_tilde_two_ways_3311():
    t, _, sol = t_lambda_hat(F3311)
    params = PosteriorParams.from_freq(F3311, t, sol.lambda_hat)
    T_floor = int(math.floor(t))
    per_index = math.fsum(second_moment_p(params, i) for i in range(1, T_floor + 1))
    # the fractional remainder of T contributes like one more unobserved species
    per_index += (t - T_floor) * second_moment_p(params, F3311.N + 1)
    obs = math.fsum(mean_p(params, i) ** 2 for i in range(1, F3311.N + 1))
    expected = max(float(F3311.v), per_index) - obs
    raw, _ = v_tilde_raw(F3311, sol, t)
    assert raw == pytest.approx(expected, abs=1e-12)


def test_v_tilde_floor_and_errors():
    sol = solve_lambda(F221)
    assert v_tilde(F221, sol, 4) >= 0.2**2 / 1
    with pytest.raises(NoUnobservedSpecies):
        v_tilde(F221, sol, 3)


def test_v_tilde_switch_follows_sign_of_f(rng):
    seen = set()
    for _ in range(400):
        f = random_freq(rng)
        t, _, sol = t_lambda_hat(f)
        if t - f.N < 1e-9:
            continue
        _, used_posterior = v_tilde_raw(f, sol, t)
        if sol.is_infinite:
            if f.u < 1 - f.N * f.v:  # f < 0 throughout: the sample V is too small
                assert used_posterior
                seen.add("posterior")
        elif f_of_lambda(f, sol.lambda_hat) > 1e-12:
            assert not used_posterior
            seen.add("sample")
    assert seen == {"posterior", "sample"}


@given(freqs(nondegenerate=True))
def test_v_tilde_respects_floor(freq):
    t, r, sol = t_lambda_hat(freq)
    if r > freq.N:
        assert v_tilde(freq, sol, r) >= float(freq.u) ** 2 / (r - freq.N) * (1 - 1e-12)


# -- tail solver ------------------------------------------------------------

def test_tail_on_floor_is_uniform():
    fit = solve_tail(0.3, 0.3**2 / 6, 6)
    assert fit.alpha == 1 and fit.c == pytest.approx(0.05)
    assert np.allclose(fit.probs(), 0.05)


def test_tail_single_species():
    fit = solve_tail(0.2, 0.5, 1)
    assert fit.mode is TailMode.UNIFORM
    assert fit.probs().tolist() == [0.2]


def test_tail_forward_oracle():
    fit = solve_tail(0.2, 0.02, 3)
    s1, s2 = geometric_sums(fit.c, fit.alpha, 3)
    assert s1 == pytest.approx(0.2, abs=1e-10)
    assert s2 == pytest.approx(0.02, abs=1e-10)
    assert 0 < fit.alpha < 1


@pytest.mark.parametrize("u, v, M", [(0.2, 0.001, 5), (0.2, 0.04, 5), (0.2, 0.05, 5), (0.0, 0.1, 2),
                                     (0.2, 0.01, 0)])
def test_tail_infeasible(u, v, M):
    with pytest.raises(InfeasibleTail):
        solve_tail(u, v, M)


@given(st.floats(1e-4, 0.99), st.integers(2, 5000), st.floats(0.0, 1.0))
def test_tail_round_trip(u, M, s):
    floor = u * u / M
    top = u * u * float(tail_ratio(1e-6, M))
    v = floor + s * (top - floor) * 0.999
    fit = solve_tail(u, v, M)
    s1, s2 = geometric_sums(fit.c, fit.alpha, M)
    assert s1 == pytest.approx(u, abs=1e-10)
    assert s2 == pytest.approx(v, abs=1e-10)


def test_tail_ratio_limits():
    assert float(tail_ratio(1e-12, 10)) == pytest.approx(1.0)
    assert float(tail_ratio(1 - 1e-9, 10)) == pytest.approx(0.1, rel=1e-6)
    r = tail_ratio(np.linspace(0.01, 0.99, 50), 20)
    assert np.all(np.diff(r) < 0)


# -- full reconstruction ----------------------------------------------------

def test_reconstruct_3311():
    pop = reconstruct_population(F3311)
    assert pop.t_hat == 7 and pop.probs.size == 7
    assert pop.probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert pop.tail.sum() == pytest.approx(0.25, abs=1e-8)
    assert np.all(np.diff(pop.tail) <= 0)


def test_reconstruct_no_unobserved():
    f = from_counts([3, 2, 2])
    pop = reconstruct_population(f)
    assert pop.mode is TailMode.NO_UNOBSERVED and pop.probs.size == 3
    assert pop.probs.sum() == pytest.approx(1.0)


def test_uniform_tail_option():
    f = from_counts([5, 3, 2, 1, 1, 1])
    uni = reconstruct_population(f, tail="uniform")
    assert uni.mode is TailMode.UNIFORM
    assert np.allclose(uni.tail, uni.tail[0])
    sol = solve_lambda(f)
    M = uni.t_hat - f.N
    # the geometric family at alpha = 1 is the same split
    assert np.allclose(solve_tail(float(f.u), float(f.u) ** 2 / M, M).probs(), uni.tail)
    if not sol.is_infinite:
        # with the real-valued estimate each tail entry is lambda (1-u)/(n + N lambda)
        lam = sol.lambda_hat
        expected = lam * (1 - float(f.u)) / (f.n + f.N * lam)
        t = t_lambda_hat(f).t
        assert float(f.u) / (t - f.N) == pytest.approx(expected)
    with pytest.raises(ValueError):
        reconstruct_population(f, tail="power")


def test_population_csv():
    buf = io.StringIO()
    pop = reconstruct_population(F3311)
    pop.to_csv(buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == ["index", "probability"]
    assert len(rows) == 8 and rows[1][0] == "1"
    assert math.fsum(float(r[1]) for r in rows[1:]) == pytest.approx(1.0)


@given(freqs(nondegenerate=True, max_count=60))
def test_reconstruction_invariants(freq):
    pop = reconstruct_population(freq)
    assert pop.probs.size == pop.t_hat
    assert np.all(pop.probs > 0)
    assert math.fsum(pop.probs) == pytest.approx(1.0, abs=1e-10)
    if pop.mode is not TailMode.NO_UNOBSERVED:
        assert math.fsum(pop.tail) == pytest.approx(float(freq.u), abs=1e-8)
    if pop.mode is TailMode.GEOMETRIC:
        assert pop.tail_second_moment == pytest.approx(pop.v_tilde, abs=1e-8)
