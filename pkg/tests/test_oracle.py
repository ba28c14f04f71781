import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcperturb import bounds, oracle
from mcperturb.chain_core import centered_norms, measure_l2, stationary_distribution, validate_kernel
from mcperturb.errors import CapExceeded, Reducible
from mcperturb.generators import general_perturbation, random_reversible
from mcperturb.spectral import spectral_gap

from conftest import seeds, sizes


def _chain(seed, n=6):
    rng = np.random.default_rng(seed)
    p = random_reversible(n, rng)
    return p, stationary_distribution(p).weights, rng


def test_pushforward_examples():
    p, pi, rng = _chain(0)
    mu = rng.dirichlet(np.ones(6))
    np.testing.assert_array_equal(oracle.exact_pushforward(mu, p, 0), mu)
    np.testing.assert_allclose(oracle.exact_pushforward(pi, p, 40), pi, atol=1e-14)
    step = mu.copy()
    for _ in range(5):
        step = step @ p.matrix
    np.testing.assert_allclose(oracle.exact_pushforward(mu, p, 5), step, atol=1e-15)


def test_dense_stationary_matches_power_iteration():
    p, pi, _ = _chain(4, n=9)
    np.testing.assert_allclose(oracle.dense_stationary(p), pi, atol=1e-12)
    with pytest.raises(Reducible):
        oracle.dense_stationary(np.eye(3))


def test_caps():
    with pytest.raises(CapExceeded):
        oracle.exact_pushforward([0.5, 0.5], np.full((2, 2), 0.5), oracle.MAX_HORIZON + 1)
    with pytest.raises(CapExceeded):
        big = np.full((oracle.MAX_STATES + 1,) * 2, 1.0 / (oracle.MAX_STATES + 1))
        oracle.dense_stationary(big)


def test_covariance_examples(sym2):
    f = np.array([1.0, 0.0])
    pi = np.array([0.5, 0.5])
    assert oracle.exact_covariance(f, f, pi, sym2, 0, 0) == pytest.approx(0.25)
    for s in range(6):
        truth = oracle.exact_covariance(f, f, pi, sym2, 3, s)
        assert truth == pytest.approx(0.25 * 0.8**s)
        assert truth == pytest.approx(bounds.covariance_bound_stationary(0.8, s, 0.5, 0.5))
    iid = validate_kernel(np.tile([0.2, 0.3, 0.5], (3, 1)))
    g = np.array([1.0, -2.0, 0.5])
    assert oracle.exact_covariance(g, g, [0.2, 0.3, 0.5], iid, 0, 2) == pytest.approx(0.0, abs=1e-15)


def test_mse_examples():
    p, pi, rng = _chain(2)
    mu = rng.dirichlet(np.ones(6))
    assert oracle.exact_mse(np.full(6, 3.0), mu, p, 9, 1.0) == pytest.approx(4.0)
    f = rng.normal(size=6)
    t = 12
    assert oracle.exact_mse(f, pi, p, t, float(pi @ f)) == pytest.approx(
        oracle.covariance_double_sum(f, pi, p, t))


def test_stationary_gap_examples(sym2, sym2_eps):
    zero = oracle.exact_stationary_gap(sym2, sym2)
    assert zero["l2"] == 0.0
    assert oracle.exact_stationary_gap(sym2, sym2_eps)["l2"] == pytest.approx(0.0, abs=1e-14)


def test_cesaro_examples():
    p, pi, rng = _chain(3)
    mu = rng.dirichlet(np.ones(6))
    assert oracle.exact_cesaro_error(pi, p, pi, 10) == pytest.approx(0.0, abs=1e-12)
    assert oracle.exact_cesaro_error(mu, p, pi, 1) == pytest.approx(measure_l2(pi - mu, pi))
    alpha = spectral_gap(p, pi).alpha
    for t in (1, 4, 16, 64):
        assert oracle.exact_cesaro_error(mu, p, pi, t) <= bounds.cesaro_bound(
            alpha, 0.0, t, measure_l2(mu - pi, pi)) + 1e-9


@given(seeds, sizes, st.integers(0, 8), st.integers(0, 8))
def test_covariance_symmetric_in_observables_at_stationarity(seed, n, t, s):
    p, pi, rng = _chain(seed, n)
    f, g = rng.normal(size=n), rng.normal(size=n)
    # reversibility makes the stationary lag-s covariance symmetric in (f, g)
    a = oracle.exact_covariance(f, g, pi, p, t, s)
    b = oracle.exact_covariance(g, f, pi, p, t, s)
    assert a == pytest.approx(b, abs=1e-12)


@given(seeds, sizes, st.integers(1, 16))
def test_double_sum_matches_matrix(seed, n, t):
    p, pi, rng = _chain(seed, n)
    mu = rng.dirichlet(np.ones(n))
    f = rng.normal(size=n)
    c = oracle.covariance_matrix(f, mu, p, t)
    np.testing.assert_allclose(c, c.T, atol=1e-12)
    assert c[1 % t, (t - 1)] == pytest.approx(oracle.exact_covariance(f, f, mu, p, 1 % t, t - 1 - 1 % t), abs=1e-12)
    assert oracle.covariance_double_sum(f, mu, p, t) == pytest.approx(c.sum() / t**2, abs=1e-12)
    # MSE decomposes into variance plus squared bias
    bias = np.mean([oracle.exact_pushforward(mu, p, k) @ f for k in range(t)]) - pi @ f
    assert oracle.exact_mse(f, mu, p, t, float(pi @ f)) == pytest.approx(c.sum() / t**2 + bias**2, abs=1e-12)


@given(seeds, sizes)
def test_gap_norm_ordering(seed, n):
    rng = np.random.default_rng(seed)
    p = random_reversible(n, rng)
    e = general_perturbation(p, rng, 0.2)
    gap = oracle.exact_stationary_gap(p, e)
    assert gap["l1"] <= gap["l2"] + 1e-12
    assert gap["tv"] == pytest.approx(gap["l1"])


@given(seeds, sizes, st.integers(0, 6), st.integers(0, 6))
def test_oracle_covariances_below_bounds(seed, n, t, s):
    p, pi, rng = _chain(seed, n)
    mu = rng.dirichlet(np.ones(n))
    f, g = rng.normal(size=n), rng.normal(size=n)
    rate = 1 - spectral_gap(p, pi).alpha
    sf, ssf = centered_norms(f, pi)
    sg, ssg = centered_norms(g, pi)
    bf = oracle.exact_pushforward(mu, p, t) @ f - pi @ f
    bg = oracle.exact_pushforward(mu, p, t + s) @ g - pi @ g
    b = bounds.covariance_bound_nonstationary(rate, t, s, sf, sg, ssf, ssg, measure_l2(mu - pi, pi), bf, bg)
    assert oracle.exact_covariance(f, g, mu, p, t, s) <= b + 1e-9
