import numpy as np
import pytest

from mcperturb import oracle, sim
from mcperturb.chain_core import Distribution, validate_kernel
from mcperturb.errors import ChainError, InsufficientReplicates
from mcperturb.noisy_mh import NoiseModel, ProposalSpec, TargetSpec, build_mh_kernel, build_noisy_mh_kernel
from mcperturb.sim import SimConfig, empirical_mse, one_step_frequencies, run_mh, run_noisy_mh

UNIFORM2 = ProposalSpec(validate_kernel(np.full((2, 2), 0.5)))
TARGET = TargetSpec(np.array([2.0, 1.0]))
PM10 = NoiseModel.shared(2, [-0.1, 0.1], [0.5, 0.5])
F = np.array([1.0, 0.0])


def _cfg(steps, reps, seed=0, mu=(1.0, 0.0), **kw):
    return SimConfig(steps=steps, replicates=reps, seed=seed, initial=Distribution(np.array(mu)), **kw)


def test_config_validation():
    with pytest.raises(ChainError):
        _cfg(0, 1)
    with pytest.raises(ChainError):
        _cfg(1, 1, thinning=0)


def test_uniform_target_always_accepts():
    q = ProposalSpec(validate_kernel(np.array([[0.1, 0.6, 0.3], [0.6, 0.2, 0.2], [0.3, 0.2, 0.5]])))
    res = run_mh(TargetSpec(np.ones(3)), q, np.arange(3.0), _cfg(50, 20, mu=(1 / 3,) * 3))
    assert res.acceptance_rate == 1.0


def test_reproducible_and_schedule_independent(monkeypatch):
    a = run_noisy_mh(TARGET, UNIFORM2, PM10, F, _cfg(30, 50, seed=9))
    b = run_noisy_mh(TARGET, UNIFORM2, PM10, F, _cfg(30, 50, seed=9))
    np.testing.assert_array_equal(a.averages, b.averages)
    monkeypatch.setattr(sim, "BLOCK", 7)
    c = run_noisy_mh(TARGET, UNIFORM2, PM10, F, _cfg(30, 50, seed=9))
    np.testing.assert_array_equal(a.averages, c.averages)
    np.testing.assert_array_equal(a.transition_counts, c.transition_counts)
    # a replicate's path does not depend on how many others run
    d = run_noisy_mh(TARGET, UNIFORM2, PM10, F, _cfg(30, 5, seed=9))
    np.testing.assert_array_equal(a.averages[:5], d.averages)


def test_noiseless_model_matches_exact_run():
    a = run_mh(TARGET, UNIFORM2, F, _cfg(40, 30, seed=3))
    b = run_noisy_mh(TARGET, UNIFORM2, NoiseModel.noiseless(2), F, _cfg(40, 30, seed=3))
    np.testing.assert_array_equal(a.averages, b.averages)
    np.testing.assert_array_equal(a.transition_counts, b.transition_counts)


def test_occupancy_sums_to_one():
    res = run_mh(TARGET, UNIFORM2, F, _cfg(17, 40, thinning=3, burn_in=5))
    np.testing.assert_allclose(res.occupancy_per_replicate.sum(axis=1), 1.0)
    assert res.stream_label(4) == "0:4"


def _markov_sigma(p_matrix, pi0, steps):
    # asymptotic std. dev. of the occupancy of state 0 for a 2-state chain
    lam = 1.0 - p_matrix[0, 1] - p_matrix[1, 0]
    return np.sqrt(pi0 * (1 - pi0) * (1 + lam) / (1 - lam) / steps)


def test_long_run_occupancy_matches_pi():
    steps = 100_000
    res = run_mh(TARGET, UNIFORM2, F, _cfg(steps, 1, seed=1))
    p = build_mh_kernel(TARGET, UNIFORM2).matrix
    sigma = _markov_sigma(p, 2 / 3, steps)
    assert abs(res.occupancy[0] - 2 / 3) <= 3 * sigma


def test_long_noisy_run_occupancy_matches_p_hat():
    steps = 100_000
    noise = NoiseModel.shared(2, [-0.3, 0.4], [0.5, 0.5])
    res = run_noisy_mh(TARGET, UNIFORM2, noise, F, _cfg(steps, 1, seed=2))
    p_hat = build_noisy_mh_kernel(TARGET, UNIFORM2, noise).matrix
    pi_hat = oracle.dense_stationary(p_hat)
    assert abs(res.occupancy[0] - pi_hat[0]) <= 3 * _markov_sigma(p_hat, pi_hat[0], steps)


def test_one_step_average_after_one_transition():
    reps = 100_000
    mu = np.array([0.3, 0.7])
    res = run_mh(TARGET, UNIFORM2, F, _cfg(1, reps, seed=5, mu=mu, burn_in=1))
    p = build_mh_kernel(TARGET, UNIFORM2).matrix
    m = float(mu @ p @ F)
    assert abs(res.averages.mean() - m) <= 3 * np.sqrt(m * (1 - m) / reps)


def test_empirical_mse_edge_cases():
    res = run_mh(TARGET, UNIFORM2, np.full(2, 2.0), _cfg(8, 10))
    est, se = empirical_mse(res, 0.5)
    assert est == pytest.approx(2.25) and se == pytest.approx(0.0, abs=1e-15)
    res = run_mh(TARGET, UNIFORM2, F, _cfg(8, 200, seed=4))
    est, _ = empirical_mse(res, float(res.averages.mean()))
    assert est == pytest.approx(res.averages.var())
    with pytest.raises(InsufficientReplicates):
        empirical_mse(run_mh(TARGET, UNIFORM2, F, _cfg(8, 1)), 0.0)


def test_noisy_mse_matches_oracle_at_t16():
    res = run_noisy_mh(TARGET, UNIFORM2, PM10, F, _cfg(16, 100_000, seed=8))
    p_hat = build_noisy_mh_kernel(TARGET, UNIFORM2, PM10)
    ref = 2 / 3
    est, se = empirical_mse(res, ref)
    assert abs(est - oracle.exact_mse(F, [1.0, 0.0], p_hat, 16, ref)) <= 3 * se


def test_one_step_frequencies_match_p_hat_rows():
    noise = NoiseModel.shared(2, [-0.5, 0.2, 0.6], [0.3, 0.5, 0.2])
    res = run_noisy_mh(TARGET, UNIFORM2, noise, F, _cfg(50, 2000, seed=6, mu=(0.5, 0.5)))
    freq, visits = one_step_frequencies(res)
    p_hat = build_noisy_mh_kernel(TARGET, UNIFORM2, noise).matrix
    sigma = np.sqrt(p_hat * (1 - p_hat) / visits[:, None])
    assert np.all(np.abs(freq - p_hat) <= 3 * sigma + 1e-12)
