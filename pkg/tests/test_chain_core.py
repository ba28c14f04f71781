import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcperturb.chain_core import (
    Distribution,
    Observable,
    StateSpace,
    TransitionKernel,
    centered_norms,
    check_reversibility,
    is_irreducible,
    measure_l2,
    norm_identity_check,
    period,
    radon_nikodym,
    stationary_distribution,
    validate_kernel,
    weighted_norms,
)
from mcperturb.errors import (
    NegativeEntry,
    NotConverged,
    Reducible,
    RowSumViolation,
    ZeroMassState,
)
from mcperturb.generators import random_reversible
from mcperturb.noisy_mh import ProposalSpec, TargetSpec, build_mh_kernel

from conftest import seeds, sizes, two_state


# -- validate_kernel --------------------------------------------------------

def test_valid_symmetric_kernel():
    k = validate_kernel([[0.9, 0.1], [0.1, 0.9]])
    assert isinstance(k, TransitionKernel)
    assert k.n == 2


def test_row_sum_violation_reports_worst_row():
    with pytest.raises(RowSumViolation) as exc:
        validate_kernel([[1.0, 0.1], [0.5, 0.5]])
    assert exc.value.row == 0
    assert exc.value.deviation == pytest.approx(0.1)


def test_identity_is_a_valid_kernel():
    k = validate_kernel(np.eye(2))
    np.testing.assert_array_equal(k.matrix, np.eye(2))


def test_negative_entry():
    with pytest.raises(NegativeEntry):
        validate_kernel([[1.2, -0.2], [0.5, 0.5]])


def test_tiny_row_deviation_is_renormalized():
    k = validate_kernel([[0.5, 0.5 + 5e-13], [0.3, 0.7]])
    assert abs(k.matrix[0].sum() - 1.0) < 1e-15


def test_kernel_is_read_only():
    k = validate_kernel([[0.5, 0.5], [0.5, 0.5]])
    with pytest.raises(ValueError):
        k.matrix[0, 0] = 1.0


def test_state_space_needs_two_states():
    with pytest.raises(Exception):
        StateSpace(1)


# -- stationary_distribution ------------------------------------------------

def test_two_state_stationary():
    pi = stationary_distribution(two_state(0.2, 0.3)).weights
    np.testing.assert_allclose(pi, [0.6, 0.4], atol=1e-12)


def test_doubly_stochastic_uniform():
    pi = stationary_distribution(validate_kernel(np.full((2, 2), 0.5))).weights
    np.testing.assert_allclose(pi, [0.5, 0.5], atol=1e-14)


def test_random_reversible_matches_dense_solve():
    p = random_reversible(8, np.random.default_rng(3))
    pi = stationary_distribution(p).weights
    w, v = np.linalg.eig(p.matrix.T)
    ref = np.real(v[:, np.argmin(np.abs(w - 1))])
    ref /= ref.sum()
    np.testing.assert_allclose(pi, ref, atol=1e-12)


def test_identity_is_reducible():
    with pytest.raises(Reducible):
        stationary_distribution(validate_kernel(np.eye(3)))


def test_periodic_chain_does_not_converge():
    cyc = validate_kernel([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    assert is_irreducible(cyc)
    assert period(cyc) == 3
    with pytest.raises(NotConverged):
        stationary_distribution(cyc)


@given(seeds, sizes)
def test_stationary_residual_property(seed, n):
    p = random_reversible(n, np.random.default_rng(seed), density=0.6)
    pi = stationary_distribution(p).weights
    assert np.abs(pi @ p.matrix - pi).sum() <= 1e-12
    assert np.all(pi > 0)


# -- reversibility ----------------------------------------------------------

def test_symmetric_kernel_is_reversible(sym2):
    ok, viol = check_reversibility(sym2, [0.5, 0.5])
    assert ok and viol == 0.0


def test_mh_kernel_is_reversible():
    t = TargetSpec(np.array([1.0, 3.0, 2.0]))
    k = build_mh_kernel(t, ProposalSpec(validate_kernel(np.full((3, 3), 1 / 3))))
    assert check_reversibility(k, t.pi.weights)[0]


def test_cyclic_violation_is_one_third():
    cyc = [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
    ok, viol = check_reversibility(cyc, np.full(3, 1 / 3))
    assert not ok
    assert viol == pytest.approx(1 / 3)


def test_reversibility_needs_positive_pi(sym2):
    with pytest.raises(ZeroMassState):
        check_reversibility(sym2, [1.0, 0.0])


# -- norms ------------------------------------------------------------------

def test_pi_has_unit_l2_norm():
    pi = np.array([0.2, 0.3, 0.5])
    assert measure_l2(pi, pi) == pytest.approx(1.0)


def test_distance_from_l2_norm():
    pi = np.array([0.25, 0.75])
    mu = np.array([0.9, 0.1])
    c = measure_l2(mu, pi)
    assert measure_l2(mu - pi, pi) == pytest.approx(np.sqrt(c**2 - 1))


def test_indicator_centered_norms():
    rep = weighted_norms(Observable(np.array([0.0, 1.0])), [0.5, 0.5], center=True)
    assert rep.star == pytest.approx(0.5)
    assert rep.l2 == pytest.approx(np.sqrt(0.5))
    assert rep.starstar == pytest.approx(0.5)


def test_measure_norm_report_tv_equals_l1():
    rep = weighted_norms(Distribution(np.array([0.7, 0.3])) - Distribution(np.array([0.5, 0.5])),
                         [0.5, 0.5])
    assert rep.l1 == rep.tv == pytest.approx(0.4)


def test_norm_identity_examples():
    assert norm_identity_check([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert norm_identity_check([1.0, 0.0], [0.5, 0.5]) == pytest.approx(0.0, abs=1e-15)
    assert measure_l2(np.array([0.5, -0.5]), [0.5, 0.5]) == pytest.approx(1.0)


def test_radon_nikodym():
    np.testing.assert_allclose(radon_nikodym([0.3, 0.7], [0.3, 0.7]).values, [1.0, 1.0])
    np.testing.assert_allclose(radon_nikodym([0.75, 0.25], [0.5, 0.5]).values, [1.5, 0.5])


@given(seeds, st.integers(2, 50))
def test_norm_identity_property(seed, n):
    rng = np.random.default_rng(seed)
    mu, pi = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n)) + 1e-3
    pi /= pi.sum()
    assert norm_identity_check(mu, pi) <= 1e-10


@given(seeds, sizes)
def test_radon_nikodym_round_trip(seed, n):
    rng = np.random.default_rng(seed)
    mu, pi = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n)) + 1e-3
    np.testing.assert_allclose(radon_nikodym(mu, pi).values * pi, mu, atol=1e-15, rtol=0)


@given(seeds, sizes)
def test_norm_inequalities(seed, n):
    rng = np.random.default_rng(seed)
    pi = rng.dirichlet(np.ones(n)) + 1e-3
    pi /= pi.sum()
    a, b = rng.normal(size=n), rng.normal(size=n)
    # triangle inequality and Cauchy-Schwarz (tv <= l2 since sum pi = 1)
    assert measure_l2(a + b, pi) <= measure_l2(a, pi) + measure_l2(b, pi) + 1e-12
    assert np.abs(a).sum() <= measure_l2(a, pi) + 1e-12
    # centering never increases the 2-norm; the 4-norm dominates the 2-norm
    rep = weighted_norms(Observable(a), pi, center=True)
    assert rep.star <= rep.l2 + 1e-12
    star, ss = centered_norms(a, pi)
    assert star <= ss + 1e-12
