import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcperturb.chain_core import validate_kernel
from mcperturb.errors import ChainError
from mcperturb.generators import general_perturbation, random_reversible, reversible_perturbation
from mcperturb.verification import HEADER, analyze_pair, domination_rows

from conftest import seeds


def test_pair_analysis_example(sym2, sym2_eps):
    pa = analyze_pair(sym2, sym2_eps)
    assert pa.alpha == pytest.approx(0.2) and pa.epsilon == pytest.approx(0.1)
    assert pa.applicable and pa.sym_applicable
    assert pa.epsilon_source == "computed"


def test_manual_epsilon_must_bound_the_norm(sym2, sym2_eps):
    assert analyze_pair(sym2, sym2_eps, epsilon=0.15).epsilon == 0.15
    with pytest.raises(ChainError):
        analyze_pair(sym2, sym2_eps, epsilon=0.05)


def test_not_applicable_rows():
    p = validate_kernel([[0.9, 0.1], [0.1, 0.9]])
    e = validate_kernel([[0.5, 0.5], [0.5, 0.5]])
    pa = analyze_pair(p, e)
    assert not pa.applicable
    rows = domination_rows(pa, [1.0, 0.0], [1.0, 0.0], horizons=[1, 4])
    gated = [r for r in rows if r["quantity"] in ("stationary_gap", "finite_time_l2", "mse_perturbed")]
    assert gated and all(r["pass"] == "n/a" for r in gated)
    assert all(r["pass"] in (True, "n/a") for r in rows)


def test_rows_have_header_columns(sym2, sym2_eps):
    rows = domination_rows(analyze_pair(sym2, sym2_eps), [1.0, 0.0], [1.0, 0.0], horizons=[0, 3])
    assert all(set(r) == set(HEADER) for r in rows)


@given(seeds, st.integers(2, 8), st.floats(0.01, 0.4), st.booleans())
def test_every_bound_dominates(seed, n, size, reversible):
    rng = np.random.default_rng(seed)
    p = random_reversible(n, rng, density=0.7)
    e = reversible_perturbation(p, rng, size) if reversible else general_perturbation(p, rng, size)
    pa = analyze_pair(p, e)
    mu = rng.dirichlet(np.ones(n))
    f, g = rng.normal(size=n), rng.normal(size=n)
    rows = domination_rows(pa, mu, f, g, horizons=[0, 1, 3, 8])
    failures = [r for r in rows if r["pass"] is False]
    assert not failures
