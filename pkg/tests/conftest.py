import json

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from mcperturb.chain_core import validate_kernel

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)
sizes = st.integers(min_value=2, max_value=10)


def two_state(p, q):
    return validate_kernel(np.array([[1 - p, p], [q, 1 - q]]))


@pytest.fixture
def sym2():
    return validate_kernel(np.array([[0.9, 0.1], [0.1, 0.9]]))


@pytest.fixture
def sym2_eps():
    return validate_kernel(np.array([[0.85, 0.15], [0.15, 0.85]]))


@pytest.fixture
def write_spec(tmp_path):
    def _write(doc, name="spec.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
        return str(path)

    return _write
