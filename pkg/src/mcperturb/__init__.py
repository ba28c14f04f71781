"""Perturbation bounds for geometrically ergodic Markov chains, with exact oracles."""

from .chain_core import (
    Distribution,
    NormReport,
    Observable,
    SignedMeasure,
    StateSpace,
    TransitionKernel,
    check_reversibility,
    norm_identity_check,
    radon_nikodym,
    stationary_distribution,
    validate_kernel,
    weighted_norms,
)
from .errors import (
    ChainError,
    GapClosed,
    NegativeEntry,
    NotApplicable,
    NotConverged,
    NotReversible,
    Reducible,
    RowSumViolation,
    ZeroMassState,
)
from .spectral import empirical_contraction, operator_norm, spectral_gap

__version__ = "0.1.0"
