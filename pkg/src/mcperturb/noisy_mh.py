"""Exact kernel algebra for Metropolis-Hastings and its noisy variant.

The noise on the acceptance ratio has finite support per proposed state,
so the noisy kernel ``P_hat`` is an exact expectation and every operator
identity relating it to the exact kernel ``P`` can be checked to machine
precision.

Notation (``q`` the proposal, ``a`` the true ratio, ``a_hat`` the noisy one,
``E_z`` the expectation over the atoms attached to the proposed state):

* ``delta[x, y]   = E_z |a(y|x) - a_hat(y|x,z)|``
* ``delta_p[x, y] = E_z (min(1, a) - min(1, a_hat))``
* ``gamma[x]      = sum_y delta[x, y] q(y|x)`` and likewise ``gamma_p``
* ``Gamma' = diag(gamma_p)``, ``Z' = delta_p * q`` (entrywise)

so that ``P - P_hat = Z' - Gamma'`` as operators on measures.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import bounds
from .chain_core import (
    Distribution,
    TransitionKernel,
    check_reversibility,
    stationary_distribution,
    validate_kernel,
)
from .errors import ChainError, NegativeRatio, SupportMismatch
from .spectral import operator_norm

RULES = ("multiplicative", "additive", "lognormal")
DECOMPOSITION_TOL = 1e-12


@dataclass(frozen=True)
class TargetSpec:
    unnormalized_weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.unnormalized_weights, dtype=float)
        if w.ndim != 1 or not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ChainError("target weights must be finite and strictly positive")
        w.setflags(write=False)
        object.__setattr__(self, "unnormalized_weights", w)

    @property
    def pi(self) -> Distribution:
        return Distribution.normalized(self.unnormalized_weights)


@dataclass(frozen=True)
class ProposalSpec:
    kernel: TransitionKernel

    def __post_init__(self):
        k = self.kernel
        if not isinstance(k, TransitionKernel):
            k = validate_kernel(k)
            object.__setattr__(self, "kernel", k)
        pos = k.matrix > 0
        bad = np.argwhere(pos != pos.T)
        if bad.size:
            x, y = bad[0]
            raise SupportMismatch(int(x), int(y))


@dataclass(frozen=True)
class NoiseModel:
    """Finite noise on the acceptance ratio, one atom set per proposed state.

    ``atoms[y]`` and ``probs[y]`` are the support and weights of ``f_y``;
    ``rule`` maps the true ratio ``a`` and an atom ``z`` to ``a_hat``:
    multiplicative ``a (1 + z)``, additive ``max(0, a + z)``, lognormal
    ``a exp(z)``.
    """

    atoms: tuple
    probs: tuple
    rule: str = "multiplicative"

    def __post_init__(self):
        if self.rule not in RULES:
            raise ChainError(f"unknown distortion rule {self.rule!r}; expected one of {RULES}")
        atoms = tuple(np.array(a, dtype=float).ravel() for a in self.atoms)
        probs = tuple(np.array(p, dtype=float).ravel() for p in self.probs)
        if len(atoms) != len(probs):
            raise ChainError("atoms and probs must have one entry per state")
        for y, (z, p) in enumerate(zip(atoms, probs)):
            if z.shape != p.shape or z.size == 0:
                raise ChainError(f"state {y}: atoms and probabilities differ in length")
            if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
                raise ChainError(f"state {y}: noise probabilities must sum to 1")
            if not np.all(np.isfinite(z)):
                raise ChainError(f"state {y}: non-finite noise atom")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def shared(cls, n: int, atoms: Sequence[float], probs: Sequence[float], rule="multiplicative"):
        """Same noise law attached to every proposed state."""
        return cls(tuple([atoms] * n), tuple([probs] * n), rule)

    @classmethod
    def noiseless(cls, n: int) -> "NoiseModel":
        return cls.shared(n, [0.0], [1.0], "multiplicative")

    @property
    def n(self) -> int:
        return len(self.atoms)

    def scaled(self, c: float) -> "NoiseModel":
        return NoiseModel(tuple(c * z for z in self.atoms), self.probs, self.rule)

    def distort(self, ratio, z):
        if self.rule == "multiplicative":
            return ratio * (1.0 + z)
        if self.rule == "additive":
            return np.maximum(0.0, ratio + z)
        return ratio * np.exp(z)

    def padded(self):
        """Atoms and probabilities as ``(n, k)`` arrays, padding with zero-weight atoms."""
        k = max(z.size for z in self.atoms)
        z = np.zeros((self.n, k))
        p = np.zeros((self.n, k))
        for y, (zy, py) in enumerate(zip(self.atoms, self.probs)):
            z[y, : zy.size] = zy
            p[y, : py.size] = py
        return z, p


def lognormal_atoms(sigma: float, points: int = 7):
    """Gauss-Hermite discretization of ``z ~ N(-sigma^2/2, sigma^2)`` so that ``E exp(z) ~ 1``."""
    x, w = np.polynomial.hermite_e.hermegauss(points)
    return sigma * x - 0.5 * sigma**2, w / w.sum()


def acceptance_ratios(target: TargetSpec, proposal: ProposalSpec) -> np.ndarray:
    """``a[x, y] = pi(y) q(x|y) / (pi(x) q(y|x))``, and 0 where ``q(y|x) = 0``."""
    w = target.unnormalized_weights
    q = proposal.kernel.matrix
    if w.size != q.shape[0]:
        raise ChainError("target and proposal sizes differ")
    num = w[None, :] * q.T
    den = w[:, None] * q
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(q > 0, num / den, 0.0)
    return a


def _assemble(accept_prob: np.ndarray, q: np.ndarray) -> np.ndarray:
    m = accept_prob * q
    np.fill_diagonal(m, 0.0)
    np.fill_diagonal(m, 1.0 - m.sum(axis=1))
    return m


def build_mh_kernel(target: TargetSpec, proposal: ProposalSpec) -> TransitionKernel:
    """Metropolis-Hastings kernel; rejected mass stays on the diagonal."""
    q = proposal.kernel.matrix
    a = acceptance_ratios(target, proposal)
    kernel = validate_kernel(_assemble(np.minimum(1.0, a), q))
    ok, violation = check_reversibility(kernel, target.pi, 1e-12)
    if not ok:
        raise ChainError(f"MH kernel failed detailed balance ({violation:.3g})")
    return kernel


def _noisy_ratios(target, proposal, noise):
    a = acceptance_ratios(target, proposal)
    if noise.n != a.shape[0]:
        raise ChainError("noise model size does not match the state space")
    z, p = noise.padded()
    # a_hat[x, y, k]: atom k of f_y applied to the move x -> y
    a_hat = noise.distort(a[:, :, None], z[None, :, :])
    if np.any(a_hat < 0):
        raise NegativeRatio("noisy acceptance ratio is negative; atoms below -1 under the multiplicative rule?")
    return a, a_hat, p[None, :, :]


def build_noisy_mh_kernel(target, proposal, noise: NoiseModel) -> TransitionKernel:
    """Expected one-step kernel of noisy MH: ``P_hat(x, y) = q(y|x) E_z min(1, a_hat)``."""
    _, a_hat, p = _noisy_ratios(target, proposal, noise)
    accept = np.sum(p * np.minimum(1.0, a_hat), axis=2)
    return validate_kernel(_assemble(accept, proposal.kernel.matrix))


@dataclass(frozen=True)
class NoisyAnalysis:
    P: TransitionKernel
    P_hat: TransitionKernel
    delta: np.ndarray = field(repr=False)
    delta_prime: np.ndarray = field(repr=False)
    gamma: np.ndarray = field(repr=False)
    gamma_prime: np.ndarray = field(repr=False)
    Gamma_prime: np.ndarray = field(repr=False)
    Z_prime: np.ndarray = field(repr=False)
    delta_sup: float
    decomposition_residual: float
    pi: Distribution = field(repr=False)
    proposal: TransitionKernel = field(repr=False)
    p_hat_reversible: Optional[bool] = None


def analyze_noise(target: TargetSpec, proposal: ProposalSpec, noise: NoiseModel) -> NoisyAnalysis:
    """Build ``P``, ``P_hat`` and every error field, and check ``P - P_hat = Z' - Gamma'``."""
    q = proposal.kernel.matrix
    a, a_hat, p = _noisy_ratios(target, proposal, noise)
    P = build_mh_kernel(target, proposal)
    P_hat = build_noisy_mh_kernel(target, proposal, noise)

    delta = np.sum(p * np.abs(a[:, :, None] - a_hat), axis=2)
    delta_p = np.sum(p * (np.minimum(1.0, a)[:, :, None] - np.minimum(1.0, a_hat)), axis=2)
    delta = np.where(q > 0, delta, 0.0)
    delta_p = np.where(q > 0, delta_p, 0.0)
    gamma = np.sum(delta * q, axis=1)
    gamma_p = np.sum(delta_p * q, axis=1)
    Gamma_p = np.diag(gamma_p)
    Z_p = delta_p * q

    residual = float(np.abs((P.matrix - P_hat.matrix) - (Z_p - Gamma_p)).max())
    if residual > DECOMPOSITION_TOL:
        raise ChainError(f"operator decomposition residual {residual:.3g} exceeds {DECOMPOSITION_TOL}")

    reversible = None
    try:
        pi_hat = stationary_distribution(P_hat)
        reversible = check_reversibility(P_hat, pi_hat, 1e-10)[0]
    except ChainError:
        pass

    return NoisyAnalysis(
        P=P,
        P_hat=P_hat,
        delta=delta,
        delta_prime=delta_p,
        gamma=gamma,
        gamma_prime=gamma_p,
        Gamma_prime=Gamma_p,
        Z_prime=Z_p,
        delta_sup=float(delta[q > 0].max()),
        decomposition_residual=residual,
        pi=target.pi,
        proposal=proposal.kernel,
        p_hat_reversible=reversible,
    )


@dataclass(frozen=True)
class NoisyOperatorBound:
    epsilon_bound: float
    epsilon_actual: float
    q_norm: float
    delta_sup: float


def noisy_operator_bound(analysis: NoisyAnalysis, pi=None) -> NoisyOperatorBound:
    """``||P_hat - P||_2`` against its bound ``delta_sup (1 + ||Q||_2)``."""
    pi = analysis.pi if pi is None else pi
    q_norm = operator_norm(analysis.proposal, pi).full_norm
    actual = operator_norm(analysis.P.matrix - analysis.P_hat.matrix, pi).full_norm
    return NoisyOperatorBound(
        epsilon_bound=analysis.delta_sup * (1.0 + q_norm),
        epsilon_actual=actual,
        q_norm=q_norm,
        delta_sup=analysis.delta_sup,
    )


def noisy_error_bound(alpha: float, analysis: NoisyAnalysis, pi, t: int, dist_mu: float,
                      operator_bound: Optional[NoisyOperatorBound] = None) -> float:
    """Cesaro-average error bound for noisy MH with ``epsilon = delta_sup (1 + ||Q||_2)``.

    ``dist_mu`` is ``||pi_hat - mu||_2``.  Raises :class:`NotApplicable`
    (carrying both ``alpha`` and ``epsilon``) when the noise is too large.
    """
    ob = operator_bound or noisy_operator_bound(analysis, pi)
    return bounds.cesaro_bound(alpha, ob.epsilon_bound, t, dist_mu)
