"""Spectral gaps and L2(pi) operator norms.

Everything is reduced to a dense symmetric eigenproblem solved by cyclic
Jacobi rotations.  A measure ``nu`` is represented in symmetrized
coordinates by ``v = nu / sqrt(pi)`` so that ``||nu||_2 = |v|``; the map
``nu -> nu A`` then becomes ``v -> D^{-1/2} A^T D^{1/2} v`` and zero-sum
measures correspond to ``v`` orthogonal to ``sqrt(pi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chain_core import _mat, _positive_reference, _vec, check_reversibility
from .errors import ChainError, GapClosed, NotReversible

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
REVERSIBILITY_TOL = 1e-9
GAP_FLOOR = 1e-12


def jacobi_eigh(a, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi.

    Returns ``(eigenvalues, eigenvectors, sweeps)`` with eigenvectors in the
    columns.  Sweeps stop once every off-diagonal entry is below
    ``tol * ||A||_F``.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ChainError(f"expected a square matrix, got {a.shape}")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if n == 1 or scale == 0.0:
        return np.diag(a).copy(), v, 0
    threshold = tol * scale
    iu = np.triu_indices(n, 1)

    sweeps = 0
    while sweeps < max_sweeps:
        if np.abs(a[iu]).max() <= threshold:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= threshold * 1e-3:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c

                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :]
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0

                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v, sweeps


@dataclass(frozen=True)
class SpectralReport:
    alpha: float
    rho: float
    eigenvalues: np.ndarray = field(repr=False)
    method: str = "jacobi"
    sweeps: int = 0

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "rho": self.rho,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "method": self.method,
        }


@dataclass(frozen=True)
class OperatorNormReport:
    full_norm: float
    restricted_norm: float
    iterations: int
    restricted: bool = False

    @property
    def value(self) -> float:
        """The norm that was asked for."""
        return self.restricted_norm if self.restricted else self.full_norm


def symmetrize(kernel, pi) -> np.ndarray:
    """``D^{1/2} P D^{-1/2}``; symmetric exactly when ``P`` is pi-reversible."""
    s = np.sqrt(_positive_reference(pi))
    return s[:, None] * _mat(kernel) / s[None, :]


def spectral_gap(kernel, pi) -> SpectralReport:
    """Spectral gap ``alpha = 1 - max{|lambda| : lambda != top}`` of a reversible kernel.

    The top eigenvalue is identified by eigenvector alignment with
    ``sqrt(pi)`` rather than by value.
    """
    p = _positive_reference(pi)
    ok, violation = check_reversibility(kernel, p, REVERSIBILITY_TOL)
    if not ok:
        raise NotReversible(violation)
    w, vecs, sweeps = jacobi_eigh(symmetrize(kernel, p))
    root = np.sqrt(p)
    cosines = np.abs(root @ vecs) / np.linalg.norm(root)
    top = int(np.argmax(cosines))
    if cosines[top] <= 0.999:
        raise ChainError("no eigenvector aligned with sqrt(pi); is pi stationary?")
    rest = np.delete(w, top)
    alpha = 1.0 - float(np.abs(rest).max())
    if alpha <= GAP_FLOOR:
        raise GapClosed(alpha)
    return SpectralReport(
        alpha=alpha,
        rho=1.0 - alpha,
        eigenvalues=np.sort(w)[::-1],
        sweeps=sweeps,
    )


def operator_norm(a, pi, restrict_to_zero_sum: bool = False) -> OperatorNormReport:
    """L2(pi) operator norm of ``nu -> nu A``, on all measures and on zero-sum ones.

    Computed as the largest singular value of ``D^{-1/2} A^T D^{1/2}`` via
    Jacobi on its Gram matrix.  Both norms are always returned; the flag
    only selects :attr:`OperatorNormReport.value`.
    """
    p = _positive_reference(pi)
    s = np.sqrt(p)
    m = (_mat(a).T * s[None, :]) / s[:, None]
    u = s / np.linalg.norm(s)
    m0 = m - np.outer(m @ u, u)

    def largest_singular(x):
        w, _, sweeps = jacobi_eigh(x.T @ x)
        return math.sqrt(max(0.0, float(w.max()))), sweeps

    full, it1 = largest_singular(m)
    restricted, it2 = largest_singular(m0)
    return OperatorNormReport(
        full_norm=full,
        restricted_norm=restricted,
        iterations=it1 + it2,
        restricted=restrict_to_zero_sum,
    )


@dataclass(frozen=True)
class ContractionTrace:
    errors: np.ndarray = field(repr=False)  # trials x (horizon + 1), exact L2(pi) errors
    ratios: np.ndarray = field(repr=False)  # horizon, max over trials of one-step ratios
    max_ratio: float
    fitted_rate: float


def empirical_contraction(kernel, target, pi, horizon: int, trials: int, seed=0) -> ContractionTrace:
    """Exact distances ``||mu P^n - target||_2`` for random starting laws.

    When ``target`` is stationary for ``kernel`` the one-step ratios are
    computed by propagating the normalized difference ``mu P^n - target``
    directly, which keeps them accurate after the errors themselves have
    decayed to round-off.
    """
    if horizon < 2:
        raise ChainError("horizon must be at least 2")
    m = _mat(kernel)
    tgt = _vec(target)
    p = _positive_reference(pi)
    n = m.shape[0]
    rng = np.random.default_rng(seed)
    starts = rng.dirichlet(np.ones(n), size=trials)

    def l2(x):
        return np.sqrt(np.sum(x * x / p, axis=-1))

    errors = np.empty((trials, horizon + 1))
    mu = starts.copy()
    for k in range(horizon + 1):
        errors[:, k] = l2(mu - tgt)
        mu = mu @ m

    stationary = np.abs(tgt @ m - tgt).sum() <= 1e-12
    ratios = np.zeros(horizon)
    if stationary:
        log_growth = np.zeros((trials, horizon))
        d = starts - tgt
        for k in range(horizon):
            d -= np.outer(d.sum(axis=1), tgt)  # keep round-off out of the top eigendirection
            norms = l2(d)
            live = norms > 0
            if not live.any():
                break
            d[live] /= norms[live, None]
            nxt = d @ m
            r = l2(nxt)
            ratios[k] = r[live].max()
            with np.errstate(divide="ignore"):
                log_growth[:, k] = np.where(live, np.log(r), -np.inf)
            d = nxt
        steps = np.arange(1, horizon + 1)
        rates = np.exp(np.cumsum(log_growth, axis=1) / steps)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            r = errors[:, 1:] / errors[:, :-1]
            r[~np.isfinite(r)] = 0.0
            ratios = r.max(axis=0)
            steps = np.arange(1, horizon + 1)
            rates = (errors[:, 1:] / errors[:, :1]) ** (1.0 / steps)
    rates[~np.isfinite(rates)] = 0.0
    return ContractionTrace(
        errors=errors,
        ratios=ratios,
        max_ratio=float(ratios.max()),
        fitted_rate=float(rates.max()),
    )
