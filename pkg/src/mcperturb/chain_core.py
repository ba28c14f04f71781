"""Finite-state kernels, measures, observables and pi-weighted norms.

Measures are row vectors acting on the left of kernels (``nu @ P``);
observables are column vectors acted on from the right (``P @ f``).
For a signed measure ``nu`` and a strictly positive reference ``pi`` the
L2(pi) norm is ``sqrt(sum(nu**2 / pi))``, i.e. the L2(pi) norm of the
density ``dnu/dpi``.  Total variation follows the un-halved convention
``sum(|nu|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    ChainError,
    NegativeEntry,
    NotConverged,
    Reducible,
    RowSumViolation,
    ZeroMassState,
)

ROW_SUM_TOL = 1e-12
IDENTITY_TOL = 1e-10
STATIONARY_TOL = 1e-13
STATIONARY_MAX_ITER = 100_000


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateSpace:
    size: int
    labels: Optional[tuple] = None

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 2:
            raise ChainError(f"state space needs at least 2 states, got {self.size!r}")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
            if len(self.labels) != self.size:
                raise ChainError("label count does not match state count")


@dataclass(frozen=True)
class TransitionKernel:
    """Row-stochastic matrix; build through :func:`validate_kernel`."""

    matrix: np.ndarray
    space: StateSpace = field(repr=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))
        if self.space is None:
            object.__setattr__(self, "space", StateSpace(self.matrix.shape[0]))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other):
        # composition of kernels stays a kernel
        if isinstance(other, TransitionKernel):
            return validate_kernel(self.matrix @ other.matrix, self.space)
        return self.matrix @ np.asarray(other, dtype=float)

    def __rmatmul__(self, other):
        return np.asarray(other, dtype=float) @ self.matrix


@dataclass(frozen=True)
class Distribution:
    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 1 or not np.all(np.isfinite(w)):
            raise ChainError("distribution must be a finite vector")
        if np.any(w < 0):
            raise ChainError(f"distribution has negative weight {w.min()!r}")
        if abs(w.sum() - 1.0) > ROW_SUM_TOL:
            raise ChainError(f"distribution sums to {w.sum()!r}")
        object.__setattr__(self, "weights", w)

    @classmethod
    def normalized(cls, weights) -> "Distribution":
        w = np.asarray(weights, dtype=float)
        return cls(w / w.sum())

    @classmethod
    def uniform(cls, n: int) -> "Distribution":
        return cls(np.full(n, 1.0 / n))

    def __len__(self):
        return len(self.weights)

    def __sub__(self, other) -> "SignedMeasure":
        return SignedMeasure(self.weights - _vec(other))


@dataclass(frozen=True)
class SignedMeasure:
    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 1 or not np.all(np.isfinite(w)):
            raise ChainError("signed measure must be a finite vector")
        object.__setattr__(self, "weights", w)

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def is_zero_sum(self, tol: float = IDENTITY_TOL) -> bool:
        return abs(self.total) <= tol


@dataclass(frozen=True)
class Observable:
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise ChainError("observable must be a finite vector")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class NormReport:
    l1: float
    l2: float
    tv: float
    l4: Optional[float] = None
    star: Optional[float] = None
    starstar: Optional[float] = None

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


VectorLike = Union[Distribution, SignedMeasure, Observable, Sequence[float], np.ndarray]


def _vec(x) -> np.ndarray:
    for attr in ("weights", "values"):
        if hasattr(x, attr):
            return getattr(x, attr)
    return np.asarray(x, dtype=float)


def _mat(k) -> np.ndarray:
    return k.matrix if isinstance(k, TransitionKernel) else np.asarray(k, dtype=float)


def _positive_reference(pi) -> np.ndarray:
    p = _vec(pi)
    zero = np.flatnonzero(p <= 0)
    if zero.size:
        raise ZeroMassState(int(zero[0]))
    return p


def validate_kernel(matrix, space: Optional[StateSpace] = None) -> TransitionKernel:
    """Check row-stochasticity and return an immutable kernel.

    Rows whose sums are within ``1e-12`` of one are renormalized; anything
    further off raises :class:`RowSumViolation` naming the worst row.
    """
    m = np.array(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ChainError(f"kernel must be square, got shape {m.shape}")
    if space is None:
        space = StateSpace(m.shape[0])
    elif space.size != m.shape[0]:
        raise ChainError(f"kernel has {m.shape[0]} states, space has {space.size}")
    if not np.all(np.isfinite(m)):
        raise ChainError("kernel has non-finite entries")
    if np.any(m < 0):
        i, j = np.unravel_index(np.argmin(m), m.shape)
        raise NegativeEntry(int(i), int(j), float(m[i, j]))
    dev = m.sum(axis=1) - 1.0
    worst = int(np.argmax(np.abs(dev)))
    if abs(dev[worst]) > ROW_SUM_TOL:
        raise RowSumViolation(worst, float(dev[worst]))
    m /= m.sum(axis=1, keepdims=True)
    return TransitionKernel(m, space)


def _reachable(adj: np.ndarray, start: int) -> np.ndarray:
    seen = np.zeros(adj.shape[0], dtype=bool)
    seen[start] = True
    frontier = seen.copy()
    while frontier.any():
        nxt = adj[frontier].any(axis=0) & ~seen
        seen |= nxt
        frontier = nxt
    return seen


def is_irreducible(kernel) -> bool:
    adj = _mat(kernel) > 0
    return bool(_reachable(adj, 0).all() and _reachable(adj.T, 0).all())


def period(kernel) -> int:
    """Period of an irreducible kernel (1 means aperiodic)."""
    adj = _mat(kernel) > 0
    n = adj.shape[0]
    level = np.full(n, -1)
    level[0] = 0
    order = [0]
    for u in order:
        for v in np.flatnonzero(adj[u]):
            if level[v] < 0:
                level[v] = level[u] + 1
                order.append(int(v))
    rows, cols = np.nonzero(adj)
    diffs = np.abs(level[rows] + 1 - level[cols])
    return int(reduce(math.gcd, diffs.tolist(), 0))


def _dense_stationary(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    a = np.vstack([m.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    v, *_ = np.linalg.lstsq(a, b, rcond=None)
    return v


def stationary_distribution(
    kernel: TransitionKernel,
    tol: float = STATIONARY_TOL,
    max_iter: int = STATIONARY_MAX_ITER,
) -> Distribution:
    """Stationary law by power iteration from the uniform vector.

    Irreducibility and aperiodicity are checked on the transition graph
    first.  If power iteration has not reached ``||pi P - pi||_1 <= tol``
    after ``max_iter`` steps, a dense least-squares solve of
    ``pi (P - I) = 0, sum(pi) = 1`` is used instead.
    """
    m = _mat(kernel)
    if not is_irreducible(m):
        raise Reducible("transition graph is not strongly connected")
    d = period(m)
    if d != 1:
        raise NotConverged(max_iter, f"chain is periodic with period {d}")

    n = m.shape[0]
    pi = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = pi @ m
        nxt /= nxt.sum()
        if np.abs(nxt - pi).sum() <= tol:
            pi = nxt
            break
        pi = nxt
    else:
        pi = _dense_stationary(m)
        if np.any(pi <= 0) or np.abs(pi @ m - pi).sum() > max(tol, 1e-10):
            raise NotConverged(max_iter, "dense fallback failed")
        pi = pi / pi.sum()
    return Distribution(pi / pi.sum())


def check_reversibility(kernel, pi, tol: float = 1e-12) -> tuple[bool, float]:
    """Return ``(reversible, max_ij |pi_i P_ij - pi_j P_ji|)``."""
    p = _positive_reference(pi)
    flow = p[:, None] * _mat(kernel)
    violation = float(np.abs(flow - flow.T).max())
    return violation <= tol, violation


def measure_l2(nu, pi) -> float:
    p = _positive_reference(pi)
    w = _vec(nu)
    return float(math.sqrt(np.sum(w * w / p)))


def weighted_norms(obj, pi, center: bool = False) -> NormReport:
    """All pi-weighted norms of a measure or an observable.

    For a measure: ``l2 = sqrt(sum nu^2/pi)``, ``l1 = tv = sum |nu|``.
    For an observable ``h``: ``l2 = (sum h^2 pi)^(1/2)`` and
    ``l4 = (sum h^4 pi)^(1/4)``; with ``center`` the same two norms of
    ``h - pi(h)`` are reported as ``star`` and ``starstar``.
    """
    p = _positive_reference(pi)
    if isinstance(obj, (Distribution, SignedMeasure)):
        w = obj.weights
        l1 = float(np.abs(w).sum())
        return NormReport(l1=l1, l2=measure_l2(w, p), tv=l1)
    if not isinstance(obj, Observable):
        raise TypeError("weighted_norms needs a Distribution, SignedMeasure or Observable")
    h = obj.values
    l1 = float(np.sum(np.abs(h) * p))
    report = dict(
        l1=l1,
        l2=float(math.sqrt(np.sum(h * h * p))),
        tv=l1,
        l4=float(np.sum(h**4 * p) ** 0.25),
    )
    if center:
        c = h - float(h @ p)
        report["star"] = float(math.sqrt(np.sum(c * c * p)))
        report["starstar"] = float(np.sum(c**4 * p) ** 0.25)
    return NormReport(**report)


def centered_norms(f, pi) -> tuple[float, float]:
    """``(||f - pi f||_2, ||f - pi f||_4)`` in L2(pi)/L4(pi)."""
    r = weighted_norms(Observable(_vec(f)), pi, center=True)
    return r.star, r.starstar


def norm_identity_check(mu, pi) -> float:
    """Residual of ``||mu - pi||_2^2 = ||mu||_2^2 - 1``."""
    m, p = _vec(mu), _positive_reference(pi)
    lhs = measure_l2(m - p, p) ** 2
    rhs = measure_l2(m, p) ** 2 - 1.0
    return abs(lhs - rhs)


def radon_nikodym(mu, pi) -> Observable:
    p = _positive_reference(pi)
    return Observable(_vec(mu) / p)
