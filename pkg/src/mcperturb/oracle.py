"""Brute-force ground truth by dense linear algebra.

Nothing here calls into :mod:`mcperturb.bounds`; the duplication of small
formulas (norms, stationary solves) is deliberate so that the domination
checks compare two independent code paths.
"""

from __future__ import annotations

import numpy as np

from .errors import CapExceeded, ChainError, Reducible

MAX_STATES = 200
MAX_HORIZON = 512


def _m(k):
    return np.asarray(getattr(k, "matrix", k), dtype=float)


def _v(x):
    for attr in ("weights", "values"):
        if hasattr(x, attr):
            return np.asarray(getattr(x, attr), dtype=float)
    return np.asarray(x, dtype=float)


def _caps(n=None, t=None):
    if n is not None and n > MAX_STATES:
        raise CapExceeded(f"{n} states exceeds the oracle cap of {MAX_STATES}")
    if t is not None and t > MAX_HORIZON:
        raise CapExceeded(f"horizon {t} exceeds the oracle cap of {MAX_HORIZON}")


def l2_distance(a, b, weight) -> float:
    """``||a - b||`` in L2(weight) for measures."""
    d = _v(a) - _v(b)
    return float(np.sqrt(np.sum(d * d / _v(weight))))


def dense_stationary(kernel) -> np.ndarray:
    """Stationary vector from the null space of ``P^T - I``; rejects non-unique or partial support."""
    m = _m(kernel)
    n = m.shape[0]
    _caps(n=n)
    u, sv, vt = np.linalg.svd(m.T - np.eye(n))
    if sv[-2] < 1e-12:
        raise Reducible("stationary distribution is not unique")
    v = vt[-1]
    v = v / v.sum()
    if np.any(v <= 0):
        raise Reducible("stationary distribution has zero-mass states")
    return v


def exact_pushforward(mu, kernel, t: int) -> np.ndarray:
    if t < 0:
        raise ChainError("t must be >= 0")
    m = _m(kernel)
    _caps(n=m.shape[0], t=t)
    out = _v(mu).copy()
    for _ in range(t):
        out = out @ m
    return out


def _laws(mu, m, count):
    rows = np.empty((count, m.shape[0]))
    cur = _v(mu).copy()
    for k in range(count):
        rows[k] = cur
        cur = cur @ m
    return rows


def _forward(g, m, count):
    cols = np.empty((count, m.shape[0]))
    cur = _v(g).copy()
    for k in range(count):
        cols[k] = cur
        cur = m @ cur
    return cols


def exact_covariance(f, g, mu, kernel, t: int, s: int) -> float:
    """``Cov(f(X_t), g(X_{t+s}))`` for the chain started at ``mu``."""
    if s < 0 or t < 0:
        raise ChainError("t and s must be >= 0")
    m = _m(kernel)
    _caps(n=m.shape[0], t=t + s)
    fv, gv = _v(f), _v(g)
    law_t = exact_pushforward(mu, m, t)
    g_forward = gv.copy()
    for _ in range(s):
        g_forward = m @ g_forward
    joint = float(np.sum(law_t * fv * g_forward))
    law_ts = exact_pushforward(law_t, m, s)
    return joint - float(law_t @ fv) * float(law_ts @ gv)


def covariance_matrix(f, mu, kernel, t: int) -> np.ndarray:
    """``C[j, k] = Cov(f(X_j), f(X_k))`` for ``j, k < t``."""
    m = _m(kernel)
    _caps(n=m.shape[0], t=t)
    fv = _v(f)
    laws = _laws(mu, m, t)               # mu P^j
    fwd = _forward(fv, m, t)             # P^s f
    means = laws @ fv                    # E f(X_j)
    # E[f(X_j) f(X_{j+s})] = sum_y (mu P^j)_y f_y (P^s f)_y
    joint = (laws * fv) @ fwd.T          # [j, s]
    c = np.empty((t, t))
    for j in range(t):
        for k in range(j, t):
            c[j, k] = c[k, j] = joint[j, k - j] - means[j] * means[k]
    return c


def covariance_double_sum(f, mu, kernel, t: int) -> float:
    """``(1/t^2) sum_{j,k<t} Cov(f(X_j), f(X_k))``."""
    if t < 1:
        raise ChainError("t must be >= 1")
    return float(covariance_matrix(f, mu, kernel, t).sum()) / t**2


def exact_mse(f, mu, kernel, t: int, reference_mean: float) -> float:
    """``E[(reference_mean - (1/t) sum_{k<t} f(X_k))^2]`` computed exactly."""
    if t < 1:
        raise ChainError("t must be >= 1")
    m = _m(kernel)
    laws = _laws(mu, m, t)
    bias = reference_mean - float(np.mean(laws @ _v(f)))
    return bias * bias + covariance_double_sum(f, mu, m, t)


def exact_stationary_gap(p, p_eps) -> dict:
    """Norms of ``pi - pi_eps``, weighted by ``pi``."""
    pi = dense_stationary(p)
    pi_eps = dense_stationary(p_eps)
    d = pi - pi_eps
    l1 = float(np.abs(d).sum())
    return {"l2": l2_distance(pi, pi_eps, pi), "l1": l1, "tv": l1}


def exact_cesaro_error(mu, kernel, reference, t: int, weight=None) -> float:
    """``||reference - (1/t) sum_{k<t} mu P^k||`` in L2(weight), weight defaulting to ``reference``."""
    if t < 1:
        raise ChainError("t must be >= 1")
    m = _m(kernel)
    _caps(n=m.shape[0], t=t)
    avg = _laws(mu, m, t).mean(axis=0)
    return l2_distance(reference, avg, reference if weight is None else weight)
