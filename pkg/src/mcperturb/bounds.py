"""Closed-form perturbation bounds for geometrically ergodic reversible chains.

Every function takes plain numbers (spectral gap ``alpha``, perturbation
size ``epsilon``, horizons and pre-computed norms) so that bounds can be
evaluated for chains too large to analyse directly.  Formulas for the
perturbed chain raise :class:`NotApplicable` unless ``epsilon < alpha``;
:func:`evaluate` turns that into a non-applicable :class:`BoundResult`
row instead, which is what batch reports want.

Norm conventions: ``star`` is ``||f - pi f||_2`` and ``starstar`` is
``||f - pi f||_4``; for perturbed-chain formulas both are taken in
L2(pi_eps)/L4(pi_eps) and ``dist`` is ``||mu - pi_eps||``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import ChainError, NotApplicable


def _check_alpha(alpha):
    if not (0.0 < alpha <= 1.0):
        raise ChainError(f"alpha must lie in (0, 1], got {alpha!r}")


def _gate(alpha, epsilon, formula):
    _check_alpha(alpha)
    if epsilon < 0:
        raise ChainError(f"epsilon must be >= 0, got {epsilon!r}")
    if epsilon >= alpha:
        raise NotApplicable(alpha, epsilon, formula)


def asymptotic_bias(alpha: float, epsilon: float) -> float:
    """``epsilon / sqrt(alpha^2 - epsilon^2)``, the limiting L2 bias of the perturbed chain."""
    _gate(alpha, epsilon, "asymptotic_bias")
    return epsilon / math.sqrt(alpha * alpha - epsilon * epsilon)


def stationary_norm_bounds(alpha: float, epsilon: float) -> dict:
    """Upper bounds on ``||pi_eps||_2``: coarse ``a/(a-e)`` and sharp ``a/sqrt(a^2-e^2)``."""
    _gate(alpha, epsilon, "stationary_norm")
    return {
        "coarse": alpha / (alpha - epsilon),
        "sharp": alpha / math.sqrt(alpha * alpha - epsilon * epsilon),
    }


def stationary_gap_bounds(alpha: float, epsilon: float) -> dict:
    """Bounds on ``||pi - pi_eps||_2``.

    ``b0 = e/a`` is the uniformly-ergodic reference value (not itself a
    valid L2 bound), ``b1`` follows from the coarse norm bound and ``b2``
    is the sharp bound.
    """
    _gate(alpha, epsilon, "stationary_gap")
    # e/(a-e) * sqrt(2a/e - 1) written so that e = 0 is finite
    b1 = math.sqrt(epsilon * (2.0 * alpha - epsilon)) / (alpha - epsilon)
    return {
        "b0": epsilon / alpha,
        "b1": b1,
        "b2": asymptotic_bias(alpha, epsilon),
    }


def finite_time_l2_bound(alpha: float, epsilon: float, n: int, dist_to_target: float) -> float:
    """``(1-(a-e))^n ||mu - pi_eps||_2 + e/sqrt(a^2-e^2)`` bounding ``||mu P_eps^n - pi||_2``."""
    _gate(alpha, epsilon, "finite_time_l2")
    if n < 0 or dist_to_target < 0:
        raise ChainError("n and dist_to_target must be nonnegative")
    rate = 1.0 - (alpha - epsilon)
    return rate**n * dist_to_target + asymptotic_bias(alpha, epsilon)


def _cesaro_factor(gap: float, t: int) -> float:
    # (1/t) sum_{k<t} (1-gap)^k
    return (1.0 - (1.0 - gap) ** t) / (t * gap)


def cesaro_bound(alpha: float, epsilon: float, t: int, dist: float) -> float:
    """Bound on ``||pi - (1/t) sum_{k<t} mu P_eps^k||_2``.

    With ``epsilon == 0`` this is the exact-chain bound
    ``(1-(1-a)^t)/(t a) ||pi - mu||_2``.
    """
    if t < 1:
        raise ChainError("t must be >= 1")
    if epsilon == 0:
        _check_alpha(alpha)
        return _cesaro_factor(alpha, t) * dist
    _gate(alpha, epsilon, "cesaro")
    gap = alpha - epsilon
    return _cesaro_factor(gap, t) * dist + asymptotic_bias(alpha, epsilon)


def covariance_bound_stationary(rate: float, lag: int, star_f: float, star_g: float) -> float:
    """``rate^|lag| ||f - pi f||_2 ||g - pi g||_2`` for a chain started at stationarity."""
    if not (0.0 <= rate < 1.0):
        raise ChainError(f"rate must lie in [0, 1), got {rate!r}")
    return rate ** abs(lag) * star_f * star_g


def covariance_bound_nonstationary(
    rate: float,
    t: int,
    s: int,
    star_f: float,
    star_g: float,
    starstar_f: float,
    starstar_g: float,
    dist_mu: float,
    bias_f: float,
    bias_g: float,
) -> float:
    """Bound on ``Cov(f(X_t), g(X_{t+s}))`` for a chain started at ``mu``.

    ``bias_f = mu P^t f - pi f`` and ``bias_g = mu P^{t+s} g - pi g`` are
    signed; the result can be negative and is returned as-is.
    """
    if not (0.0 <= rate < 1.0):
        raise ChainError(f"rate must lie in [0, 1), got {rate!r}")
    return (
        rate**s * star_f * star_g
        + 2.0**1.5 * rate ** (t + s / 2.0) * dist_mu * starstar_f * starstar_g
        - bias_f * bias_g
    )


def covariance_sum_bound(
    rate_gap: float, t: int, star_f: float, starstar_f: float, dist_mu: float, cesaro_bias: float
) -> float:
    """Bound on ``(1/t^2) sum_{j,k<t} Cov(f(X_j), f(X_k))``.

    ``rate_gap`` is ``alpha`` (exact chain) or ``alpha - epsilon``;
    ``cesaro_bias`` is ``(1/t) sum_{m<t} mu P^m f - pi f``.
    """
    if t < 1:
        raise ChainError("t must be >= 1")
    _check_alpha(rate_gap)
    return (
        2.0 * star_f**2 / (rate_gap * t)
        + 2.0**3.5 * dist_mu * starstar_f**2 / (rate_gap**2 * t**2)
        - cesaro_bias**2
    )


def mse_bound_exact(alpha: float, t: int, star_f: float, starstar_f: float, dist_mu: float) -> float:
    """Bound on ``E[(pi f - (1/t) sum_{k<t} f(X_k))^2]`` for the exact chain."""
    if t < 1:
        raise ChainError("t must be >= 1")
    _check_alpha(alpha)
    return 2.0 * star_f**2 / (alpha * t) + 2.0**3.5 * dist_mu * starstar_f**2 / (alpha**2 * t**2)


def mse_bound_perturbed(
    alpha: float,
    epsilon: float,
    t: int,
    star_eps_f: float,
    starstar_eps_f: float,
    dist_mu_eps: float,
) -> dict:
    """Both MSE bounds for ``(1/t) sum f(X^eps_k)`` as an estimator of ``pi f``.

    Returns ``form1``, ``form2`` and ``best = min(form1, form2)``.  Neither
    form dominates the other in general.
    """
    if t < 1:
        raise ChainError("t must be >= 1")
    _gate(alpha, epsilon, "mse_perturbed")
    gap = alpha - epsilon
    sq_bias = epsilon**2 / (alpha**2 - epsilon**2)
    bias = math.sqrt(sq_bias)
    tail = dist_mu_eps * starstar_eps_f**2 / (gap**2 * t**2)
    form1 = (
        star_eps_f**2 * (sq_bias + 2.0 * (1.0 + bias * dist_mu_eps) / (gap * t))
        + 2.0**3.5 * tail
    )
    form2 = star_eps_f**2 * (2.0 * sq_bias + 4.0 / (gap * t)) + 2.0**4.5 * tail
    return {"form1": form1, "form2": form2, "best": min(form1, form2)}


# -- batch evaluation -------------------------------------------------------

FORMULAS = {
    "stationary_norm": stationary_norm_bounds,
    "stationary_gap": stationary_gap_bounds,
    "finite_time_l2": finite_time_l2_bound,
    "cesaro": cesaro_bound,
    "covariance_stationary": covariance_bound_stationary,
    "covariance_nonstationary": covariance_bound_nonstationary,
    "covariance_sum": covariance_sum_bound,
    "mse_exact": mse_bound_exact,
    "mse_perturbed": mse_bound_perturbed,
}


@dataclass(frozen=True)
class BoundResult:
    formula_id: str
    inputs: dict
    applicable: bool
    value: Optional[float] = None
    parts: dict = field(default_factory=dict)
    convention: str = "pi"

    def to_dict(self) -> dict:
        d = {"formula_id": self.formula_id, **self.inputs, "applicable": self.applicable}
        d["value"] = self.value
        d.update(self.parts)
        return d


# which component of a multi-valued formula is the headline value
_HEADLINE = {"stationary_norm": "sharp", "stationary_gap": "b2", "mse_perturbed": "best"}


def evaluate(formula_id: str, inputs: dict, convention: str = "pi") -> BoundResult:
    """Evaluate one formula by id; gate failures come back as ``applicable=False``.

    ``convention`` records which stationary law the norms were taken in
    (``"pi"`` or ``"pi_eps"`` for the role-swapped variants).
    """
    try:
        fn = FORMULAS[formula_id]
    except KeyError:
        raise ChainError(f"unknown formula_id {formula_id!r}") from None
    try:
        out = fn(**inputs)
    except NotApplicable:
        return BoundResult(formula_id, dict(inputs), False, convention=convention)
    if isinstance(out, dict):
        value = out[_HEADLINE[formula_id]]
        return BoundResult(formula_id, dict(inputs), True, float(value), dict(out), convention)
    return BoundResult(formula_id, dict(inputs), True, float(out), convention=convention)
