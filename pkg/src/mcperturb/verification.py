"""Bound-versus-oracle comparisons for a pair of kernels.

``analyze_pair`` gathers the spectral quantities once; ``domination_rows``
evaluates every bound next to its brute-force counterpart.  Formulas whose
norms live in L2(pi_eps) use the role-symmetric constants
``alpha_sym = min(alpha, alpha_eps)`` and
``eps_sym = max(||P - P_eps||_pi, ||P - P_eps||_pi_eps)`` so that their
hypotheses hold in both directions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from . import bounds, oracle
from .chain_core import (
    Distribution,
    centered_norms,
    check_reversibility,
    measure_l2,
    stationary_distribution,
)
from .errors import ChainError, NotApplicable
from .spectral import operator_norm, spectral_gap

SLACK_TOL = 1e-9


@dataclass(frozen=True)
class PairAnalysis:
    P: np.ndarray = field(repr=False)
    P_eps: Optional[np.ndarray] = field(repr=False)
    pi: np.ndarray = field(repr=False)
    pi_eps: Optional[np.ndarray] = field(repr=False)
    alpha: float
    epsilon: Optional[float] = None
    epsilon_source: str = "none"
    alpha_eps: Optional[float] = None
    epsilon_eps_norm: Optional[float] = None
    eps_reversible: bool = False

    @property
    def applicable(self) -> bool:
        return self.epsilon is not None and self.epsilon < self.alpha

    @property
    def alpha_sym(self) -> Optional[float]:
        if self.alpha_eps is None:
            return None
        return min(self.alpha, self.alpha_eps)

    @property
    def eps_sym(self) -> Optional[float]:
        if self.epsilon_eps_norm is None or self.epsilon is None:
            return None
        return max(self.epsilon, self.epsilon_eps_norm)

    @property
    def sym_applicable(self) -> bool:
        return self.alpha_sym is not None and self.eps_sym < self.alpha_sym


def analyze_pair(p, p_eps=None, epsilon: Optional[float] = None) -> PairAnalysis:
    """Stationary laws, gaps and perturbation norms for ``P`` and optionally ``P_eps``.

    ``epsilon`` overrides the computed ``||P - P_eps||_2`` (a manual upper
    bound); the analysis records which source was used.
    """
    pm = np.asarray(getattr(p, "matrix", p), dtype=float)
    pi = stationary_distribution(p).weights
    alpha = spectral_gap(pm, pi).alpha
    if p_eps is None:
        return PairAnalysis(pm, None, pi, None, alpha)

    em = np.asarray(getattr(p_eps, "matrix", p_eps), dtype=float)
    pi_eps = stationary_distribution(p_eps).weights
    computed = operator_norm(pm - em, pi).full_norm
    if epsilon is not None and epsilon < computed - 1e-12:
        raise ChainError(f"manual epsilon {epsilon} is below the computed norm {computed}")
    eps_rev = check_reversibility(em, pi_eps, 1e-9)[0]
    alpha_eps = eps_norm = None
    if eps_rev:
        try:
            alpha_eps = spectral_gap(em, pi_eps).alpha
        except ChainError:
            alpha_eps = None
        eps_norm = operator_norm(pm - em, pi_eps).full_norm
        if epsilon is not None:
            eps_norm = max(eps_norm, epsilon)
    return PairAnalysis(
        P=pm,
        P_eps=em,
        pi=pi,
        pi_eps=pi_eps,
        alpha=alpha,
        epsilon=computed if epsilon is None else float(epsilon),
        epsilon_source="computed" if epsilon is None else "manual",
        alpha_eps=alpha_eps,
        epsilon_eps_norm=eps_norm,
        eps_reversible=eps_rev,
    )


HEADER = ("quantity", "n", "t", "s", "bound", "oracle", "slack", "pass", "convention")


def _row(quantity, bound, truth, n="", t="", s="", convention="pi"):
    if bound is None:
        return {"quantity": quantity, "n": n, "t": t, "s": s, "bound": "", "oracle": truth,
                "slack": "", "pass": "n/a", "convention": convention}
    slack = bound - truth
    return {"quantity": quantity, "n": n, "t": t, "s": s, "bound": bound, "oracle": truth,
            "slack": slack, "pass": bool(slack >= -SLACK_TOL), "convention": convention}


def _gated(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except NotApplicable:
        return None


def domination_rows(
    pa: PairAnalysis,
    mu,
    f,
    g=None,
    horizons: Iterable[int] = (),
    pairs: Optional[Iterable[tuple]] = None,
) -> list[dict]:
    """Every bound next to its oracle value, one row per (quantity, n/t/s).

    ``pairs`` lists the ``(t, s)`` combinations for covariance rows and
    defaults to all pairs drawn from ``horizons``.
    """
    horizons = [int(h) for h in horizons]
    mu = np.asarray(getattr(mu, "weights", mu), dtype=float)
    f = np.asarray(getattr(f, "values", f), dtype=float)
    g = f if g is None else np.asarray(getattr(g, "values", g), dtype=float)
    P, pi, alpha = pa.P, pa.pi, pa.alpha
    rate = 1.0 - alpha
    star_f, ss_f = centered_norms(f, pi)
    star_g, ss_g = centered_norms(g, pi)
    dist_mu = measure_l2(mu - pi, pi)
    pif, pig = float(pi @ f), float(pi @ g)
    if pairs is None:
        pairs = [(t, s) for t in horizons for s in horizons]
    pairs = list(pairs)
    rows: list[dict] = []

    # exact chain
    for h in horizons:
        truth = oracle.l2_distance(oracle.exact_pushforward(mu, P, h), pi, pi)
        rows.append(_row("contraction", rate**h * dist_mu, truth, n=h))
        rows.append(_row("covariance_stationary",
                         bounds.covariance_bound_stationary(rate, h, star_f, star_g),
                         oracle.exact_covariance(f, g, pi, P, 0, h), t=0, s=h))
    for t, s in pairs:
        bias_f = float(oracle.exact_pushforward(mu, P, t) @ f) - pif
        bias_g = float(oracle.exact_pushforward(mu, P, t + s) @ g) - pig
        b = bounds.covariance_bound_nonstationary(rate, t, s, star_f, star_g, ss_f, ss_g,
                                                  dist_mu, bias_f, bias_g)
        rows.append(_row("covariance_nonstationary", b,
                         oracle.exact_covariance(f, g, mu, P, t, s), t=t, s=s))
    for t in (h for h in horizons if h >= 1):
        rows.append(_row("cesaro_exact", bounds.cesaro_bound(alpha, 0.0, t, dist_mu),
                         oracle.exact_cesaro_error(mu, P, pi, t), t=t))
        ces_bias = float(np.mean([oracle.exact_pushforward(mu, P, m) @ f for m in range(t)])) - pif
        rows.append(_row("covariance_sum",
                         bounds.covariance_sum_bound(alpha, t, star_f, ss_f, dist_mu, ces_bias),
                         oracle.covariance_double_sum(f, mu, P, t), t=t))
        rows.append(_row("mse_exact", bounds.mse_bound_exact(alpha, t, star_f, ss_f, dist_mu),
                         oracle.exact_mse(f, mu, P, t, pif), t=t))

    if pa.P_eps is None:
        return rows

    E, pi_e, eps = pa.P_eps, pa.pi_eps, pa.epsilon
    ok = pa.applicable
    gap = oracle.exact_stationary_gap(P, E)
    sn = _gated(bounds.stationary_norm_bounds, alpha, eps)
    sg = _gated(bounds.stationary_gap_bounds, alpha, eps)
    rows.append(_row("stationary_norm_sharp", sn and sn["sharp"], measure_l2(pi_e, pi)))
    rows.append(_row("stationary_norm_coarse", sn and sn["coarse"], measure_l2(pi_e, pi)))
    rows.append(_row("stationary_gap", sg and sg["b2"], gap["l2"]))
    rows.append(_row("stationary_gap_l1", sg and sg["b2"], gap["l1"]))
    dist_e = measure_l2(mu - pi_e, pi)
    for h in horizons:
        law = oracle.exact_pushforward(mu, E, h)
        rows.append(_row("perturbed_contraction",
                         (1.0 - (alpha - eps)) ** h * dist_e if ok else None,
                         oracle.l2_distance(law, pi_e, pi), n=h))
        rows.append(_row("finite_time_l2", _gated(bounds.finite_time_l2_bound, alpha, eps, h, dist_e),
                         oracle.l2_distance(law, pi, pi), n=h))
    for t in (h for h in horizons if h >= 1):
        rows.append(_row("cesaro_perturbed", _gated(bounds.cesaro_bound, alpha, eps, t, dist_e),
                         oracle.exact_cesaro_error(mu, E, pi, t), t=t))

    # role-swapped: norms in L2(pi_eps), constants symmetric in P and P_eps
    if not pa.eps_reversible:
        return rows
    a_s, e_s = pa.alpha_sym, pa.eps_sym
    sym = pa.sym_applicable
    conv = "pi_eps"
    r_eps = 1.0 - (a_s - e_s) if sym else None
    star_fe, ss_fe = centered_norms(f, pi_e)
    star_ge, ss_ge = centered_norms(g, pi_e)
    dist_ee = measure_l2(mu - pi_e, pi_e)
    pef, peg = float(pi_e @ f), float(pi_e @ g)
    for h in horizons:
        rows.append(_row("covariance_stationary_eps",
                         bounds.covariance_bound_stationary(r_eps, h, star_fe, star_ge) if sym else None,
                         oracle.exact_covariance(f, g, pi_e, E, 0, h), t=0, s=h, convention=conv))
        law = oracle.exact_pushforward(mu, E, h)
        rows.append(_row("finite_time_l2_eps",
                         _gated(bounds.finite_time_l2_bound, a_s, e_s, h, dist_ee) if sym else None,
                         oracle.l2_distance(law, pi, pi_e), n=h, convention=conv))
    for t, s in pairs:
        b = None
        if sym:
            bias_f = float(oracle.exact_pushforward(mu, E, t) @ f) - pef
            bias_g = float(oracle.exact_pushforward(mu, E, t + s) @ g) - peg
            b = bounds.covariance_bound_nonstationary(r_eps, t, s, star_fe, star_ge, ss_fe, ss_ge,
                                                      dist_ee, bias_f, bias_g)
        rows.append(_row("covariance_nonstationary_eps", b,
                         oracle.exact_covariance(f, g, mu, E, t, s), t=t, s=s, convention=conv))
    for t in (h for h in horizons if h >= 1):
        b_sum = b_mse = None
        if sym:
            ces_bias = float(np.mean([oracle.exact_pushforward(mu, E, m) @ f for m in range(t)])) - pef
            b_sum = bounds.covariance_sum_bound(a_s - e_s, t, star_fe, ss_fe, dist_ee, ces_bias)
            b_mse = bounds.mse_bound_perturbed(a_s, e_s, t, star_fe, ss_fe, dist_ee)["best"]
        rows.append(_row("covariance_sum_eps", b_sum, oracle.covariance_double_sum(f, mu, E, t),
                         t=t, convention=conv))
        rows.append(_row("mse_perturbed", b_mse, oracle.exact_mse(f, mu, E, t, pif),
                         t=t, convention=conv))
    return rows
