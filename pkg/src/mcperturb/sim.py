"""Seeded Monte Carlo runs of exact and noisy Metropolis-Hastings.

Every replicate owns an independent random stream derived only from
``(seed, replicate_index)``; all of a replicate's uniforms are drawn up
front in a fixed layout (one for the initial state, then three per
transition: proposal, noise atom, accept test).  Chains are then advanced
in lock-step across a block of replicates, so results do not depend on
block size or on how replicates are scheduled.

A run with ``steps = t`` produces the samples ``X_0, ..., X_{t-1}`` and the
ergodic average ``(1/t) sum_{k<t} f(X_k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .chain_core import Distribution, _vec
from .errors import ChainError, InsufficientReplicates
from .noisy_mh import NoiseModel, ProposalSpec, TargetSpec, acceptance_ratios

BLOCK = 4096


@dataclass(frozen=True)
class SimConfig:
    steps: int
    replicates: int
    seed: int
    initial: Distribution
    thinning: int = 1
    burn_in: int = 0

    def __post_init__(self):
        if self.steps < 1 or self.replicates < 1:
            raise ChainError("steps and replicates must be >= 1")
        if self.thinning < 1 or self.burn_in < 0:
            raise ChainError("thinning must be >= 1 and burn_in >= 0")
        if not isinstance(self.initial, Distribution):
            object.__setattr__(self, "initial", Distribution(self.initial))

    @property
    def transitions(self) -> int:
        return self.burn_in + (self.steps - 1) * self.thinning


@dataclass(frozen=True)
class SimResult:
    averages: np.ndarray = field(repr=False)
    occupancy_per_replicate: np.ndarray = field(repr=False)
    transition_counts: np.ndarray = field(repr=False)
    acceptance_rate: float
    rng_streams_used: int
    seed: int

    @property
    def occupancy(self) -> np.ndarray:
        return self.occupancy_per_replicate.mean(axis=0)

    def stream_label(self, replicate: int) -> str:
        return f"{self.seed}:{replicate}"


def replicate_stream(seed: int, replicate: int) -> np.random.Generator:
    """Independent generator for one replicate; a pure function of its arguments."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(replicate),))
    return np.random.Generator(np.random.PCG64(ss))


def _inverse_cdf(cum_rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = (cum_rows <= u[:, None]).sum(axis=1)
    return np.minimum(idx, cum_rows.shape[1] - 1)


def _simulate(target, proposal, noise: Optional[NoiseModel], f, config: SimConfig) -> SimResult:
    q = proposal.kernel.matrix
    n = q.shape[0]
    ratios = acceptance_ratios(target, proposal)
    fv = _vec(f)
    if fv.size != n or config.initial.weights.size != n:
        raise ChainError("observable / initial law size does not match the chain")
    q_cum = np.cumsum(q, axis=1)
    init_cum = np.cumsum(config.initial.weights)[None, :]
    if noise is not None:
        z_atoms, z_probs = noise.padded()
        z_cum = np.cumsum(z_probs, axis=1)

    T = config.transitions
    R = config.replicates
    averages = np.empty(R)
    occupancy = np.empty((R, n))
    counts = np.zeros((n, n), dtype=np.int64)
    accepted = 0

    for start in range(0, R, BLOCK):
        idx = range(start, min(R, start + BLOCK))
        u = np.stack([replicate_stream(config.seed, r).random(1 + 3 * T) for r in idx])
        b = u.shape[0]
        x = _inverse_cdf(np.repeat(init_cum, b, axis=0), u[:, 0])
        total = np.zeros(b)
        occ = np.zeros((b, n))
        rows = np.arange(b)

        def record(states):
            nonlocal total
            total += fv[states]
            occ[rows, states] += 1.0

        if config.burn_in == 0:
            record(x)
        for k in range(T):
            u_prop, u_noise, u_acc = u[:, 1 + 3 * k], u[:, 2 + 3 * k], u[:, 3 + 3 * k]
            y = _inverse_cdf(q_cum[x], u_prop)
            ratio = ratios[x, y]
            if noise is not None:
                atom = _inverse_cdf(z_cum[y], u_noise)
                ratio = noise.distort(ratio, z_atoms[y, atom])
            move = u_acc <= ratio
            nxt = np.where(move, y, x)
            np.add.at(counts, (x, nxt), 1)
            accepted += int(move.sum())
            x = nxt
            step = k + 1 - config.burn_in
            if step >= 0 and step % config.thinning == 0:
                record(x)
        averages[start : start + b] = total / config.steps
        occupancy[start : start + b] = occ / config.steps

    return SimResult(
        averages=averages,
        occupancy_per_replicate=occupancy,
        transition_counts=counts,
        acceptance_rate=accepted / (R * T) if T else float("nan"),
        rng_streams_used=R,
        seed=int(config.seed),
    )


def run_mh(target: TargetSpec, proposal: ProposalSpec, f, config: SimConfig) -> SimResult:
    """Metropolis-Hastings: propose, then accept when ``u <= a(y|x)``."""
    return _simulate(target, proposal, None, f, config)


def run_noisy_mh(target: TargetSpec, proposal: ProposalSpec, noise: NoiseModel, f,
                 config: SimConfig) -> SimResult:
    """Noisy MH: as :func:`run_mh` but the test uses ``a_hat(y|x, z)`` with ``z ~ f_y``."""
    return _simulate(target, proposal, noise, f, config)


def empirical_mse(result: SimResult, reference_mean: float) -> tuple[float, float]:
    """Mean of ``(reference - average)^2`` over replicates and its jackknife standard error."""
    sq = (reference_mean - result.averages) ** 2
    r = sq.size
    if r < 2:
        raise InsufficientReplicates(f"need at least 2 replicates, got {r}")
    est = float(sq.mean())
    loo = (sq.sum() - sq) / (r - 1)
    se = math.sqrt((r - 1) / r * float(np.sum((loo - loo.mean()) ** 2)))
    return est, se


def one_step_frequencies(result: SimResult) -> tuple[np.ndarray, np.ndarray]:
    """Row-normalized transition counts and the number of transitions out of each state."""
    c = result.transition_counts.astype(float)
    visits = c.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        freq = np.where(visits[:, None] > 0, c / visits[:, None], 0.0)
    return freq, visits
