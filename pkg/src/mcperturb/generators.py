"""Random reversible chains and perturbations for property sweeps."""

from __future__ import annotations

import numpy as np

from .chain_core import validate_kernel
from .noisy_mh import NoiseModel, ProposalSpec, TargetSpec


def random_reversible(n: int, rng: np.random.Generator, density: float = 1.0, laziness: float = 0.0):
    """Reversible kernel from a random symmetric weight matrix.

    ``P = W / rowsum(W)`` is reversible w.r.t. ``pi ~ rowsum(W)``.  The
    diagonal is kept positive so the chain is aperiodic.
    """
    w = rng.exponential(size=(n, n))
    if density < 1.0:
        mask = rng.random((n, n)) < density
        mask = mask | mask.T
        # a path keeps the graph connected
        idx = np.arange(n - 1)
        mask[idx, idx + 1] = mask[idx + 1, idx] = True
        w = w * mask
    w = np.triu(w) + np.triu(w, 1).T
    w[np.diag_indices(n)] += laziness * w.sum(axis=1) + 1e-3
    return validate_kernel(w / w.sum(axis=1, keepdims=True))


def reversible_perturbation(p, rng: np.random.Generator, size: float):
    """Reversible kernel close to ``p``: perturb its symmetric flow matrix by ``size``."""
    from .chain_core import stationary_distribution

    pi = stationary_distribution(p).weights
    flow = pi[:, None] * p.matrix
    noise = rng.uniform(-1.0, 1.0, size=flow.shape)
    noise = 0.5 * (noise + noise.T)
    flow = np.clip(flow * (1.0 + size * noise), 1e-15, None)
    flow = 0.5 * (flow + flow.T)
    return validate_kernel(flow / flow.sum(axis=1, keepdims=True))


def general_perturbation(p, rng: np.random.Generator, size: float):
    """Possibly non-reversible kernel close to ``p`` (rows mixed towards random laws)."""
    n = p.n
    rows = rng.dirichlet(np.ones(n), size=n)
    return validate_kernel((1.0 - size) * p.matrix + size * rows)


def random_noisy_instance(n: int, rng: np.random.Generator, max_atoms: int = 5, scale: float = 0.1,
                          rule: str = "multiplicative"):
    """Random target, symmetric-support proposal and per-state noise."""
    target = TargetSpec(rng.uniform(0.2, 2.0, size=n))
    q = rng.exponential(size=(n, n))
    if n > 3:
        keep = rng.random((n, n)) < 0.7
        keep = keep & keep.T
        np.fill_diagonal(keep, True)
        idx = np.arange(n - 1)
        keep[idx, idx + 1] = keep[idx + 1, idx] = True
        q = q * keep
    proposal = ProposalSpec(validate_kernel(q / q.sum(axis=1, keepdims=True)))
    atoms, probs = [], []
    for _ in range(n):
        k = int(rng.integers(1, max_atoms + 1))
        z = rng.uniform(-scale, scale, size=k)
        atoms.append(z)
        probs.append(rng.dirichlet(np.ones(k)))
    probs = [p / p.sum() for p in probs]
    return target, proposal, NoiseModel(tuple(atoms), tuple(probs), rule)
