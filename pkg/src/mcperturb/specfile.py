"""JSON spec ingestion.

Chain spec::

    {"states": 2, "kernel": [[0.9, 0.1], [0.1, 0.9]], "labels": ["a", "b"],
     "perturbed_kernel": [[...]], "epsilon": 0.1,
     "initial": [...], "observables": {"f": [...], "g": [...]},
     "horizons": [1, 2, 4], "epsilons": [...], "scales": [...]}

Noisy spec::

    {"target": [2, 1], "proposal": [[0.5, 0.5], [0.5, 0.5]],
     "noise": {"rule": "multiplicative", "atoms": [[-0.1, 0.5], [0.1, 0.5]]}}

``atoms`` may also be a list with one ``[[z, p], ...]`` list per proposed
state; the lognormal rule accepts ``{"sigma": s, "points": k}`` instead.
Reals may be given as JSON numbers or decimal strings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .chain_core import Distribution, StateSpace, TransitionKernel, validate_kernel
from .errors import ChainError
from .noisy_mh import NoiseModel, ProposalSpec, TargetSpec, lognormal_atoms


class SpecError(ChainError):
    pass


def _floatify(x):
    if isinstance(x, (list, tuple)):
        return [_floatify(v) for v in x]
    return float(x)


def _reals(x) -> np.ndarray:
    try:
        return np.array(_floatify(x), dtype=float)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"expected numbers or decimal strings, got {x!r}") from exc


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read spec {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SpecError("spec must be a JSON object")
    return doc


@dataclass
class ChainSpec:
    kernel: TransitionKernel
    perturbed: Optional[TransitionKernel] = None
    epsilon: Optional[float] = None
    initial: Optional[Distribution] = None
    observables: dict = field(default_factory=dict)
    horizons: list = field(default_factory=list)
    epsilons: list = field(default_factory=list)
    scales: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.kernel.n


def parse_chain_spec(doc: dict) -> ChainSpec:
    if "kernel" not in doc:
        raise SpecError("chain spec needs a 'kernel'")
    m = _reals(doc["kernel"])
    n = int(doc.get("states", m.shape[0] if m.ndim else 0))
    try:
        space = StateSpace(n, doc.get("labels"))
        kernel = validate_kernel(m, space)
        perturbed = None
        if doc.get("perturbed_kernel") is not None:
            perturbed = validate_kernel(_reals(doc["perturbed_kernel"]), space)
        initial = None
        if doc.get("initial") is not None:
            initial = Distribution(_reals(doc["initial"]))
            if len(initial) != n:
                raise SpecError("initial law has the wrong length")
    except SpecError:
        raise
    except ChainError as exc:
        raise SpecError(str(exc)) from exc
    obs = {}
    for name, vals in (doc.get("observables") or {}).items():
        v = _reals(vals)
        if v.shape != (n,):
            raise SpecError(f"observable {name!r} must have {n} values")
        obs[name] = v
    horizons = [int(h) for h in doc.get("horizons", [])]
    if any(h < 0 for h in horizons):
        raise SpecError("horizons must be nonnegative")
    eps = doc.get("epsilon")
    return ChainSpec(
        kernel=kernel,
        perturbed=perturbed,
        epsilon=None if eps is None else float(eps),
        initial=initial,
        observables=obs,
        horizons=horizons,
        epsilons=[float(e) for e in doc.get("epsilons", [])],
        scales=[float(s) for s in doc.get("scales", [])],
    )


@dataclass
class NoisySpec:
    target: TargetSpec
    proposal: ProposalSpec
    noise: NoiseModel
    initial: Optional[Distribution] = None
    observable: Optional[np.ndarray] = None
    horizons: list = field(default_factory=list)
    scales: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.target.unnormalized_weights.size


def _parse_noise(spec: dict, n: int) -> NoiseModel:
    rule = spec.get("rule", "multiplicative")
    if "atoms" not in spec:
        if rule == "lognormal" and "sigma" in spec:
            z, p = lognormal_atoms(float(spec["sigma"]), int(spec.get("points", 7)))
            return NoiseModel.shared(n, z, p, rule)
        raise SpecError("noise needs 'atoms' (or 'sigma' for the lognormal rule)")
    raw = spec["atoms"]
    try:
        arr = _reals(raw)
    except SpecError:
        arr = None  # ragged: one atom list per state
    if arr is not None and arr.ndim == 2:
        if arr.shape[1] != 2:
            raise SpecError("atoms must be [z, p] pairs")
        return NoiseModel.shared(n, arr[:, 0], arr[:, 1], rule)
    per_state = [_reals(a) for a in raw]
    if len(per_state) != n or any(a.ndim != 2 or a.shape[1] != 2 for a in per_state):
        raise SpecError(f"per-state atoms need {n} lists of [z, p] pairs")
    return NoiseModel(tuple(a[:, 0] for a in per_state), tuple(a[:, 1] for a in per_state), rule)


def parse_noisy_spec(doc: dict) -> NoisySpec:
    for key in ("target", "proposal", "noise"):
        if key not in doc:
            raise SpecError(f"noisy spec needs {key!r}")
    try:
        target = TargetSpec(_reals(doc["target"]))
        n = target.unnormalized_weights.size
        proposal = ProposalSpec(validate_kernel(_reals(doc["proposal"]), StateSpace(n)))
        noise = _parse_noise(doc["noise"], n)
        initial = Distribution(_reals(doc["initial"])) if doc.get("initial") is not None else None
    except SpecError:
        raise
    except ChainError as exc:
        raise SpecError(str(exc)) from exc
    obs = doc.get("observable")
    return NoisySpec(
        target=target,
        proposal=proposal,
        noise=noise,
        initial=initial,
        observable=None if obs is None else _reals(obs),
        horizons=[int(h) for h in doc.get("horizons", [])],
        scales=[float(s) for s in doc.get("scales", [])],
    )


def is_noisy(doc: dict) -> bool:
    return "target" in doc and "proposal" in doc


def read_spec(path: Path | str):
    doc = load_json(path)
    return parse_noisy_spec(doc) if is_noisy(doc) else parse_chain_spec(doc)
