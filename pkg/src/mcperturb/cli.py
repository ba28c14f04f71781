"""Command-line driver: ``mcperturb {analyze,verify,noisy,simulate,sweep} SPEC``.

Exit codes: 0 ok, 2 spec or chain error, 3 nothing applicable (epsilon >=
alpha), 4 a bound failed to dominate its oracle (verify only).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, bounds, oracle
from .chain_core import Distribution, measure_l2, validate_kernel
from .errors import CapExceeded, ChainError, NotApplicable
from .noisy_mh import analyze_noise, noisy_error_bound, noisy_operator_bound
from .sim import SimConfig, run_noisy_mh
from .specfile import ChainSpec, NoisySpec, SpecError, read_spec
from .spectral import operator_norm, spectral_gap
from .verification import HEADER, analyze_pair, domination_rows

EXIT_OK, EXIT_SPEC, EXIT_NOT_APPLICABLE, EXIT_DOMINATION = 0, 2, 3, 4
COMMANDS = ("analyze", "verify", "noisy", "simulate", "sweep")
DEFAULT_CURVE = (1, 2, 4, 8, 16, 32, 64)


@dataclass
class RunManifest:
    command: str
    inputs: list
    output: Optional[str] = None
    seed: int = 0
    max_states: int = oracle.MAX_STATES
    max_horizon: int = oracle.MAX_HORIZON
    format: Optional[str] = None
    steps: int = 64
    replicates: int = 1000

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise SpecError(f"unknown command {self.command!r}")
        for p in self.inputs:
            if not Path(p).exists():
                raise SpecError(f"input {p} does not exist")
        if not (2 <= self.max_states <= oracle.MAX_STATES):
            raise SpecError(f"--max-states must lie in [2, {oracle.MAX_STATES}]")
        if not (1 <= self.max_horizon <= oracle.MAX_HORIZON):
            raise SpecError(f"--max-horizon must lie in [1, {oracle.MAX_HORIZON}]")

    def metadata(self) -> str:
        return (f"# mcperturb {__version__} command={self.command} seed={self.seed} "
                f"max_states={self.max_states} max_horizon={self.max_horizon}")


# -- output helpers ---------------------------------------------------------

def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return "" if v is None else str(v)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def _emit(text: str, manifest: RunManifest):
    if manifest.output:
        Path(manifest.output).write_text(text)
    else:
        sys.stdout.write(text)


def write_rows(rows: list, header, manifest: RunManifest, default="csv"):
    if (manifest.format or default) == "json":
        _emit(json.dumps(_jsonable({"rows": rows, "meta": manifest.metadata()[2:]}), indent=2) + "\n",
              manifest)
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r.get(h)) for h in header])
    buf.write(manifest.metadata() + "\n")
    _emit(buf.getvalue(), manifest)


def write_report(report: dict, manifest: RunManifest):
    if (manifest.format or "json") == "csv":
        flat = []

        def walk(prefix, x):
            if isinstance(x, dict):
                for k, v in x.items():
                    walk(f"{prefix}.{k}" if prefix else k, v)
            else:
                flat.append({"key": prefix, "value": json.dumps(_jsonable(x))})

        walk("", report)
        write_rows(flat, ("key", "value"), manifest)
        return
    report = dict(report, meta=manifest.metadata()[2:])
    _emit(json.dumps(_jsonable(report), indent=2) + "\n", manifest)


def _load(manifest: RunManifest, kind):
    if len(manifest.inputs) != 1:
        raise SpecError(f"{manifest.command} takes exactly one spec file")
    spec = read_spec(manifest.inputs[0])
    if not isinstance(spec, kind):
        raise SpecError(f"{manifest.command} needs a {kind.__name__}")
    if spec.n > manifest.max_states:
        raise CapExceeded(f"{spec.n} states exceeds --max-states {manifest.max_states}")
    return spec


# -- commands ---------------------------------------------------------------

def cmd_analyze(manifest: RunManifest) -> int:
    """Stationary law, gap, perturbation size, stationary bounds and oracle gaps."""
    spec = _load(manifest, ChainSpec)
    pa = analyze_pair(spec.kernel, spec.perturbed, spec.epsilon)
    sr = spectral_gap(pa.P, pa.pi)
    report = {"states": spec.n, "pi": pa.pi, "alpha": pa.alpha, "rho": sr.rho,
              "eigenvalues": sr.eigenvalues}
    code = EXIT_OK
    if pa.P_eps is not None:
        report["pi_eps"] = pa.pi_eps
        report["epsilon"] = pa.epsilon
        report["epsilon_source"] = pa.epsilon_source
        report["applicable"] = pa.applicable
        gap = oracle.exact_stationary_gap(pa.P, pa.P_eps)
        report["oracle"] = {"gap_l2": gap["l2"], "gap_l1": gap["l1"], "gap_tv": gap["tv"],
                            "norm_pi_eps": measure_l2(pa.pi_eps, pa.pi)}
        if pa.applicable:
            report["bounds"] = {
                **bounds.stationary_norm_bounds(pa.alpha, pa.epsilon),
                **bounds.stationary_gap_bounds(pa.alpha, pa.epsilon),
            }
        else:
            report["bounds"] = None
            code = EXIT_NOT_APPLICABLE
    write_report(report, manifest)
    return code


def cmd_verify(manifest: RunManifest) -> int:
    """Domination table: every bound next to its oracle value."""
    spec = _load(manifest, ChainSpec)
    horizons = sorted(set(spec.horizons))
    if horizons and 2 * max(horizons) > manifest.max_horizon:
        raise CapExceeded(f"horizons up to {max(horizons)} need t+s <= --max-horizon {manifest.max_horizon}")
    rows = []
    if horizons:
        pa = analyze_pair(spec.kernel, spec.perturbed, spec.epsilon)
        mu = spec.initial.weights if spec.initial is not None else np.full(spec.n, 1.0 / spec.n)
        obs = spec.observables
        f = obs.get("f", next(iter(obs.values()), np.arange(spec.n, dtype=float)))
        g = obs.get("g", f)
        rows = domination_rows(pa, mu, f, g, horizons)
    write_rows(rows, HEADER, manifest)
    return EXIT_DOMINATION if any(r["pass"] is False for r in rows) else EXIT_OK


def cmd_noisy(manifest: RunManifest) -> int:
    """Noisy-MH operator analysis and the Cesaro error-bound curve."""
    spec = _load(manifest, NoisySpec)
    an = analyze_noise(spec.target, spec.proposal, spec.noise)
    pi = an.pi.weights
    ob = noisy_operator_bound(an, pi)
    alpha = spectral_gap(an.P, pi).alpha
    pi_hat = oracle.dense_stationary(an.P_hat)
    mu = spec.initial.weights if spec.initial is not None else np.full(spec.n, 1.0 / spec.n)
    dist = measure_l2(pi_hat - mu, pi)
    horizons = spec.horizons or list(DEFAULT_CURVE)
    if max(horizons) > manifest.max_horizon:
        raise CapExceeded(f"horizon {max(horizons)} exceeds --max-horizon {manifest.max_horizon}")
    applicable = ob.epsilon_bound < alpha
    curve = []
    for t in horizons:
        try:
            b = noisy_error_bound(alpha, an, pi, t, dist, ob)
        except NotApplicable:
            b = None
        curve.append({"t": t, "bound": b, "oracle": oracle.exact_cesaro_error(mu, an.P_hat, pi, t)})
    report = {
        "states": spec.n,
        "rule": spec.noise.rule,
        "alpha": alpha,
        "delta_sup": an.delta_sup,
        "q_norm": ob.q_norm,
        "epsilon_bound": ob.epsilon_bound,
        "epsilon_actual": ob.epsilon_actual,
        "decomposition_residual": an.decomposition_residual,
        "margin": alpha - ob.epsilon_bound,
        "applicable": applicable,
        "p_hat_reversible": an.p_hat_reversible,
        "oracle_gap_l2": measure_l2(pi - pi_hat, pi),
        "curve": curve,
    }
    write_report(report, manifest)
    if not applicable:
        print(f"not applicable: epsilon={ob.epsilon_bound!r} >= alpha={alpha!r}", file=sys.stderr)
        return EXIT_NOT_APPLICABLE
    return EXIT_OK


def cmd_simulate(manifest: RunManifest) -> int:
    """Per-replicate ergodic averages and occupancies."""
    spec = _load(manifest, NoisySpec)
    n = spec.n
    f = spec.observable if spec.observable is not None else np.arange(n, dtype=float)
    init = spec.initial or Distribution(np.full(n, 1.0 / n))
    config = SimConfig(steps=manifest.steps, replicates=manifest.replicates, seed=manifest.seed,
                       initial=init)
    res = run_noisy_mh(spec.target, spec.proposal, spec.noise, f, config)
    header = ("replicate", "seed_stream", "average") + tuple(f"occupancy_{i}" for i in range(n))
    rows = []
    for r in range(config.replicates):
        row = {"replicate": r, "seed_stream": res.stream_label(r), "average": float(res.averages[r])}
        for i in range(n):
            row[f"occupancy_{i}"] = float(res.occupancy_per_replicate[r, i])
        rows.append(row)
    write_rows(rows, header, manifest)
    return EXIT_OK


SWEEP_HEADER = ("scale", "epsilon", "applicable", "b0", "b1", "b2", "oracle_gap",
                "b2_over_b0", "b1_over_b0_sqrt_eps")


def _sweep_row(scale, alpha, eps, gap_l2):
    row = {"scale": scale, "epsilon": eps, "oracle_gap": gap_l2}
    try:
        b = bounds.stationary_gap_bounds(alpha, eps)
    except NotApplicable:
        return dict(row, applicable=False)
    row.update(applicable=True, **b)
    if eps > 0:
        row["b2_over_b0"] = b["b2"] / b["b0"]
        row["b1_over_b0_sqrt_eps"] = b["b1"] / b["b0"] * np.sqrt(eps)
    return row


def cmd_sweep(manifest: RunManifest) -> int:
    """Stationary-gap bounds over a grid of perturbation sizes."""
    spec = read_spec(manifest.inputs[0]) if len(manifest.inputs) == 1 else None
    if spec is None:
        raise SpecError("sweep takes exactly one spec file")
    if spec.n > manifest.max_states:
        raise CapExceeded(f"{spec.n} states exceeds --max-states {manifest.max_states}")
    rows = []
    if isinstance(spec, NoisySpec):
        base = analyze_noise(spec.target, spec.proposal, spec.noise)
        pi = base.pi.weights
        alpha = spectral_gap(base.P, pi).alpha
        for c in spec.scales or [1.0]:
            an = analyze_noise(spec.target, spec.proposal, spec.noise.scaled(c))
            eps = operator_norm(an.P.matrix - an.P_hat.matrix, pi).full_norm
            gap = oracle.exact_stationary_gap(an.P, an.P_hat)["l2"]
            rows.append(_sweep_row(c, alpha, eps, gap))
    else:
        if spec.perturbed is None:
            raise SpecError("sweep over a chain spec needs 'perturbed_kernel'")
        pa = analyze_pair(spec.kernel, spec.perturbed)
        unit = pa.epsilon
        if spec.epsilons:
            if unit == 0:
                raise SpecError("perturbed_kernel equals kernel; cannot scale to epsilon")
            grid = [e / unit for e in spec.epsilons]
        else:
            grid = spec.scales or [1.0]
        for c in grid:
            try:
                pc = validate_kernel((1.0 - c) * pa.P + c * pa.P_eps)
            except ChainError as exc:
                raise SpecError(f"scale {c} leaves the simplex: {exc}") from exc
            eps = operator_norm(pa.P - pc.matrix, pa.pi).full_norm
            gap = oracle.exact_stationary_gap(pa.P, pc)["l2"]
            rows.append(_sweep_row(c, pa.alpha, eps, gap))
    write_rows(rows, SWEEP_HEADER, manifest)
    if rows and not any(r["applicable"] for r in rows):
        return EXIT_NOT_APPLICABLE
    return EXIT_OK


HANDLERS = {
    "analyze": cmd_analyze,
    "verify": cmd_verify,
    "noisy": cmd_noisy,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcperturb", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mcperturb {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HANDLERS[name].__doc__.splitlines()[0])
        p.add_argument("spec", nargs="+", help="JSON spec file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--max-states", type=int, default=oracle.MAX_STATES)
        p.add_argument("--max-horizon", type=int, default=oracle.MAX_HORIZON)
        p.add_argument("--format", choices=("csv", "json"), default=None)
        if name == "simulate":
            p.add_argument("--steps", type=int, default=64)
            p.add_argument("--replicates", type=int, default=1000)
    return parser


def run(manifest: RunManifest) -> int:
    try:
        return HANDLERS[manifest.command](manifest)
    except ChainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        manifest = RunManifest(
            command=args.command,
            inputs=args.spec,
            output=args.out,
            seed=args.seed,
            max_states=args.max_states,
            max_horizon=args.max_horizon,
            format=args.format,
            steps=getattr(args, "steps", 64),
            replicates=getattr(args, "replicates", 1000),
        )
    except ChainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    return run(manifest)


if __name__ == "__main__":
    sys.exit(main())
