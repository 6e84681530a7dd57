"""Command-line entry point.

Every command reads a graph from a JSON file (or ``preset:<name>``) and
writes JSON / CSV artifacts. Exit codes: 0 ok, 2 parse error,
3 unbalanced graph where balance is required, 4 numerical failure,
5 divergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .controllability import certify_inaccessibility, empirical_invariance_probe, linearized_controllability
from .dynamics import FLOW_KINDS, NONLINEARITIES, FlowSystem, Trajectory, input_from_config, integrate
from .errors import GraphError, SignedFlowError, UnbalancedGraphError
from .io import dumps, load_graph, read_json, write_json
from .koopman import recover_bipartition, validate_against_gauge
from .presets import KURAMOTO_WINDOWS, KURAMOTO_X0, PRESETS
from .signed_graph import SignedGraph, check_structural_balance
from .symmetry import MAX_EXHAUSTIVE_NODES, find_automorphisms, fixed_points, preserves_edge_signs, preserves_gauge

COMMANDS = ("balance", "symmetry", "simulate", "controllability", "edmd", "pipeline")


@dataclass
class RunConfig:
    command: str = "pipeline"
    graph_path: str = "preset:kuramoto-six"
    flow: str = "relative"
    f: str = "sin"
    x0: list[float] | None = field(default_factory=lambda: KURAMOTO_X0.tolist())
    dt: float = 0.1
    T: float = 10.0
    windows: list[tuple[float, float]] = field(default_factory=lambda: [tuple(w) for w in KURAMOTO_WINDOWS])
    order: int = 2
    reg: float = 0.0
    output_dir: str = "run"
    seed: int = 0

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise GraphError(f"unknown command {self.command!r}")
        if not self.graph_path.startswith("preset:") and not Path(self.graph_path).exists():
            raise GraphError(f"graph file {self.graph_path} does not exist")
        if not self.dt > 0:
            raise GraphError("dt must be positive")
        if not self.T >= self.dt:
            raise GraphError("T must be at least dt")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise GraphError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        if cfg.windows is not None:
            cfg.windows = [tuple(map(float, w)) for w in cfg.windows]
        return cfg


def resolve_graph(spec: str) -> SignedGraph:
    if spec.startswith("preset:"):
        name = spec.split(":", 1)[1]
        if name not in PRESETS:
            raise GraphError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        return PRESETS[name]
    return load_graph(spec)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise GraphError(f"expected comma-separated numbers, got {text!r}") from None


def _window(text: str) -> tuple[float, float]:
    vals = _floats(text)
    if len(vals) != 2:
        raise GraphError(f"window must be 'a,b', got {text!r}")
    return vals[0], vals[1]


def _emit(doc, out: str | None) -> None:
    text = dumps(doc)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def _initial_state(n: int, x0: list[float] | None, seed: int) -> np.ndarray:
    if x0 is not None:
        x = np.asarray(x0, dtype=float)
        if x.shape != (n,):
            raise GraphError(f"x0 has {x.size} entries, graph has {n} nodes")
        return x
    return np.random.default_rng(seed).normal(size=n)


def cmd_balance(args) -> int:
    g = resolve_graph(args.graph)
    cert = check_structural_balance(g)
    _emit(cert.to_dict(), args.out)
    return 0 if cert.balanced else UnbalancedGraphError.exit_code


def cmd_symmetry(args) -> int:
    g = resolve_graph(args.graph)
    cert = check_structural_balance(g)
    perms = find_automorphisms(g, limit=args.max_autos, allow_large=args.allow_large)
    autos = []
    for p in perms:
        entry = {"map": list(p.map), "fixed_points": sorted(fixed_points(p)), "preserves_edge_signs": preserves_edge_signs(g, p)}
        if cert.balanced:
            entry["sigma"] = list(cert.gauge.sigma)
            entry["preserves_gauge"] = preserves_gauge(p, cert.gauge)
        autos.append(entry)
    _emit({"n": g.n, "balanced": cert.balanced, "count": len(autos), "automorphisms": autos}, args.out)
    return 0


def cmd_simulate(args) -> int:
    g = resolve_graph(args.graph)
    b = _floats(args.b) if args.b else None
    sys_ = FlowSystem(g, args.flow, args.f, leader=args.leader, b=b)
    x0 = _initial_state(g.n, _floats(args.x0) if args.x0 else None, args.seed)
    u = input_from_config(read_json(args.input) if args.input else None)
    traj = integrate(sys_, x0, args.dt, args.T, u)
    traj.to_csv(args.out)
    sys.stdout.write(f"wrote {len(traj)} samples to {args.out}\n")
    return 0


def cmd_controllability(args) -> int:
    g = resolve_graph(args.graph)
    cert = certify_inaccessibility(g, args.flow, args.f, args.leader)
    balance = check_structural_balance(g)
    doc = {"balanced": balance.balanced, "certificate": cert.to_dict() if cert else None}
    if cert is None:
        doc["note"] = "no certificate found; this is not a proof of controllability"
    sys_ = FlowSystem(g, args.flow, args.f, leader=args.leader)
    doc["linearized"] = linearized_controllability(sys_).to_dict()
    if args.probe and cert is not None:
        dev = empirical_invariance_probe(sys_, cert, args.seed, args.T, args.dt)
        doc["probe"] = {"seed": args.seed, "T": args.T, "dt": args.dt, "max_deviation": dev}
    _emit(doc, args.out)
    return 0


def cmd_edmd(args) -> int:
    traj = Trajectory.from_csv(args.traj)
    window = _window(args.window) if args.window else None
    result, zm, est = recover_bipartition(traj, window, args.order, args.reg)
    doc = result.to_dict()
    doc.update({
        "window": list(window) if window else [float(traj.times[0]), float(traj.times[-1])],
        "zero_mode": {"eigenvalue": [zm.eigenvalue.real, zm.eigenvalue.imag], "vector": zm.mode.tolist()},
        "bipartition": est.to_dict(),
    })
    if args.graph:
        doc["gauge_match"] = validate_against_gauge(est, check_structural_balance(resolve_graph(args.graph)))
    if args.modes_out:
        keep = result.retained
        header = ",".join(["re_mu", "im_mu"] + [f"re_v{i}" for i in range(1, traj.n + 1)] + [f"im_v{i}" for i in range(1, traj.n + 1)])
        rows = np.column_stack([result.eigenvalues[keep].real, result.eigenvalues[keep].imag, result.modes[keep].real, result.modes[keep].imag])
        np.savetxt(args.modes_out, rows, delimiter=",", fmt="%.17g", header=header, comments="")
    _emit(doc, args.out)
    return 0


def run(config: RunConfig) -> dict:
    """Graph, balance, simulation and windowed EDMD; writes artifacts to ``output_dir``."""
    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    g = resolve_graph(config.graph_path)
    write_json(out / "graph.json", g.to_dict())
    cert = check_structural_balance(g)
    write_json(out / "balance.json", cert.to_dict())
    if not cert.balanced:
        raise UnbalancedGraphError(f"pipeline needs a balanced graph; negative cycle {cert.witness_cycle}")
    x0 = _initial_state(g.n, config.x0, config.seed)
    traj = integrate(FlowSystem(g, config.flow, config.f), x0, config.dt, config.T)
    traj.to_csv(out / "trajectory.csv")
    windows = []
    for k, w in enumerate(config.windows or [(0.0, config.T)], start=1):
        result, zm, est = recover_bipartition(traj, w, config.order, config.reg)
        entry = {
            "window": list(w),
            "eigenvalue": [zm.eigenvalue.real, zm.eigenvalue.imag],
            "eigenvalue_gap": est.eigenvalue_gap,
            "zero_mode": zm.mode.tolist(),
            "signs": list(est.signs),
            "gauge_match": validate_against_gauge(est, cert),
            "residual": result.residual,
            "gram_rank": result.gram_rank,
        }
        write_json(out / f"edmd_window{k}.json", {**result.to_dict(), **entry})
        windows.append(entry)
    report = {
        # the output location is left out so reruns elsewhere hash identically
        "config": {k: v for k, v in dataclasses.asdict(config).items() if k != "output_dir"},
        "n": g.n,
        "sigma": list(cert.gauge.sigma),
        "partition": [list(p) for p in cert.partition],
        "x0": x0.tolist(),
        "final_state": traj.states[-1].tolist(),
        "windows": windows,
        "signs": windows[0]["signs"],
        "gauge_match": all(w["gauge_match"] for w in windows),
    }
    write_json(out / "report.json", report)
    return report


def cmd_pipeline(args) -> int:
    cfg = RunConfig.from_dict(read_json(args.config)) if args.config else RunConfig()
    overrides = {
        "graph_path": args.graph, "flow": args.flow, "f": args.f, "dt": args.dt, "T": args.T,
        "order": args.order, "reg": args.reg, "output_dir": args.output_dir, "seed": args.seed,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    if args.x0:
        cfg.x0 = _floats(args.x0)
    elif args.random_x0:
        cfg.x0 = None
    if args.window:
        cfg.windows = [_window(w) for w in args.window]
    report = run(cfg)
    summary = {k: report[k] for k in ("signs", "gauge_match", "sigma")}
    summary["windows"] = [{k: w[k] for k in ("window", "eigenvalue_gap", "signs", "gauge_match")} for w in report["windows"]]
    sys.stdout.write(dumps(summary))
    return 0


def output_digest(directory) -> str:
    """SHA-256 over every file in ``directory`` (sorted by name)."""
    h = hashlib.sha256()
    for path in sorted(Path(directory).iterdir()):
        if path.is_file():
            h.update(path.name.encode())
            h.update(path.read_bytes())
    return h.hexdigest()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="signedflow", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def graph_arg(sp, required=True):
        sp.add_argument("--graph", required=required, help="graph JSON file or preset:<name>")

    def flow_args(sp):
        sp.add_argument("--flow", choices=FLOW_KINDS, default="relative")
        sp.add_argument("--f", choices=sorted(NONLINEARITIES), default="tanh")

    sp = sub.add_parser("balance", help="structural-balance certificate")
    graph_arg(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_balance)

    sp = sub.add_parser("symmetry", help="enumerate automorphisms")
    graph_arg(sp)
    sp.add_argument("--max-autos", type=int, default=None)
    sp.add_argument("--allow-large", action="store_true", help=f"search graphs above {MAX_EXHAUSTIVE_NODES} nodes")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_symmetry)

    sp = sub.add_parser("simulate", help="integrate a flow and write a trajectory CSV")
    graph_arg(sp)
    flow_args(sp)
    sp.add_argument("--x0", help="comma-separated initial state (default: seeded normal draw)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dt", type=float, default=0.01)
    sp.add_argument("--T", type=float, default=10.0)
    sp.add_argument("--leader", type=int)
    sp.add_argument("--b", help="comma-separated additive input vector")
    sp.add_argument("--input", help="JSON input-signal spec")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("controllability", help="symmetry certificate and invariance probe")
    graph_arg(sp)
    flow_args(sp)
    sp.add_argument("--leader", type=int, required=True)
    sp.add_argument("--probe", action="store_true")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--T", type=float, default=10.0)
    sp.add_argument("--dt", type=float, default=0.01)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_controllability)

    sp = sub.add_parser("edmd", help="EDMD fit and bipartition from a trajectory CSV")
    sp.add_argument("--traj", required=True)
    sp.add_argument("--window", help="a,b")
    sp.add_argument("--order", type=int, default=2)
    sp.add_argument("--reg", type=float, default=0.0)
    graph_arg(sp, required=False)
    sp.add_argument("--modes-out")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_edmd)

    sp = sub.add_parser("pipeline", help="balance, simulate, EDMD and validate end to end")
    sp.add_argument("--config", help="JSON run config; flags override it")
    sp.add_argument("--graph")
    sp.add_argument("--flow", choices=FLOW_KINDS)
    sp.add_argument("--f", choices=sorted(NONLINEARITIES))
    sp.add_argument("--x0")
    sp.add_argument("--random-x0", action="store_true", help="draw x0 from --seed instead of the config")
    sp.add_argument("--dt", type=float)
    sp.add_argument("--T", type=float)
    sp.add_argument("--window", action="append", help="a,b; repeat for several windows")
    sp.add_argument("--order", type=int)
    sp.add_argument("--reg", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--output-dir", dest="output_dir")
    sp.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SignedFlowError as exc:
        sys.stderr.write(f"signedflow {args.command}: {exc}\n")
        return exc.exit_code
    except (ValueError, KeyError, TypeError) as exc:
        sys.stderr.write(f"signedflow {args.command}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
