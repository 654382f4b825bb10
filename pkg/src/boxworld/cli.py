"""Command-line front end: analysis subcommands, CSV/JSON artifacts, run manifests.

Every invocation that writes files also writes a manifest (subcommand,
parameters, seed, version, timestamps) next to them, and each output file
carries its manifest hash, so a result can always be traced to the exact
invocation that produced it.  Exit codes: 0 success, 1 domain error,
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from . import __version__
from .behavior import (
    Scenario,
    behavior_from_json,
    behavior_to_dict,
    behavior_to_json,
    iso,
    maximally_mixed_single,
    validate,
)
from .convexify import BoundCurve, lower_convex_hull
from .extension import generate_extension, minimal_ensembles, nsce, nsce_dim_bound
from .polytope import dimension, nonlocality_cost, vertices
from .privstate import (
    build_omega,
    is_ppt,
    mdi_capacity,
    partial_transpose,
    repeaterless_bound,
    scheme_memory,
    thm1_overhead,
    thm3_overhead,
    thm5_overhead,
    OMEGA_STRICT_GAP_SHIELD_DIM,
)
from .reproduce import (
    FIGURE_IDS,
    CurveBundle,
    iso_grid,
    nsdi_iso_sweep,
    reproduce_mdi_tradeoff,
    reproduce_nsdi_2222,
    reproduce_nsdi_3222_partial,
    reproduce_ppt_overhead,
)
from .secrecy import CdState, IntrinsicConfig, NsqConfig, SquashConfig, ns_norm_cd

SCENARIO_ALIASES = {
    "pm": ((2,), ((2, 2),)),
    "single-binary": ((2,), ((2, 2),)),
    "chsh": ((2, 2), ((2, 2), (2, 2))),
    "2222": ((2, 2), ((2, 2), (2, 2))),
}


@dataclass
class RunManifest:
    """Reproducibility record serialized alongside every artifact."""

    subcommand: str
    parameters: dict
    seed: int
    version: str = __version__
    started: str = ""
    finished: str = ""

    def content_hash(self) -> str:
        payload = json.dumps(
            {"subcommand": self.subcommand, "parameters": self.parameters, "seed": self.seed, "version": self.version},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def parse_scenario(text: str) -> Scenario:
    """Accept an alias (pm, chsh) or the JSON scenario object."""
    if text in SCENARIO_ALIASES:
        return Scenario(*SCENARIO_ALIASES[text])
    data = json.loads(text)
    return Scenario(tuple(data["inputs"]), tuple(tuple(r) for r in data["outputs"]))


def _write_manifest(manifest: RunManifest, out_dir: Path, stem: str) -> Path:
    manifest.finished = _utc_now()
    path = out_dir / f"{stem}.manifest.json"
    path.write_text(json.dumps({**asdict(manifest), "hash": manifest.content_hash()}, indent=2))
    return path


def _write_csv(path: Path, header: list[str], rows: list[tuple], manifest: RunManifest) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# manifest: {manifest.content_hash()}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, payload: dict, manifest: RunManifest) -> None:
    payload = {"manifest": manifest.content_hash(), **payload}
    path.write_text(json.dumps(payload, indent=2))


def _write_bundle(bundle: CurveBundle, out_dir: Path, stem: str, manifest: RunManifest, header3: str = "witness") -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for label, rows in bundle.curves.items():
        width = max(len(r) for r in rows)
        header = ["param", "value"] + [f"extra{i}" for i in range(width - 2)]
        if width == 3:
            header = ["param", "value", header3]
        if width == 4:
            header = ["param", "value", "eta", "theta"]
        path = out_dir / f"{stem}-{label}.csv"
        _write_csv(path, header, rows, manifest)
        written.append(path)
    _write_manifest(manifest, out_dir, stem)
    return written


def _read_curve_csv(path: str) -> BoundCurve:
    xs, ys = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            try:
                x, y = float(parts[0]), float(parts[1])
            except ValueError:
                continue  # header row
            xs.append(x)
            ys.append(y)
    return BoundCurve(xs, ys, label=Path(path).stem)


def _read_cd_json(path: str) -> CdState:
    data = json.loads(Path(path).read_text())
    import numpy as np

    return CdState(np.array(data["table"], dtype=float), tuple(data.get("classical_shape", ())))


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_polytope(args) -> int:
    if args.action == "dim":
        sc = parse_scenario(args.scenario)
        print(dimension(sc))
        return 0
    if args.action == "vertices":
        sc = parse_scenario(args.scenario)
        verts = vertices(sc, cap=args.cap)
        manifest = RunManifest("polytope vertices", {"scenario": args.scenario, "cap": args.cap}, args.seed, started=_utc_now())
        payload = {
            "count": len(verts),
            "vertices": [{"tag": v.tag, **behavior_to_dict(v.behavior)} for v in verts],
        }
        if args.out:
            out = Path(args.out)
            out.parent.mkdir(parents=True, exist_ok=True)
            _write_json(out, payload, manifest)
            _write_manifest(manifest, out.parent, out.stem)
        else:
            print(json.dumps(payload, indent=2))
        return 0
    if args.action == "cost":
        behavior = behavior_from_json(Path(args.behavior).read_text())
        cost = nonlocality_cost(behavior, cap=args.cap)
        print(str(cost))
        return 0
    raise ValueError(f"unknown polytope action {args.action}")


def _load_behavior_arg(args) -> "Behavior":
    if args.behavior == "pm":
        return maximally_mixed_single()
    if args.behavior.startswith("iso:"):
        return iso(Fraction(args.behavior.split(":", 1)[1]))
    return behavior_from_json(Path(args.behavior).read_text())


def _cmd_nsce(args) -> int:
    if args.action == "dim-bound":
        report = nsce_dim_bound(parse_scenario(args.scenario))
        print(json.dumps({
            "base_dim": report.base_dim,
            "base_ambient": report.base_ambient,
            "vertex_bound": str(report.vertex_bound),
            "output_cap": report.output_cap,
            "input_bound": str(report.input_bound),
            "dim_bound": str(report.dim_bound),
        }, indent=2))
        return 0
    base = _load_behavior_arg(args)
    if args.action == "ensembles":
        ensembles = minimal_ensembles(base, cap=args.cap)
        payload = {
            "count": len(ensembles),
            "ensembles": [
                {
                    "vertex_indices": list(e.vertex_indices),
                    "weights": [str(w) for w, _ in e.members],
                }
                for e in ensembles
            ],
        }
        print(json.dumps(payload, indent=2))
        return 0
    if args.action == "build":
        ce = nsce(base, cap=args.cap)
        manifest = RunManifest("nsce build", {"behavior": args.behavior, "cap": args.cap}, args.seed, started=_utc_now())
        payload = {
            "extending_inputs": ce.extension.scenario.inputs_per_party[-1],
            **behavior_to_dict(ce.extension),
        }
        if args.out:
            out = Path(args.out)
            out.parent.mkdir(parents=True, exist_ok=True)
            _write_json(out, payload, manifest)
            _write_manifest(manifest, out.parent, out.stem)
        else:
            print(json.dumps(payload, indent=2))
        return 0
    if args.action == "generate":
        ce = nsce(base, cap=args.cap)
        target = behavior_from_json(Path(args.extension).read_text())
        res = generate_extension(ce, target)
        print(json.dumps({"feasible": res.feasible, "infeasible_input": res.infeasible_input}))
        return 0 if res.feasible else 1
    raise ValueError(f"unknown nsce action {args.action}")


def _cmd_squash(args) -> int:
    cfg = NsqConfig(
        intrinsic=IntrinsicConfig(restarts=args.restarts, seed=args.seed),
        squash=SquashConfig(mixture_denominator=args.mixture_denominator),
    )
    if args.family == "iso":
        grid = iso_grid(args.grid)
        if args.quantifier == "intrinsic":
            bundle = nsdi_iso_sweep(grid, cfg)
            bundle.curves = {"squashed_nonlocality": bundle.curves["squashed_nonlocality"]}
        else:
            from .extension import nsce as _nsce
            from .secrecy import squash as _squash, squashed_quantifier, snap_small

            q = squashed_quantifier(args.quantifier)
            rows = []
            for eps in grid:
                ce = _nsce(iso(eps))
                res = _squash(q, ce.extension, cfg.squash)
                rows.append((float(eps), snap_small(res.value), f"x={res.x};y={res.y};{res.strategy_kind}"))
            bundle = CurveBundle()
            bundle.add(f"squashed_{args.quantifier}", rows)
    else:
        from .secrecy import squashed_nonlocality, squash as _squash, squashed_quantifier, snap_small

        behavior = _load_behavior_arg(args)
        ce = nsce(behavior)
        if args.quantifier == "intrinsic":
            res = squashed_nonlocality(behavior, cfg, ce=ce)
            rows = [(0.0, snap_small(res.value), f"x={res.x};y={res.y};{res.strategy_kind}")]
        else:
            r = _squash(squashed_quantifier(args.quantifier), ce.extension, cfg.squash)
            rows = [(0.0, snap_small(r.value), f"x={r.x};y={r.y};{r.strategy_kind}")]
        bundle = CurveBundle()
        bundle.add(f"squashed_{args.quantifier}", rows)
    manifest = RunManifest(
        "squash",
        {
            "quantifier": args.quantifier,
            "family": args.family,
            "behavior": args.behavior,
            "grid": args.grid,
            "restarts": args.restarts,
            "mixture_denominator": args.mixture_denominator,
        },
        args.seed,
        started=_utc_now(),
    )
    out_dir = Path(args.out_dir)
    written = _write_bundle(bundle, out_dir, f"squash-{args.quantifier}", manifest)
    for path in written:
        print(path)
    return 0


def _cmd_norm(args) -> int:
    p1 = _read_cd_json(args.p1)
    p2 = _read_cd_json(args.p2)
    print(ns_norm_cd(p1, p2))
    return 0


def _cmd_convexify(args) -> int:
    curves = [_read_curve_csv(p) for p in args.inputs]
    hull = lower_convex_hull(curves)
    manifest = RunManifest("convexify", {"inputs": list(args.inputs)}, args.seed, started=_utc_now())
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_csv(out, ["param", "value"], list(zip(hull.grid.tolist(), hull.values.tolist())), manifest)
    _write_manifest(manifest, out.parent, out.stem)
    print(out)
    return 0


def _cmd_privstate(args) -> int:
    if args.action == "overhead":
        m_total = args.memory if args.memory is not None else scheme_memory(args.dk, args.ds, args.delta)
        if args.thm == 1:
            value = thm1_overhead(args.dk, args.ds, args.theta, args.delta)
            payload = {"theorem": 1, "v_bound": value, "theta": args.theta, "memory": m_total}
        elif args.thm == 3:
            res = thm3_overhead(args.dk, args.ds, args.eps, m_total)
            payload = {"theorem": 3, "v_bound": res.v_bound, "theta": res.theta, "eta": res.eta, "memory": m_total}
        else:
            dim_h = args.dim_h if args.dim_h is not None else (args.dk * args.ds) ** 2
            res = thm5_overhead(args.dk, args.ds, args.eps, m_total, dim_h)
            payload = {"theorem": 5, "v_bound": res.v_bound, "theta": res.theta, "eta": res.eta, "memory": m_total}
        print(json.dumps(payload, indent=2))
        return 0
    if args.action == "omega":
        op = build_omega(args.ds)
        payload = {
            "shield_dim": args.ds,
            "size": op.size,
            "trace": op.trace().real,
            "documented_strict_gap_case": args.ds == OMEGA_STRICT_GAP_SHIELD_DIM,
        }
        if args.check_ppt:
            payload["ppt"] = bool(is_ppt(op))
            payload["min_pt_eigenvalue"] = partial_transpose(op, (1, 3)).min_eigenvalue()
        print(json.dumps(payload, indent=2))
        return 0
    raise ValueError(f"unknown privstate action {args.action}")


def _cmd_mdi(args) -> int:
    if args.distance_km is not None:
        import math

        eta = math.exp(-args.alpha * args.distance_km)
        eta1 = eta2 = eta
    else:
        eta1, eta2 = args.eta1, args.eta2
    payload = {
        "capacity": mdi_capacity(args.q, eta1, eta2),
        "repeaterless_bound": repeaterless_bound(eta1, eta2),
        "eta1": eta1,
        "eta2": eta2,
        "q": args.q,
    }
    print(json.dumps(payload, indent=2))
    return 0


def _cmd_reproduce(args) -> int:
    manifest = RunManifest(
        "reproduce",
        {"figure": args.figure, "grid": args.grid, "overlays": list(args.overlay or [])},
        args.seed,
        started=_utc_now(),
    )
    if args.figure == "nsdi-2222":
        cfg = NsqConfig(intrinsic=IntrinsicConfig(restarts=args.restarts, seed=args.seed))
        bundle = reproduce_nsdi_2222(args.grid, cfg)
    elif args.figure == "nsdi-3222-partial":
        if not args.family:
            raise ValueError(
                "nsdi-3222-partial needs --family FILE: a JSON list of {parameter, behavior} pairs "
                "(the device family and any protocol overlays are external inputs)"
            )
        entries = json.loads(Path(args.family).read_text())
        family = [(e["parameter"], behavior_from_json(json.dumps(e["behavior"]))) for e in entries]
        overlays = [_read_curve_csv(p) for p in (args.overlay or [])]
        bundle = reproduce_nsdi_3222_partial(family, overlays)
    elif args.figure == "ppt-overhead":
        bundle = reproduce_ppt_overhead()
    elif args.figure == "mdi-tradeoff":
        bundle = reproduce_mdi_tradeoff()
    else:
        raise ValueError(f"unknown figure id {args.figure!r}; expected one of {FIGURE_IDS}")
    written = _write_bundle(bundle, Path(args.out_dir), args.figure, manifest)
    for path in written:
        print(path)
    return 0


def _cmd_validate(args) -> int:
    behavior = behavior_from_json(Path(args.behavior).read_text())
    report = validate(behavior)
    print(json.dumps({"ok": report.ok, "violations": list(report.violations)}, indent=2))
    return 0 if report.ok else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boxworld", description=__doc__)
    parser.add_argument("--seed", type=int, default=0, help="seed for stochastic searches")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("polytope", help="dimension, vertex enumeration, nonlocality cost")
    p.add_argument("action", choices=["dim", "vertices", "cost"])
    p.add_argument("--scenario", default="chsh")
    p.add_argument("--behavior", help="behavior JSON file (for cost)")
    p.add_argument("--cap", type=int, default=64)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_polytope)

    p = sub.add_parser("nsce", help="minimal ensembles and complete extensions")
    p.add_argument("action", choices=["build", "ensembles", "dim-bound", "generate"])
    p.add_argument("--behavior", default="pm", help="behavior JSON file, 'pm', or 'iso:FRACTION'")
    p.add_argument("--scenario", default="pm", help="scenario (for dim-bound)")
    p.add_argument("--extension", help="target extension JSON file (for generate)")
    p.add_argument("--cap", type=int, default=64)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_nsce)

    p = sub.add_parser("squash", help="squashed secrecy quantifier sweeps")
    p.add_argument("--quantifier", choices=["intrinsic", "cmi", "mi"], default="intrinsic")
    p.add_argument("--behavior", default="pm")
    p.add_argument("--family", choices=["iso", "none"], default="none")
    p.add_argument("--grid", type=int, default=21)
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--mixture-denominator", type=int, default=16)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(fn=_cmd_squash)

    p = sub.add_parser("norm", help="device-norm distance between two c-d states")
    p.add_argument("--p1", required=True)
    p.add_argument("--p2", required=True)
    p.set_defaults(fn=_cmd_norm)

    p = sub.add_parser("convexify", help="lower convex hull of bound curves")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_convexify)

    p = sub.add_parser("privstate", help="private-state bounds and constructions")
    p.add_argument("action", choices=["overhead", "omega"])
    p.add_argument("--thm", type=int, choices=[1, 3, 5], default=1)
    p.add_argument("--dk", type=int, default=2)
    p.add_argument("--ds", type=int, default=2)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--delta", type=int, default=1)
    p.add_argument("--memory", type=float, default=None, help="total memory M (default Δ·log2(dk·ds))")
    p.add_argument("--dim-h", type=float, default=None)
    p.add_argument("--check-ppt", action="store_true")
    p.set_defaults(fn=_cmd_privstate)

    p = sub.add_parser("mdi", help="relay capacity versus the repeaterless bound")
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--eta1", type=float, default=1.0)
    p.add_argument("--eta2", type=float, default=1.0)
    p.add_argument("--distance-km", type=float, default=None)
    p.add_argument("--alpha", type=float, default=1.0 / 22.0, help="attenuation per km")
    p.set_defaults(fn=_cmd_mdi)

    p = sub.add_parser("reproduce", help="emit the data bundle behind a figure")
    p.add_argument("figure", choices=list(FIGURE_IDS))
    p.add_argument("--grid", type=int, default=21)
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--family", help="device family JSON (external input)")
    p.add_argument("--overlay", nargs="*", help="overlay curve CSVs (external input)")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(fn=_cmd_reproduce)

    p = sub.add_parser("validate", help="validate a behavior JSON file")
    p.add_argument("--behavior", required=True)
    p.set_defaults(fn=_cmd_validate)

    return parser


def run(argv: list[str] | None = None) -> int:
    """Entry point returning the exit code (0 ok, 1 domain error, 2 usage)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
