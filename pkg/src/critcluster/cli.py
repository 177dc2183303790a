"""
Command-line interface: ``critcluster {list,verify,sweep,optimize,galois}``.

Reports are JSON with ``"schema": "critcluster/1"``; sweeps write CSV with
17 significant digits and trailing ``# extremum,kind,param,value`` lines,
plus an optional minimal SVG plot.  Exit codes: 0 success (including
inconclusive analyses), 2 usage error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from . import ball_clusters as bc
from . import cyl_clusters as cc
from . import delta_rotation as dr
from . import galois_probe as gp
from . import min_morse as mm
from . import optimize as opt
from .geom3 import DomainError, cyl_radius_from_distance

SCHEMA = "critcluster/1"
EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
FMT = "{:.17g}"

LINE_CLUSTERS = {
    "c6": "six parallel lines at the equator, D = 1 (saddle)",
    "c6_family": "C6(phi, delta, kappa); needs --params",
    "gamma": "C6 along the curve gamma(x); needs --x (x = 1/2 is the record cluster)",
    "o6": "six lines at the octahedron vertices, D = 1 (rigid maximum)",
    "c4_saddle": "two vertical lines interlaced with two horizontal, D = 1",
    "c4_parallel": "four parallel lines, D = sqrt(2)",
}
BALL_INFO = {
    "I12": "icosahedral 12-ball cluster (global maximum)",
    "A66": "uniform 6-antiprism, 12 points",
    "necklace12": "12 points on the equator",
    "FCC": "face-centred cubic kissing shell",
    "HCP": "hexagonal close-packed kissing shell",
    "T3": "three points on the equator",
    "flex5": "poles plus an equatorial triangle (flexible)",
}


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("CRITCLUSTER_SEED")
    if raw is None:
        return 42
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"CRITCLUSTER_SEED must be an integer, got {raw!r}") from None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def _envelope(command: str, seed: int, tolerances: dict, body: dict) -> dict:
    return {"schema": SCHEMA, "version": __version__, "command": command, "seed": seed,
            "tolerances": tolerances, **body}


def _write_json(doc: dict, path: str | None) -> None:
    text = json.dumps(_jsonable(doc), indent=2)
    if path:
        Path(path).write_text(text + "\n")
        print(path)
    else:
        print(text)


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse {text!r} as a rational number") from None


def _parse_triple(text: str) -> tuple[float, float, float]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"expected three comma-separated numbers, got {text!r}") from None
    if len(vals) != 3:
        raise UsageError(f"expected three comma-separated numbers, got {text!r}")
    return vals


# ------------------------------------------------------------------- list

def registry() -> list[dict]:
    rows = [{"name": k, "kind": "ball", "description": v} for k, v in BALL_INFO.items()]
    rows += [{"name": k, "kind": "line", "description": v} for k, v in LINE_CLUSTERS.items()]
    rows += [{"name": k, "kind": "solid", "description": f"{dr.EDGE_COUNTS[k]} edge lines of the {k}; "
              "turned by --delta"} for k in dr.KINDS]
    return rows


def cmd_list(args) -> int:
    rows = [r for r in registry() if args.kind in (None, r["kind"])]
    if args.json:
        print(json.dumps({"schema": SCHEMA, "version": __version__, "clusters": rows}, indent=2))
    else:
        for r in rows:
            print(f"{r['name']:<14} {r['kind']:<6} {r['description']}")
    return EXIT_OK


# ----------------------------------------------------------------- verify

def line_cluster(name: str, x=None, params=None, delta=None) -> cc.LineCluster:
    if name == "c6":
        return cc.c6_configuration(0.0, 0.0, 0.0)
    if name == "c6_family":
        if params is None:
            raise UsageError("c6_family needs --params phi,delta,kappa")
        return cc.c6_configuration(*params)
    if name == "gamma":
        if x is None:
            raise UsageError("gamma needs --x")
        return cc.gamma_cluster(float(x))
    if name == "o6":
        return cc.o6_configuration()
    if name == "c4_saddle":
        return cc.c4_saddle()
    if name == "c4_parallel":
        return cc.c4_parallel()
    if name in dr.KINDS:
        lines = dr.edge_lines(dr.PlatonicSolid.make(name))
        return dr.rotate_edges(lines, float(delta or 0.0))
    raise KeyError(name)


def _verify_lines(c: cc.LineCluster, args, seed: int) -> dict:
    D = cc.min_distance(c)
    g = cc.contact_graph(c, args.tol)
    out = {"cluster": c.label, "lines": len(c), "D": D,
           "radius": cyl_radius_from_distance(D) if D < 2 else None,
           "contact_graph": {"edges": g.sorted_edges(), "tolerance": g.tolerance}}
    try:
        rep = mm.analyze(mm.bundle_from_line_cluster(cc.off_pole(c), args.tol), seed=seed)
        out["analysis"] = rep.to_dict()
    except DomainError as exc:
        out["analysis"] = {"inconclusive": True, "reason": str(exc)}
    if D > 0:
        pr = opt.perturbation_probe(c, args.probe_samples, args.probe_t, seed)
        out["probe"] = {"samples": args.probe_samples, "t": args.probe_t, "max": pr.max_value,
                        "quartiles": pr.quartiles, "above_base": pr.count_above(D)}
    return out


def _verify_balls(p: bc.BallTouchConfig, args, seed: int) -> dict:
    out = {"cluster": p.label, "points": len(p), "delta": bc.delta(p),
           "radius": bc.touching_radius(p),
           "contact_pairs": bc.contact_pairs(p, args.tol)}
    rep = mm.analyze(mm.bundle_from_ball_config(p, args.tol), seed=seed)
    out["analysis"] = rep.to_dict()
    if rep.null_index_mod_so3 == 1:
        u = bc.unlock_direction(p, args.tol)
        out["unlock"] = {"fixed_points": u.fixed_points, "fixed_count": u.fixed_count,
                         "growth_ok": u.growth_ok, "exponents": u.exponents,
                         "motion": u.motion}
    dec = bc.pl_maximality_probe(p, samples=args.probe_samples // 100 or 8, seed=seed)
    out["probe"] = {"min_ratio": dec.min_ratio, "max_ratio": dec.max_ratio, "exponent": dec.exponent}
    return out


def cmd_verify(args) -> int:
    seed = args.seed
    params = _parse_triple(args.params) if args.params else None
    x = _parse_fraction(args.x) if args.x else None
    if args.cluster in bc.BALL_CLUSTERS:
        body = _verify_balls(bc.named_ball_cluster(args.cluster), args, seed)
    else:
        try:
            c = line_cluster(args.cluster, x, params, args.delta)
        except KeyError:
            raise UsageError(f"unknown cluster {args.cluster!r}; see 'critcluster list'") from None
        except DomainError as exc:
            raise UsageError(str(exc)) from None
        body = _verify_lines(c, args, seed)
    tol = {"contact": args.tol, "rank_rtol": mm.RANK_RTOL, "certificate": mm.CERT_TOL}
    _write_json(_envelope("verify", seed, tol, body), args.report)
    return EXIT_OK


# ------------------------------------------------------------------ sweep

def _csv_text(header, rows, extrema) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([FMT.format(v) for v in r])
    for e in extrema:
        buf.write(f"# extremum,{e[0]},{FMT.format(e[1])},{FMT.format(e[2])}\n")
    return buf.getvalue()


def svg_plot(xs, ys, marks=(), xlabel="parameter", ylabel="d^2", width=640, height=400) -> str:
    """Minimal SVG: axes, one polyline and circles at the marked points."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    pad = 50
    x0, x1 = xs.min(), xs.max()
    y0, y1 = min(ys.min(), 0.0), ys.max()
    sx = lambda v: pad + (v - x0) / ((x1 - x0) or 1) * (width - 2 * pad)  # noqa: E731
    sy = lambda v: height - pad - (v - y0) / ((y1 - y0) or 1) * (height - 2 * pad)  # noqa: E731
    pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(xs, ys))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle">{xlabel}</text>',
        f'<text x="12" y="{height / 2}" transform="rotate(-90 12 {height / 2})" '
        f'text-anchor="middle">{ylabel}</text>',
        f'<text x="{pad}" y="{height - pad + 16}" text-anchor="middle">{x0:.4g}</text>',
        f'<text x="{width - pad}" y="{height - pad + 16}" text-anchor="middle">{x1:.4g}</text>',
        f'<text x="{pad - 6}" y="{sy(y1)}" text-anchor="end">{y1:.4g}</text>',
        f'<polyline fill="none" stroke="steelblue" points="{pts}"/>',
    ]
    parts += [f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="4" fill="crimson"/>' for a, b in marks]
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def sweep_gamma(samples: int):
    """Rows ``(x, phi, delta, kappa, D, r)`` for ``x`` from 1 down to ``1/samples``."""
    xs = np.linspace(1.0, 0.0, samples + 1)[:-1]
    P = opt.gamma_parameters(xs)
    d = opt.family_values(P)
    rows = np.column_stack([xs, P, d, d / (2 - d)])
    k = int(np.argmax(d))
    return rows, [("max", xs[k], d[k])]


def sweep_solid(kind: str, a: float, b: float, samples: int, mirror: bool = False):
    res = dr.sweep(dr.PlatonicSolid.make(kind), a, b, samples, mirror)
    rows = np.column_stack([res.deltas, res.values])
    return rows, [(e.kind, e.delta, e.value) for e in res.extrema]


def cmd_sweep(args) -> int:
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    if args.family:
        if args.family != "gamma":
            raise UsageError(f"unknown family {args.family!r}; only 'gamma' is available")
        rows, ext = sweep_gamma(args.samples)
        header, xcol, ycol, xl = ["x", "phi", "delta", "kappa", "D", "radius"], 0, 4, "x"
    else:
        if args.solid not in dr.KINDS:
            raise UsageError(f"unknown solid {args.solid!r}; known: {', '.join(dr.KINDS)}")
        if not args.to > getattr(args, "from"):
            raise UsageError("--to must exceed --from")
        rows, ext = sweep_solid(args.solid, getattr(args, "from"), args.to, args.samples, args.mirror)
        header, xcol, ycol, xl = ["delta", "D"], 0, 1, "delta"
    text = _csv_text(header, rows, ext)
    if args.out:
        Path(args.out).write_text(text)
        print(args.out)
    else:
        sys.stdout.write(text)
    if args.svg:
        marks = [(e[1], e[2] ** 2) for e in ext]
        Path(args.svg).write_text(svg_plot(rows[:, xcol], rows[:, ycol] ** 2, marks, xl))
        print(args.svg)
    return EXIT_OK


# --------------------------------------------------------------- optimize

def cmd_optimize(args) -> int:
    seed = args.seed
    if args.family:
        if args.family != "c6":
            raise UsageError("only the c6 family is available")
        start = _parse_triple(args.start) if args.start else (0.1, 0.1, -0.05)
        r = opt.ascend_family(start, budget=args.budget, seed=seed)
        body = {"family": "c6", "start": start, "argmax": r.argmax, "value": r.value,
                "radius": cyl_radius_from_distance(r.value), "evaluations": r.evaluations,
                "converged": r.converged, "trace": r.trace}
    elif args.cluster:
        if not args.full:
            raise UsageError("--cluster requires --full")
        try:
            c = line_cluster(args.cluster, _parse_fraction(args.x) if args.x else None)
        except KeyError:
            raise UsageError(f"unknown line cluster {args.cluster!r}") from None
        start_value = cc.min_distance(c)
        r = opt.ascend_full(c, budget=args.budget, seed=seed)
        improved = r.value > start_value + 1e-9
        body = {"cluster": args.cluster, "start_value": start_value, "value": r.value,
                "verdict": "improved" if improved else "no improvement",
                "evaluations": r.evaluations, "converged": r.converged, "restarts": r.restarts,
                "chart": r.argmax.chart_vector(), "trace": r.trace}
    else:
        raise UsageError("give --family c6 or --cluster NAME --full")
    tol = {"min_step": opt.MIN_STEP, "flat": opt.FLAT_TOL}
    _write_json(_envelope("optimize", seed, tol, body), args.report)
    return EXIT_OK


# ----------------------------------------------------------------- galois

def cmd_galois(args) -> int:
    x = _parse_fraction(args.x)
    try:
        rep = gp.sigma_conjugation_check(x, args.den_bound, args.dps)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    body = rep.to_dict()
    body["verdict"] = ("inconclusive" if not rep.conclusive
                       else "symmetric" if rep.symmetric else "not symmetric")
    tol = {"den_bound": args.den_bound, "digits": args.dps}
    _write_json(_envelope("galois", args.seed, tol, body), args.report)
    return EXIT_OK


# ------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="critcluster", description=__doc__.strip().splitlines()[0])
    ap.add_argument("--version", action="version", version=f"critcluster {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list", help="named clusters")
    p.add_argument("--json", action="store_true")
    p.add_argument("--kind", choices=["ball", "line", "solid"])
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("verify", help="criticality report for one cluster")
    p.add_argument("--cluster", required=True)
    p.add_argument("--x", help="curve parameter for gamma, e.g. 1/2")
    p.add_argument("--params", help="phi,delta,kappa for c6_family")
    p.add_argument("--delta", type=float, help="rotation angle for Platonic edge systems")
    p.add_argument("--report", help="output JSON path (default: stdout)")
    p.add_argument("--tol", type=float, default=1e-6, help="contact tolerance")
    p.add_argument("--probe-samples", type=int, default=2000)
    p.add_argument("--probe-t", type=float, default=1e-3)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="D along gamma or a delta-rotation")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--family")
    g.add_argument("--solid")
    p.add_argument("--from", type=float, default=0.0)
    p.add_argument("--to", type=float, default=np.pi / 2)
    p.add_argument("--samples", type=int, default=721)
    p.add_argument("--mirror", action="store_true", help="turn every edge the other way")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("optimize", help="local ascent of D")
    p.add_argument("--family")
    p.add_argument("--start", help="phi,delta,kappa")
    p.add_argument("--cluster")
    p.add_argument("--x")
    p.add_argument("--full", action="store_true")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--report")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("galois", help="sigma-conjugation symmetry of Taylor coefficients")
    p.add_argument("--x", required=True)
    p.add_argument("--den-bound", type=int, default=10**3)
    p.add_argument("--dps", type=int, default=gp.DEFAULT_DPS, help="working decimal digits")
    p.add_argument("--report")
    p.set_defaults(func=cmd_galois)

    for sp in sub.choices.values():
        sp.add_argument("--seed", type=int, default=None)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        if getattr(args, "budget", 0) is None:
            args.budget = 100_000_000 if args.family else 1_000_000
        return args.func(args)
    except UsageError as exc:
        print(f"critcluster: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (np.linalg.LinAlgError, FloatingPointError, DomainError) as exc:
        print(f"critcluster: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
