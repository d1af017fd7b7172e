"""Command-line driver tying the library together.

Subcommands
-----------
build       construct a plat embedding and write it as curve JSON
distortion  sampled estimate or certified interval for a curve file
bounds      closed-form invariants and bound values for one (b, n, t)
verify      strand-shape checks behind the builder's geometry
sweep       one CSV row per bridge index b, with n = 4b(b-2)+1

Exit codes: 0 success; 2 bad input or violated precondition; 3 the
certified engine ran out of budget (the partial certificate is still
printed); 4 internal failure.  The environment variable KDL_BUDGET,
when set, overrides the bisection budget of every certified run.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

from .bounds import make_report
from .distortion import distortion_certified, distortion_sampled
from .errors import KdlError
from .geom import PolyCurve, curve_from_json, save_curve
from .plat import build_plat, make_uniform_jm_spec, run_claim_checks

_DEFAULT_BUDGET = 5_000_000


def _budget(flag_value: int | None) -> int:
    env = os.environ.get("KDL_BUDGET")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise KdlError(f"KDL_BUDGET must be an integer, got {env!r}")
    if flag_value is not None:
        return flag_value
    return _DEFAULT_BUDGET


def _load_curve(path: str) -> PolyCurve:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise KdlError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise KdlError(f"{path} is not valid curve JSON: {exc}")
    return curve_from_json(data)


def _write_obj(path: str, curve: PolyCurve) -> None:
    m = curve.m
    with open(path, "w") as fh:
        fh.write(f"# closed polyline, {m} vertices\n")
        for v in curve.vertices:
            fh.write(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
        loop = " ".join(str(i) for i in range(1, m + 1))
        fh.write(f"l {loop} 1\n")


def cmd_build(args: argparse.Namespace) -> int:
    spec = make_uniform_jm_spec(args.b, args.n, args.t)
    curve = build_plat(spec, samples_per_half_twist=args.samples)
    save_curve(curve, args.out)
    if args.obj:
        _write_obj(args.obj, curve)
    kinds = [a.kind for a in curve.arcs]
    print(
        f"wrote {args.out}: {curve.m} vertices, length {curve.total_len:.3f}, "
        f"arcs {kinds.count('bridge')} bridge / {kinds.count('vertical')} vertical / "
        f"{kinds.count('twist')} twist"
    )
    return 0


def cmd_distortion(args: argparse.Namespace) -> int:
    curve = _load_curve(args.curve)
    if args.mode == "sampled":
        w = distortion_sampled(curve, n_samples=args.samples)
        print(
            json.dumps(
                {"mode": "sampled", "n_samples": args.samples, "witness": w.to_json()}
            )
        )
        return 0
    cert = distortion_certified(
        curve, eps=args.eps, max_expansions=_budget(args.budget)
    )
    print(json.dumps({"mode": "certified", **cert.to_json()}))
    return 3 if cert.budget_exceeded else 0


def cmd_bounds(args: argparse.Namespace) -> int:
    spec = make_uniform_jm_spec(args.b, args.n, args.t)
    curve = _load_curve(args.curve) if args.curve else None
    report = make_report(spec, curve, representativity=args.representativity)
    print(json.dumps(report.to_json()))
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    results = run_claim_checks(t=args.t, samples=args.samples)
    ok = True
    for r in results:
        if r["passed"]:
            print(f"PASS {r['name']}: max ratio {r['ratio']:.4f} <= {r['bound']:.4f}")
        else:
            ok = False
            line = f"FAIL {r['name']}: max ratio {r['ratio']:.4f} > {r['bound']:.4f}"
            if r["witness"] is not None:
                p, q = r["witness"]
                line += f"; witness pair {tuple(p)} -- {tuple(q)}"
            print(line)
    return 0 if ok else 4


_SWEEP_COLUMNS = [
    "b",
    "n",
    "t",
    "d",
    "lower_bound",
    "pardon_bound",
    "sampled_delta",
    "certified_lo",
    "certified_hi",
    "upper_bound",
    "alpha",
    "L",
    "runtime_ms",
]

# above this, certified runs leave desk scale; --certified overrides
_SWEEP_CERTIFIED_MAX_B = 4


def _sweep_row(b: int, t: int, eps: float, samples: int, certified: bool) -> dict:
    started = time.perf_counter()
    n = 4 * b * (b - 2) + 1
    spec = make_uniform_jm_spec(b, n, t)
    curve = build_plat(spec, samples_per_half_twist=samples)
    report = make_report(spec, curve)
    sampled = distortion_sampled(curve)
    row = {
        "b": b,
        "n": n,
        "t": t,
        "d": report.d,
        "lower_bound": report.lower_bound,
        "pardon_bound": report.pardon_bound,
        "sampled_delta": sampled.ratio,
        "certified_lo": "",
        "certified_hi": "",
        "upper_bound": report.upper_bound,
        "alpha": report.alpha,
        "L": curve.total_len,
    }
    if certified or b <= _SWEEP_CERTIFIED_MAX_B:
        cert = distortion_certified(curve, eps=eps, max_expansions=_budget(None))
        row["certified_lo"] = cert.lo
        row["certified_hi"] = cert.hi
    row["runtime_ms"] = int(round(1000.0 * (time.perf_counter() - started)))
    return row


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.b_min > args.b_max:
        raise KdlError(f"empty sweep: b-min {args.b_min} > b-max {args.b_max}")
    rows = []
    for b in range(args.b_min, args.b_max + 1):
        row = _sweep_row(b, args.t, args.eps, args.samples, args.certified)
        rows.append(row)
        print(f"b={b} done in {row['runtime_ms']} ms", file=sys.stderr)

    def fmt(v):
        return repr(v) if isinstance(v, float) else v

    out = open(args.csv, "w", newline="") if args.csv else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=_SWEEP_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: fmt(v) for k, v in row.items()})
    finally:
        if args.csv:
            out.close()
            print(f"wrote {args.csv} ({len(rows)} rows)")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kdl", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a plat embedding, write curve JSON")
    p.add_argument("--b", type=int, required=True, help="bridge index (>= 3)")
    p.add_argument("--n", type=int, required=True, help="row count (odd, >= 4b(b-2))")
    p.add_argument("--t", type=int, required=True, help="half-twists per region (>= 3)")
    p.add_argument("--samples", type=int, default=16, help="segments per half-twist")
    p.add_argument("--out", required=True, help="output curve JSON path")
    p.add_argument("--obj", help="also write a Wavefront OBJ polyline here")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("distortion", help="measure distortion of a curve file")
    p.add_argument("--curve", required=True, help="curve JSON path")
    p.add_argument("--mode", choices=("certified", "sampled"), default="certified")
    p.add_argument("--eps", type=float, default=1e-2, help="certified interval width")
    p.add_argument("--samples", type=int, default=1024, help="sampled mode: extra parameters")
    p.add_argument("--budget", type=int, default=None, help="certified mode: bisection cap")
    p.set_defaults(func=cmd_distortion)

    p = sub.add_parser("bounds", help="closed-form bound report for one (b, n, t)")
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--curve", help="measured curve JSON: adds alpha and upper_bound")
    p.add_argument("--representativity", type=int, default=2)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="run the strand-shape checks")
    p.add_argument("--t", type=int, required=True, help="half-twists per region")
    p.add_argument("--samples", type=int, default=64, help="segments per half-twist")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="bounds vs measured distortion, one row per b")
    p.add_argument("--b-min", type=int, required=True)
    p.add_argument("--b-max", type=int, required=True)
    p.add_argument("--t", type=int, default=3)
    p.add_argument("--eps", type=float, default=0.05, help="certified interval width")
    p.add_argument("--samples", type=int, default=16, help="segments per half-twist")
    p.add_argument("--csv", help="output path (default: stdout)")
    p.add_argument(
        "--certified",
        action="store_true",
        help=f"certify every row, not only b <= {_SWEEP_CERTIFIED_MAX_B}",
    )
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports, we return
        return int(exc.code or 0)
    try:
        return args.func(args)
    except KdlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # never let a traceback be the interface
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 4


def entry() -> None:
    raise SystemExit(main())
