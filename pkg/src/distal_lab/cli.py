"""Command-line driver: simulate, scan, probe, and run reproducible presets.

All CSV output uses '.' decimals, LF line endings and a header row; float
cells are written with repr (shortest round-trip), so a repeated run of any
preset reproduces its artifacts byte for byte.  Each preset run also writes
a manifest (config hash, package version, wall time); the manifest carries
the only non-deterministic field (the wall time) and is excluded from
byte-reproducibility claims.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from . import cocycle as cocyclemod
from . import disjoint, ergodic, flows, interp, presets, relations
from .errors import DistalLabError
from .torus import Frac128, TorusPoint, continued_fraction, named_angle


def _apply_thread_cap():
    cap = os.environ.get("DISTAL_LAB_THREADS")
    if not cap:
        return
    try:
        n = max(1, int(cap))
    except ValueError:
        return
    try:  # kernels are single-threaded by design; this caps numba's pool anyway
        import numba
        numba.set_num_threads(min(n, numba.get_num_threads()))
    except Exception:
        pass


def _angle_from_arg(text: str):
    text = text.strip()
    if text[:1].isdigit() or text.startswith("."):
        return continued_fraction(text if text.startswith("0.") else "0." + text.lstrip("."), K=8)
    return named_angle(text)


def _point_from_arg(text: str, dim: int) -> TorusPoint:
    if not text:
        return TorusPoint.zero(dim)
    parts = text.split(",")
    if len(parts) != dim:
        raise DistalLabError(f"x0 needs {dim} comma-separated coordinates")
    coords = []
    for p in parts:
        p = p.strip()
        coords.append(Frac128.from_hex(p) if len(p) == 32 and not p.startswith("0.")
                      else Frac128.from_float(float(p)))
    return TorusPoint(tuple(coords))


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(c) for c in row) + "\n")


def _write_json(path: Path, data) -> None:
    with path.open("w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    flow = flows.flow_from_json(json.loads(Path(args.flow).read_text()))
    x0 = _point_from_arg(args.x0, flow.dim)
    report = flows.density_probe(flow, x0, args.steps, args.grid)
    em = ergodic.empirical_measure(flow, x0, args.steps, args.grid)
    out = Path(args.out)
    rows = [[i, int(c)] for i, c in enumerate(em.counts)]
    _write_csv(out, ["cell", "count"], rows)
    print(json.dumps({"coverage": report.coverage,
                      "largest_empty_cluster": report.largest_empty_cluster,
                      "out": str(out)}))
    return 0


def cmd_cocycle(args) -> int:
    angle = _angle_from_arg(args.angle)
    indices = tuple(int(i) for i in args.indices.split(",")) if args.indices else None
    c = cocyclemod.build_cocycle(angle, args.terms, coeff_rule=args.rule, indices=indices)
    if args.action == "build":
        print(json.dumps(c.to_json()))
        return 0
    if args.action == "eq1":
        f = {int(args.freq): 1.0}
        r = cocyclemod.residual_eq1(c, f, args.power)
        print(json.dumps({"j": args.freq, "m": args.power, "sup_residual": r}))
        return 0
    if args.action == "eq2":
        s = cocyclemod.residual_eq2(c, K=args.truncation if args.truncation else len(c.terms),
                                    n=args.power, samples=args.samples)
        print(json.dumps({"max": s.max, "median": s.median, "mean": s.mean}))
        return 0
    raise DistalLabError(f"unknown cocycle action {args.action}")


def cmd_scan(args) -> int:
    flow = flows.flow_from_json(json.loads(Path(args.flow).read_text()))
    x0 = _point_from_arg(args.x0, flow.dim)
    scales_a = [int(s) for s in args.scales_a.split(",")]
    scales_b = [int(s) for s in args.scales_b.split(",")]
    if args.f_dict == "chars50":
        if flow.dim == 1:
            mvecs = [(j,) for j in range(1, ergodic.DICT_MAX_FREQ + 1)]
        else:
            mvecs = list(presets.SCAN_CHARACTERS)
    else:
        mvecs = [tuple(int(v) for v in spec.split(":")) for spec in args.f_dict.split(";")]
    reports = ergodic.scan_dictionary(flow, x0, mvecs, scales_a, scales_b)
    best = max(reports, key=lambda r: r.gap)
    rows = []
    for rep in reports:
        avgs = {e.scale: e.value for e in rep.estimates}
        for i in range(max(len(scales_a), len(scales_b))):
            sa = scales_a[min(i, len(scales_a) - 1)]
            sb = scales_b[min(i, len(scales_b) - 1)]
            rows.append([rep.f_id, sa, repr(avgs[sa].real), repr(avgs[sa].imag),
                         sb, repr(avgs[sb].real), repr(avgs[sb].imag),
                         repr(abs(avgs[sa] - avgs[sb]))])
    _write_csv(Path(args.out), ["f_id", "scaleA", "avgA_re", "avgA_im",
                                "scaleB", "avgB_re", "avgB_im", "gap"], rows)
    control = ergodic.control_gap(scales_a, scales_b)
    print(json.dumps({"best_f": best.f_id, "gap": best.gap, "control": control,
                      "divergent": best.gap > ergodic.DIVERGENCE_FACTOR * control}))
    return 0


def cmd_disjoint(args) -> int:
    angles = [_angle_from_arg(a) for a in args.angles.split(",")]
    if args.cross_validate:
        n, m = (int(v) for v in args.cross_validate.split(","))
        cv = disjoint.cross_validate(angles, n=n, m=m,
                                     max_coeff=args.max_coeff, digits=args.digits)
        print(json.dumps(cv.to_json()))
        return 0 if cv.agree else 1
    verdict = disjoint.rotation_family_verdict(angles, max_coeff=args.max_coeff,
                                               digits=args.digits)
    print(json.dumps(verdict.to_json()))
    return 0


def cmd_relations(args) -> int:
    if args.action == "close":
        rel = relations.parse_relation_text(Path(args.file).read_text())
        closed = relations.factor_closure(rel)
        classes = sorted(sorted(c) for c in closed.classes())
        print(json.dumps({"classes": classes, "pairs": len(closed.pairs)}))
        return 0
    if args.action == "product-check":
        rels = [relations.parse_relation_text(Path(f).read_text()) for f in args.file.split(",")]
        rep = relations.product_closure_check(rels)
        print(json.dumps({"passed": rep.passed,
                          "trace": [{"subset": list(t.subset), "contained": t.contained,
                                     "pairs_checked": t.pairs_checked} for t in rep.trace]}))
        return 0 if rep.passed else 1
    if args.action == "rp-probe":
        flow = flows.flow_from_json(json.loads(Path(args.flow).read_text()))
        x = _point_from_arg(args.x, flow.dim)
        xp = _point_from_arg(args.xp, flow.dim)
        rep = relations.rp_probe(flow, x, xp, eps=args.eps, delta=args.delta,
                                 t_max=args.t_max)
        print(json.dumps({"status": rep.status, "witness_time": rep.witness_time}))
        return 0
    raise DistalLabError(f"unknown relations action {args.action}")


def cmd_interp(args) -> int:
    flow = presets.furstenberg_flow()
    scales_a, scales_b = presets.default_scales(flow.angle, flow.cocycle)
    h, control = presets._witness_sequence(flow, scales_a, scales_b)
    hz = interp.even_zero_normalize(h, scales_a, scales_b)
    f = interp.interpolate(hz)
    rep = interp.divergent_means(f, scales_a, scales_b)
    out = Path(args.out)
    rows = [[n, repr(hz.at(n))] for n in range(-min(hz.n_lo, 64), min(hz.n_hi, args.export_window) + 1)]
    _write_csv(out, ["n", "h"], rows)
    print(json.dumps({"f_id": f.f_id, "part": h.provenance.part,
                      "normalized": hz.provenance.normalized,
                      "continuous_gap": rep.gap, "control": control,
                      "lipschitz": f.lipschitz_constant(), "out": str(out)}))
    return 0


def cmd_run_preset(args) -> int:
    t0 = time.perf_counter()
    result = presets.run_preset(args.name)
    elapsed = time.perf_counter() - t0
    outdir = Path(args.out) / result.name
    outdir.mkdir(parents=True, exist_ok=True)
    artifacts = []
    for tname, (header, rows) in result.tables.items():
        path = outdir / f"{tname}.csv"
        _write_csv(path, header, rows)
        artifacts.append(path.name)
    _write_json(outdir / "values.json", result.values)
    artifacts.append("values.json")
    config = {"preset": result.name, "version": __version__,
              "backend": _kernels.backend_name()}
    manifest = {
        "config": config,
        "config_hash": hashlib.sha256(
            json.dumps(config, sort_keys=True).encode()).hexdigest(),
        "artifacts": sorted(artifacts),
        "wall_time_s": elapsed,
    }
    _write_json(outdir / "manifest.json", manifest)
    print(json.dumps({"preset": result.name, "outdir": str(outdir),
                      "wall_time_s": elapsed}))
    return 0


def cmd_list_presets(_args) -> int:
    for name in presets.PRESETS:
        print(name)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="distal-lab",
                                description="numerical laboratory for minimal distal torus dynamics")
    p.add_argument("--version", action="version", version=f"distal-lab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="orbit histogram and coverage probe")
    s.add_argument("--flow", required=True, help="flow spec JSON file")
    s.add_argument("--x0", default="", help="comma-separated floats or 32-hex lattice words")
    s.add_argument("--steps", type=int, default=10 ** 7)
    s.add_argument("--grid", type=int, default=32)
    s.add_argument("--out", default="coverage.csv")
    s.set_defaults(fn=cmd_simulate)

    s = sub.add_parser("cocycle", help="build a cocycle / residuals of the two functional equations")
    s.add_argument("action", choices=["build", "eq1", "eq2"])
    s.add_argument("--angle", default="liouville4")
    s.add_argument("--terms", type=int, default=3)
    s.add_argument("--rule", default="unit")
    s.add_argument("--indices", default="", help="explicit convergent indices, comma-separated")
    s.add_argument("--freq", type=int, default=0, help="character frequency j for eq1")
    s.add_argument("--power", type=int, default=1, help="exponent m (eq1) or n (eq2)")
    s.add_argument("--truncation", type=int, default=0, help="solution truncation K for eq2")
    s.add_argument("--samples", type=int, default=10000)
    s.set_defaults(fn=cmd_cocycle)

    s = sub.add_parser("scan", help="two-time-scale Birkhoff scan over a character dictionary")
    s.add_argument("--flow", required=True)
    s.add_argument("--x0", default="")
    s.add_argument("--f-dict", dest="f_dict", default="chars50",
                   help="'chars50' or 'm1:m2;m1:m2;...'")
    s.add_argument("--scales-a", dest="scales_a", required=True)
    s.add_argument("--scales-b", dest="scales_b", required=True)
    s.add_argument("--out", default="gaps.csv")
    s.set_defaults(fn=cmd_scan)

    s = sub.add_parser("disjoint", help="independence verdict for a rotation family")
    s.add_argument("--angles", required=True, help="comma-separated names or decimals")
    s.add_argument("--max-coeff", dest="max_coeff", type=int, default=disjoint.DEFAULT_MAX_COEFF)
    s.add_argument("--digits", type=int, default=disjoint.DEFAULT_DIGITS)
    s.add_argument("--cross-validate", dest="cross_validate", default="",
                   help="'N,m' to also run the density probe")
    s.set_defaults(fn=cmd_disjoint)

    s = sub.add_parser("relations", help="finite closures and the rp probe")
    s.add_argument("action", choices=["close", "product-check", "rp-probe"])
    s.add_argument("--file", default="", help="edge-list file(s), comma-separated for products")
    s.add_argument("--flow", default="")
    s.add_argument("--x", default="")
    s.add_argument("--xp", default="")
    s.add_argument("--eps", type=float, default=presets.RP_EPS)
    s.add_argument("--delta", type=float, default=presets.RP_DELTA)
    s.add_argument("--t-max", dest="t_max", type=int, default=presets.RP_T_MAX)
    s.set_defaults(fn=cmd_relations)

    s = sub.add_parser("interp", help="divergent-sequence interpolation pipeline")
    s.add_argument("--out", default="h.csv")
    s.add_argument("--export-window", dest="export_window", type=int, default=512)
    s.set_defaults(fn=cmd_interp)

    s = sub.add_parser("run-preset", help="run a named reproducible experiment")
    s.add_argument("name")
    s.add_argument("--out", default="runs")
    s.set_defaults(fn=cmd_run_preset)

    s = sub.add_parser("list-presets", help="list available presets")
    s.set_defaults(fn=cmd_list_presets)
    return p


def main(argv=None) -> int:
    _apply_thread_cap()
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except DistalLabError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
