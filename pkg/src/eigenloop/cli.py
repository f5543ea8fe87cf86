"""Command-line interface: ``eigenloop <command> ...``.

Commands
    classify     degeneracy verdict for one or more loops, JSON on stdout
    transport    per-sample frame trace as CSV, sign summary on stdout
    figure       rotation angle and axis along the loop as CSV (n = 3, 4)
    extend       nondegenerate disc extension CSV plus verification JSON
    make-loop    write a loop file
    models       list built-in models or parse a model file

Exit codes
    0 success, 1 other input errors, 2 gap collapse, 3 unreadable or
    malformed model/loop input, 4 refinement exhausted, 5 extension refused
    because the loop is nontrivial, 64 command-line usage error.
"""

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .errors import (
    EigenloopError,
    GapCollapse,
    LoopParseError,
    ModelParseError,
    NotTrivial,
    RefinementExhausted,
)
from .extension import BoundaryData, build_extension, verify_extension
from .linalg import axis_angle
from .loops import LoopSpec, circle_loop, format_loop, load_loop, polygon_loop
from .modelfile import format_model, load_model
from .models import BUILTINS, builtin
from .topology import classify, reduce_so4
from .transport import TransportConfig, transport

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_GAP = 2
EXIT_PARSE = 3
EXIT_REFINEMENT = 4
EXIT_NONTRIVIAL = 5
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text):
    return [float(v) for v in text.replace(",", " ").split()]


def _fmt(x):
    return repr(float(x))


# ---------------------------------------------------------------------------
# model and loop construction from arguments
# ---------------------------------------------------------------------------


def _add_model_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--builtin", choices=sorted(BUILTINS), help="built-in model name")
    src.add_argument("--model", metavar="FILE", help="model definition file")
    p.add_argument("--k", type=float, help="e-epsilon linear coupling (default 1)")
    p.add_argument("--g", type=float, help="e-epsilon quadratic coupling (default 1)")
    p.add_argument("--coupling", type=float, help="g-g overall prefactor (default 1)")


def _add_loop_args(p, multiple=False):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--circle", type=float, metavar="R", help="circle of radius R")
    src.add_argument("--polygon", metavar="PTS", help="closed polygon, vertices 'x,y;x,y;...'")
    if multiple:
        src.add_argument("--loop-file", action="append", metavar="FILE", help="loop file (repeatable)")
    else:
        src.add_argument("--loop-file", metavar="FILE", help="loop file")
    p.add_argument("--samples", type=int, default=1024, help="circle samples (default 1024)")
    p.add_argument("--center", type=_floats, help="circle/polygon offset, comma separated")
    p.add_argument(
        "--basis",
        nargs=2,
        type=_floats,
        metavar=("U", "V"),
        help="plane of the circle/polygon as two direction vectors (default first two axes)",
    )
    p.add_argument("--per-edge", type=int, default=16, help="polygon samples per edge (default 16)")
    p.add_argument("--turns", type=int, default=1, help="traverse the circle this many times")


def _add_config_args(p):
    p.add_argument("--overlap-floor", type=float, default=0.9)
    p.add_argument("--max-depth", type=int, default=20, help="maximum bisection depth per step")
    p.add_argument("--gap-floor", type=float, default=1e-9)


def _model_from_args(args):
    if args.model:
        try:
            return load_model(args.model)
        except OSError as exc:
            raise ModelParseError(f"cannot read model file: {exc}") from exc
    return builtin(args.builtin, k=args.k, g=args.g, coupling=args.coupling)


def _embed(points2, d, center, basis):
    """Place planar points into R^d along ``basis`` and shift by ``center``."""
    if basis is None:
        u, v = np.eye(d)[0], np.eye(d)[1]
    else:
        u, v = (np.asarray(b, dtype=float) for b in basis)
        if u.shape != (d,) or v.shape != (d,):
            raise LoopParseError(f"--basis vectors need {d} components")
    q = points2[:, :1] * u + points2[:, 1:2] * v
    if center is not None:
        if len(center) not in (2, d):
            raise LoopParseError(f"--center needs 2 or {d} components")
        c = np.zeros(d)
        if len(center) == d:
            c[:] = center
        else:
            c = center[0] * u + center[1] * v
        q = q + c
    return q


def _loop_from_args(args, d, loop_file=None):
    """Return ``(LoopSpec, description dict)``."""
    path = loop_file if loop_file is not None else getattr(args, "loop_file", None)
    if path is not None and not isinstance(path, list):
        try:
            loop = load_loop(path)
        except OSError as exc:
            raise LoopParseError(f"cannot read loop file: {exc}") from exc
        return loop, {"kind": "file", "path": str(path), "samples": loop.n_samples}
    if args.circle is not None:
        base = circle_loop(args.circle, args.samples, d=2, turns=args.turns)
        q = _embed(base.q, d, args.center, args.basis)
        desc = {
            "kind": "circle",
            "radius": float(args.circle),
            "samples": int(args.samples),
            "center": [float(c) for c in args.center] if args.center else None,
            "basis": [list(map(float, b)) for b in args.basis] if args.basis else None,
            "turns": int(args.turns),
        }
        return LoopSpec(base.t, q), desc
    try:
        verts = np.array([_floats(v) for v in args.polygon.split(";") if v.strip()], dtype=float)
    except ValueError as exc:
        raise LoopParseError(f"bad --polygon value: {exc}") from exc
    if verts.ndim != 2 or verts.shape[1] != 2 or len(verts) < 3:
        raise LoopParseError("--polygon needs at least three 'x,y' vertices")
    base = polygon_loop(verts, per_edge=args.per_edge)
    desc = {
        "kind": "polygon",
        "vertices": verts.tolist(),
        "per_edge": int(args.per_edge),
        "center": [float(c) for c in args.center] if args.center else None,
        "basis": [list(map(float, b)) for b in args.basis] if args.basis else None,
    }
    return LoopSpec(base.t, _embed(base.q, d, args.center, args.basis)), desc


def _config_from_args(args):
    try:
        return TransportConfig(args.overlap_floor, args.max_depth, args.gap_floor)
    except ValueError as exc:
        raise EigenloopError(str(exc)) from exc


def _config_dict(cfg):
    return {
        "overlap_floor": cfg.overlap_floor,
        "max_refinement_depth": cfg.max_refinement_depth,
        "gap_floor": cfg.gap_floor,
    }


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def run_report(model, loop, loop_desc, cfg):
    """Classify one loop and return the report as an ordered dict."""
    start = time.perf_counter()
    v = classify(model, loop, cfg)
    runtime_ms = 1000.0 * (time.perf_counter() - start)
    return {
        "model": model.name,
        "constants": dict(model.constants),
        "loop": loop_desc,
        "n": model.n,
        "d": model.d,
        "min_gap": v.min_gap,
        "sign_pattern": [int(s) for s in v.result.signs],
        "class_kind": v.homotopy.kind,
        "winding": v.homotopy.winding,
        "z2": v.homotopy.z2,
        "degeneracy_implied": v.degeneracy_implied,
        "evidence": v.evidence,
        "samples_used": v.samples_used,
        "refinements": v.refinements,
        "runtime_ms": runtime_ms,
        "version": __version__,
        "config": _config_dict(cfg),
        "caveat": v.caveat,
    }


def _classify_job(job):
    model, loop, desc, cfg = job
    try:
        return run_report(model, loop, desc, cfg), None
    except EigenloopError as exc:
        return None, exc


def _dump(obj, fh):
    json.dump(obj, fh, indent=2, allow_nan=False)
    fh.write("\n")


def cmd_classify(args):
    model = _model_from_args(args)
    cfg = _config_from_args(args)
    if args.loop_file:
        jobs = []
        for path in args.loop_file:
            loop, desc = _loop_from_args(args, model.d, path)
            jobs.append((model, loop, desc, cfg))
    else:
        loop, desc = _loop_from_args(args, model.d)
        jobs = [(model, loop, desc, cfg)]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_classify_job, jobs))
    else:
        outcomes = [_classify_job(j) for j in jobs]
    for _, exc in outcomes:
        if exc is not None:
            raise exc
    reports = [r for r, _ in outcomes]
    _dump(reports[0] if len(reports) == 1 else reports, sys.stdout)
    return EXIT_OK


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w", newline="")


def _describe_signs(signs):
    if np.all(signs > 0):
        return "identity"
    if np.all(signs < 0):
        return "-identity"
    return "diag(" + ", ".join(f"{int(s):+d}" for s in signs) + ")"


def cmd_transport(args):
    model = _model_from_args(args)
    loop, _ = _loop_from_args(args, model.d)
    res = transport(model, loop, _config_from_args(args))
    n = res.n
    fh = _open_out(args.output)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(
            ["t"]
            + [f"lambda_{i + 1}" for i in range(n)]
            + [f"F_{i + 1}_{j + 1}" for i in range(n) for j in range(n)]
            + ["min_overlap"]
        )
        overlaps = np.concatenate([[1.0], res.step_overlaps])
        for k in range(res.n_samples):
            w.writerow(
                [_fmt(res.t[k])]
                + [_fmt(x) for x in res.eigenvalues[k]]
                + [_fmt(x) for x in res.frames[k].ravel()]
                + [_fmt(overlaps[k])]
            )
    finally:
        if fh is not sys.stdout:
            fh.close()
    summary = sys.stderr if fh is sys.stdout else sys.stdout
    print(
        f"D = {_describe_signs(res.signs)}  signs {' '.join(f'{int(s):+d}' for s in res.signs)}"
        f"  samples {res.n_samples}  refinements {res.refinements}  min_gap {_fmt(res.min_gap)}",
        file=summary,
    )
    return EXIT_OK


def figure_rows(model, loop, cfg=None):
    """``(t, phi, v1, v2, v3)`` rows of the SO(3) loop behind the frames."""
    res = transport(model, loop, cfg)
    if res.n == 3:
        frames = res.frames
    elif res.n == 4:
        frames = reduce_so4(res.frames)
    else:
        raise EigenloopError(f"figure data needs n = 3 or 4, model has n = {res.n}")
    rows = []
    for t, f in zip(res.t, frames):
        aa = axis_angle(f)
        rows.append((float(t), aa.phi, *map(float, aa.axis)))
    return rows


def cmd_figure(args):
    model = _model_from_args(args)
    loop, _ = _loop_from_args(args, model.d)
    rows = figure_rows(model, loop, _config_from_args(args))
    fh = _open_out(args.output)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta", "phi", "v1", "v2", "v3"])
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_extend(args):
    model = _model_from_args(args)
    loop, desc = _loop_from_args(args, model.d)
    cfg = _config_from_args(args)
    v = classify(model, loop, cfg)
    if v.degeneracy_implied or v.homotopy.kind == "Unsupported":
        reason = v.evidence or "unsupported dimension"
        print(f"extension refused: loop is not trivial ({reason})", file=sys.stderr)
        return EXIT_NONTRIVIAL
    b = BoundaryData.from_transport(v.result)
    h = build_extension(b, anchors=args.anchors, rho_nodes=args.rho_nodes)
    report = verify_extension(h, b)
    with open(args.output, "w", newline="") as fh:
        h.to_csv(fh)
    out = {
        "model": model.name,
        "constants": dict(model.constants),
        "loop": desc,
        "n": model.n,
        "rho_nodes": int(len(h.rho)),
        "theta_nodes": int(len(h.theta)),
        "anchors": [float(a) for a in h.anchors],
        **report.to_dict(),
        "version": __version__,
    }
    with open(args.report, "w") as fh:
        _dump(out, fh)
    print(f"extension {'verified' if report.passed else 'FAILED verification'}: {args.output}")
    return EXIT_OK if report.passed else EXIT_ERROR


def cmd_make_loop(args):
    loop, _ = _loop_from_args(args, args.d)
    fh = _open_out(args.output)
    try:
        fh.write(format_loop(loop))
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_models_list(args):
    print(f"{'name':<10} {'n':>2} {'d':>2}  constants       description")
    for name in sorted(BUILTINS):
        factory, constants, text = BUILTINS[name]
        m = factory()
        print(f"{name:<10} {m.n:>2} {m.d:>2}  {','.join(constants) or '-':<15} {text}")
    return EXIT_OK


def cmd_models_parse(args):
    model = _model_from_args(argparse.Namespace(model=args.file))
    sys.stdout.write(format_model(model))
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="eigenloop", description="Topological degeneracy test for real Hamiltonians.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("classify", help="classify loops, JSON report on stdout")
    _add_model_args(c)
    _add_loop_args(c, multiple=True)
    _add_config_args(c)
    c.add_argument("--jobs", type=int, default=1, help="worker processes for several loop files")
    c.set_defaults(func=cmd_classify)

    t = sub.add_parser("transport", help="frame trace CSV")
    _add_model_args(t)
    _add_loop_args(t)
    _add_config_args(t)
    t.add_argument("-o", "--output", default="-", help="CSV path (default stdout)")
    t.set_defaults(func=cmd_transport)

    f = sub.add_parser("figure", help="rotation angle and axis CSV")
    _add_model_args(f)
    _add_loop_args(f)
    _add_config_args(f)
    f.add_argument("-o", "--output", default="-", help="CSV path (default stdout)")
    f.set_defaults(func=cmd_figure)

    e = sub.add_parser("extend", help="build and verify a nondegenerate extension")
    _add_model_args(e)
    _add_loop_args(e)
    _add_config_args(e)
    e.add_argument("--anchors", type=_floats, help="interior eigenvalues, strictly increasing")
    e.add_argument("--rho-nodes", type=int, default=64)
    e.add_argument("-o", "--output", required=True, help="extension CSV path")
    e.add_argument("--report", required=True, help="verification JSON path")
    e.set_defaults(func=cmd_extend)

    m = sub.add_parser("make-loop", help="write a loop file")
    _add_loop_args(m)
    m.add_argument("--d", type=int, default=2, help="number of parameters (default 2)")
    m.add_argument("-o", "--output", default="-")
    m.set_defaults(func=cmd_make_loop)

    models = sub.add_parser("models", help="built-in and file models")
    msub = models.add_subparsers(dest="models_command", required=True, parser_class=_Parser)
    ml = msub.add_parser("list", help="list built-in models")
    ml.set_defaults(func=cmd_models_list)
    mp = msub.add_parser("parse", help="parse a model file and print its canonical form")
    mp.add_argument("file")
    mp.set_defaults(func=cmd_models_parse)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GapCollapse as exc:
        code = EXIT_GAP
        err = exc
    except (ModelParseError, LoopParseError) as exc:
        code = EXIT_PARSE
        err = exc
    except RefinementExhausted as exc:
        code = EXIT_REFINEMENT
        err = exc
    except NotTrivial as exc:
        code = EXIT_NONTRIVIAL
        err = exc
    except EigenloopError as exc:
        code = EXIT_ERROR
        err = exc
    print(f"eigenloop: {type(err).__name__}: {err}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
