"""Command line: ``carpet-forge {build,verify,schedule,render,quotient,lemma8}``.

Exit codes: 0 pass, 1 verification failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from .geom import GeometryError, Rect, fmt, q

USAGE_ERROR = 2


class UsageError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return q(text)
    except (GeometryError, ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None


def _window(text: str) -> Rect:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("window needs x0,x1,y0,y1")
    try:
        return Rect(*(_rational(p) for p in parts))
    except GeometryError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _point(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("point needs x,y")
    return tuple(_rational(p) for p in parts)


def read_config(path: str) -> dict:
    """Plain ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line without '=': {raw!r}")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override it")
    common.add_argument("--mode", choices=("paper", "relaxed"))
    common.add_argument("--profile", help="schedule profile (default from CARPET_FORGE_PROFILE)")
    common.add_argument("--stages", type=int)
    common.add_argument("--window", type=_window, help="x0,x1,y0,y1 as rationals")
    common.add_argument("--resolution", type=_rational)
    common.add_argument("--out", help="output path (default stdout)")

    p = argparse.ArgumentParser(prog="carpet-forge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("build", parents=[common], help="build stages 1..N and emit scene JSON")
    sub.add_parser("verify", parents=[common], help="run the invariant suites")
    sub.add_parser("schedule", parents=[common], help="emit the schedule validation report")
    r = sub.add_parser("render", parents=[common], help="scene JSON to SVG")
    r.add_argument("--in", dest="infile", help="scene JSON (default stdin)")
    r.add_argument("--size", type=int)
    qt = sub.add_parser("quotient", parents=[common], help="patchwork surrogate and grid checks")
    qt.add_argument("--depth", type=int)
    lm = sub.add_parser("lemma8", parents=[common], help="trapezoid search for chain witnesses")
    lm.add_argument("--point", type=_point, action="append", help="witness x,y (repeatable)")
    lm.add_argument("--svg", help="also write an SVG of the last element")
    return p


DEFAULTS = {"mode": "relaxed", "stages": 2, "resolution": Fraction(1, 54), "depth": 2,
            "size": 800}
CONVERT = {"stages": int, "depth": int, "size": int, "resolution": _rational,
           "window": _window}


def resolve(argv) -> argparse.Namespace:
    parser = _parser()
    args = parser.parse_args(argv)
    cfg = read_config(args.config) if args.config else {}
    for key, value in cfg.items():
        if not hasattr(args, key):
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, key) is None:
            try:
                setattr(args, key, CONVERT.get(key, str)(value))
            except (argparse.ArgumentTypeError, ValueError) as e:
                raise UsageError(f"config {key}: {e}") from None
    for key, value in DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)
    if args.stages < 1:
        raise UsageError("--stages must be at least 1")
    if args.profile is None:
        args.profile = "paper" if args.mode == "paper" else None
    from .schedule import ScheduleError, relaxed_profile
    try:
        prof = relaxed_profile(args.profile)
    except ScheduleError as e:
        raise UsageError(str(e)) from None
    if prof.mode != args.mode:
        raise UsageError(f"profile {prof.name!r} is for mode {prof.mode!r}")
    args.profile_obj = prof
    if args.mode == "paper" and args.stages > 2 and args.window is None \
            and args.command in ("build",):
        raise UsageError("paper mode with more than 2 stages needs --window")
    return args


def _emit(args, data) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _json(obj) -> str:
    def enc(o):
        if isinstance(o, Fraction):
            return fmt(o)
        if isinstance(o, tuple):
            return list(o)
        return str(o)
    return json.dumps(obj, indent=2, sort_keys=True, default=enc) + "\n"


# subcommands

def cmd_build(args) -> int:
    from .decomp import Stages
    from .render import partition_scene, scene_to_json
    st = Stages(args.stages, args.profile_obj)
    scene = partition_scene(st, args.stages, args.window)
    _emit(args, scene_to_json(scene))
    return 0


def cmd_render(args) -> int:
    from .render import render_svg, scene_from_json
    text = Path(args.infile).read_text() if args.infile else sys.stdin.read()
    _emit(args, render_svg(scene_from_json(text), args.size))
    return 0


def cmd_schedule(args) -> int:
    from .schedule import build_schedule, report_json, report_ok, validate_schedule
    rows = validate_schedule(build_schedule(args.stages, args.profile_obj), args.profile_obj)
    _emit(args, report_json(rows) + "\n")
    return 0 if report_ok(rows) else 1


def verify_suites(stages: int, profile, seed: int = 0) -> dict:
    """Invariant suites for stages ``1..stages`` (relaxed profiles)."""
    from .carpet import carpet_approx
    from .decomp import Stages, chain_from_point, verify_nesting
    from .homeo import BendSystem, bend_conditions, displacement_check
    from .partition import representative_strips, verify_partition
    from .schedule import build_schedule, report_ok, validate_schedule

    out = {}
    carpet_ok = all(len(carpet_approx(i).holes) == (8 ** (i - 1) - 1) // 7
                    and carpet_approx(i).region.area == Fraction(8, 9) ** (i - 1)
                    for i in range(1, 4))
    out["carpet"] = {"pass": carpet_ok}
    params = build_schedule(stages, profile)
    out["schedule"] = {"pass": report_ok(validate_schedule(params, profile))}
    st = Stages(stages, profile)
    rng = random.Random(seed)
    for n in range(1, stages + 1):
        part = st.partition(n)
        fam = part.family
        strips = None if n <= 3 else representative_strips(fam)
        rep = verify_partition(part, strips)
        out[f"partition.{n}"] = {"pass": rep["pass"], "cells": rep["cells"]}
        h = st.straightener(n)
        ranges = [fam.strip_range(i) for i in representative_strips(fam)]
        inc = all(h.fibers_increasing(lo, hi) for lo, hi in ranges)
        pts = [(Fraction(rng.randrange(1, 4096), 8192) + Fraction(1, 2),
                Fraction(rng.randrange(1, 8192), 4096)) for _ in range(50)]
        trip = all(h.apply_inverse(h.apply(p)) == p for p in pts)
        row = {"pass": inc and trip, "fibers_increasing": inc, "round_trip": trip}
        if n % 2 == 0:
            d = displacement_check(h, n, params[n - 2].a, ranges)
            row["displacement"] = d["pass"]
            row["pass"] = row["pass"] and d["pass"]
        out[f"straightener.{n}"] = row
    bends = BendSystem(profile)
    for n in range(4, stages + 1):
        rows = bend_conditions(bends.bend(n))
        out[f"bend.{n}"] = {"pass": all(r["cond1"] and r["cond2"] for r in rows),
                            "periods": len(rows)}
    pts = [(Fraction(rng.randrange(0, 4096), 8192) + Fraction(1, 2),
            Fraction(rng.randrange(1, 8192), 4096)) for _ in range(10)]
    rep = verify_nesting([chain_from_point(p, st) for p in pts])
    out["nesting"] = {"pass": rep["pass"], "chains": len(rep["chains"])}
    return out


def cmd_verify(args) -> int:
    if args.mode == "paper":
        raise UsageError("verify runs relaxed profiles; use `schedule --mode paper`")
    res = verify_suites(args.stages, args.profile_obj)
    ok = all(r["pass"] for r in res.values())
    _emit(args, _json({"pass": ok, "suites": res}))
    return 0 if ok else 1


def cmd_quotient(args) -> int:
    from .quotient import (UNIT, boundary_agreement, collapse_preimage,
                           grid_monotone_open_check, map_T, map_Tprime, theorem2_surrogate)
    thm = theorem2_surrogate(args.depth)
    agree = boundary_agreement(thm.patchwork, thm.source)
    grid = grid_monotone_open_check(thm.patchwork, thm.source, args.resolution,
                                    thm.patchwork.breaks())
    pre = collapse_preimage(map_Tprime, (1, 0), UNIT, args.resolution)
    collapse = all(p.x == 1 for p in pre) and len(pre) == int(1 / args.resolution) + 1
    control = grid_monotone_open_check(map_T, UNIT, Fraction(1, 27))
    report = {
        "surrogate": thm.notes,
        "boundary_agreement": {"pass": agree["pass"], "checked": agree["checked"]},
        "grid_monotone": {"pass": grid.monotone, "cells": grid.cells, "fibers": grid.fibers,
                          "resolution": grid.resolution},
        "grid_open_surrogate_violations": len(grid.open_violations),
        "Tprime_collapse": {"pass": collapse, "points": len(pre)},
        "T_open_negative_control": {"fails_as_expected": not control.open,
                                    "violations": len(control.open_violations)},
        "pinch": [[tag, [fmt(p.x), fmt(p.y)]] for cls in thm.identification.classes
                  for tag, p in cls],
    }
    ok = agree["pass"] and grid.monotone and collapse and not control.open
    report["pass"] = ok
    _emit(args, _json(report))
    return 0 if ok else 1


def cmd_lemma8(args) -> int:
    from .decomp import (DecompError, Stages, TrapezoidWitness, chain_from_point,
                         element_approx, lemma8_search, vertical_line_check)
    if not args.point:
        raise UsageError("lemma8 needs at least one --point")
    st = Stages(args.stages, args.profile_obj)
    rows, ok, last = [], True, None
    for p in args.point:
        row = {"point": [fmt(p[0]), fmt(p[1])]}
        try:
            ap = element_approx(chain_from_point(p, st))
            w = lemma8_search(ap)
        except DecompError as e:
            row.update(found=False, error=str(e))
            ok = False
            rows.append(row)
            continue
        if isinstance(w, TrapezoidWitness):
            v = vertical_line_check(ap.g, w.T)
            row.update(found=True, n=w.n, case=w.case, target=w.target, width=w.width,
                       T=[fmt(c) for c in w.T.bounds], vertical_lines=v["lines"],
                       vertical_check=v["pass"])
            ok &= v["pass"] and w.width > w.target
            last = (ap, w)
        else:
            row.update(w)
            ok = False
        rows.append(row)
    if args.svg and last is not None:
        from .render import element_scene, render_svg
        Path(args.svg).write_bytes(render_svg(element_scene(*last)))
    _emit(args, _json({"pass": ok, "chains": rows}))
    return 0 if ok else 1


COMMANDS = {"build": cmd_build, "verify": cmd_verify, "schedule": cmd_schedule,
            "render": cmd_render, "quotient": cmd_quotient, "lemma8": cmd_lemma8}


def main(argv=None) -> int:
    try:
        args = resolve(sys.argv[1:] if argv is None else argv)
    except SystemExit as e:       # argparse usage errors
        return int(e.code) if e.code is not None else 0
    except UsageError as e:
        print(f"carpet-forge: error: {e}", file=sys.stderr)
        return USAGE_ERROR
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"carpet-forge: error: {e}", file=sys.stderr)
        return USAGE_ERROR
    except (ValueError, OSError) as e:
        print(f"carpet-forge: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
