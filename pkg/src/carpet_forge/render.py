"""Scenes: an ordered list of labelled exact geometries, a JSON form that
round-trips exactly, and a deterministic SVG emitter.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .geom import GeometryError, Point, Polygon, Rect, Region, fmt, polygons_meet, q

SCHEMA_VERSION = 1
KINDS = ("polygon", "region", "polyline", "point")


class SceneError(ValueError):
    pass


def _pts(seq) -> tuple:
    return tuple(Point(q(x), q(y)) for x, y in seq)


@dataclass(frozen=True)
class SceneItem:
    kind: str
    vertices: tuple
    style: str
    label: str
    holes: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SceneError(f"unknown item kind {self.kind!r}")
        object.__setattr__(self, "vertices", _pts(self.vertices))
        object.__setattr__(self, "holes", tuple(_pts(h) for h in self.holes))


@dataclass
class Scene:
    viewport: Rect
    items: list = field(default_factory=list)

    def add(self, geometry, style: str, label: str) -> SceneItem:
        if any(it.label == label for it in self.items):
            raise SceneError(f"duplicate label {label!r}")
        if isinstance(geometry, Region):
            item = SceneItem("region", geometry.outer.vertices, style, label,
                             tuple(h.vertices for h in geometry.holes))
        elif isinstance(geometry, Rect):
            item = SceneItem("polygon", geometry.polygon().vertices, style, label)
        elif isinstance(geometry, Polygon):
            item = SceneItem("polygon", geometry.vertices, style, label)
        elif isinstance(geometry, tuple) and len(geometry) == 2 and not isinstance(geometry[0], tuple):
            item = SceneItem("point", (geometry,), style, label)
        else:
            item = SceneItem("polyline", tuple(geometry), style, label)
        self.items.append(item)
        return item

    def __eq__(self, other) -> bool:
        return (isinstance(other, Scene) and self.viewport == other.viewport
                and self.items == other.items)


# JSON

def _enc(p: Point) -> list:
    return [fmt(p.x), fmt(p.y)]


def scene_to_dict(scene: Scene) -> dict:
    v = scene.viewport
    items = []
    for it in scene.items:
        d = {"kind": it.kind, "label": it.label, "style": it.style,
             "vertices": [_enc(p) for p in it.vertices]}
        if it.holes:
            d["holes"] = [[_enc(p) for p in h] for h in it.holes]
        items.append(d)
    return {"version": SCHEMA_VERSION,
            "viewport": [fmt(v.x_lo), fmt(v.x_hi), fmt(v.y_lo), fmt(v.y_hi)],
            "items": items}


def scene_to_json(scene: Scene) -> str:
    return json.dumps(scene_to_dict(scene), indent=1, sort_keys=True) + "\n"


def scene_from_json(text: str) -> Scene:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise SceneError(f"invalid scene JSON: {e}") from None
    if d.get("version") != SCHEMA_VERSION:
        raise SceneError(f"unsupported scene version {d.get('version')!r}")
    try:
        scene = Scene(Rect(*(q(s) for s in d["viewport"])))
        for it in d["items"]:
            item = SceneItem(it["kind"], it["vertices"], it["style"], it["label"],
                             tuple(it.get("holes", ())))
            if any(x.label == item.label for x in scene.items):
                raise SceneError(f"duplicate label {item.label!r}")
            scene.items.append(item)
    except (KeyError, TypeError, GeometryError) as e:
        raise SceneError(f"malformed scene: {e}") from None
    return scene


# SVG

def _decimal(v: Fraction) -> tuple:
    """Decimal text of ``v`` and whether it is exact."""
    den = v.denominator
    a = b = 0
    while den % 2 == 0:
        den //= 2
        a += 1
    while den % 5 == 0:
        den //= 5
        b += 1
    if den == 1:
        k = max(a, b)
        num = v.numerator * 10 ** k // v.denominator
        exact = True
    else:
        k = 12
        num = round(v * 10 ** k)
        exact = False
    sign = "-" if num < 0 else ""
    digits = str(abs(num)).rjust(k + 1, "0")
    whole, frac = digits[:len(digits) - k], digits[len(digits) - k:].rstrip("0")
    return sign + whole + ("." + frac if frac else ""), exact


def _path(loops: Iterable, closed: bool = True) -> tuple:
    parts = []
    exact = True
    for loop in loops:
        cmds = []
        for k, p in enumerate(loop):
            x, ex = _decimal(p.x)
            y, ey = _decimal(p.y)
            exact &= ex and ey
            cmds.append(("M" if k == 0 else "L") + x + " " + y)
        if closed:
            cmds.append("Z")
        parts.append(" ".join(cmds))
    return " ".join(parts), exact


STYLE = """
path{vector-effect:non-scaling-stroke}
.cell{fill:#dde6f0;stroke:#1f3b5a;stroke-width:0.5}
.rectangular{fill:#e8eef5}
.transition{fill:#f4ead5}
.type1{fill:#d6ecd9}
.type2{fill:#f3d9d9}
.hole{fill:#ffffff;stroke:#000000;stroke-width:0.5}
.carpet{fill:#444444;fill-rule:evenodd}
.element{fill:none;stroke:#b0302a;stroke-width:1.2}
.trapezoid{fill:none;stroke:#2a7bb0;stroke-width:1.2;stroke-dasharray:2 1}
.point{fill:#b0302a}
.line{fill:none;stroke:#333333;stroke-width:0.5}
"""


def render_svg(scene: Scene, size: int = 800) -> bytes:
    """Deterministic SVG 1.1; y grows upward in model space."""
    v = scene.viewport
    vx, _ = _decimal(v.x_lo)
    vy, _ = _decimal(-v.y_hi)
    vw, _ = _decimal(v.width)
    vh, _ = _decimal(v.height)
    h = round(size * v.height / v.width) if v.width else size
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{h}" '
           f'viewBox="{vx} {vy} {vw} {vh}">',
           f"<style>{STYLE}</style>",
           '<g transform="scale(1,-1)">']
    for it in scene.items:
        classes = it.style
        if it.kind == "point":
            p = it.vertices[0]
            x, ex = _decimal(p.x)
            y, ey = _decimal(p.y)
            r = _decimal(v.width / 200)[0]
            if not (ex and ey):
                out.append("<!-- ~ rounded to 12 places -->")
            out.append(f'<circle class="{classes}" cx="{x}" cy="{y}" r="{r}"><title>{it.label}</title></circle>')
            continue
        loops = [it.vertices, *it.holes]
        d, exact = _path(loops, closed=it.kind != "polyline")
        if not exact:
            out.append("<!-- ~ rounded to 12 places -->")
        rule = ' fill-rule="evenodd"' if it.holes else ""
        out.append(f'<path class="{classes}" d="{d}"{rule}><title>{it.label}</title></path>')
    out += ["</g>", "</svg>", ""]
    return "\n".join(out).encode("utf-8")


# scene builders

def carpet_scene(depth: int) -> Scene:
    from .carpet import carpet_approx
    c = carpet_approx(depth)
    s = Scene(c.frame)
    s.add(c.frame, "carpet", "S")
    for k, r in enumerate(c.hole_rects):
        s.add(r, "hole", f"hole.{k}")
    return s


def _meets(poly: Polygon, window: Rect) -> bool:
    x0, x1, y0, y1 = poly.bounds
    if x1 < window.x_lo or x0 > window.x_hi or y1 < window.y_lo or y0 > window.y_hi:
        return False
    return polygons_meet(poly, window.polygon())


def stage_cells(stages, n: int, window: Rect | None = None, limit: int = 20000) -> list:
    """``(cell, H_n(cell))`` for the stage-``n`` cells whose image meets ``window``.

    Candidates are straightened cells within the total fiber displacement of
    ``H_n`` from the window, so no cell meeting the window is missed.
    """
    part = stages.partition(n)
    if window is None:
        cand = part.cells()
        total = part.count()
    else:
        m = sum((stages.straightener(k).max_displacement()[0] for k in range(1, n)), Fraction(0))
        wide = Rect(window.x_lo - m, window.x_hi + m, window.y_lo - m, window.y_hi + m)
        cand = part.cells(wide)
        total = None
    H = stages.H(n)
    out = []
    for k, c in enumerate(cand):
        if k >= limit or (total is not None and total > limit):
            raise SceneError(f"stage {n} has more than {limit} cells in view; pass a smaller window")
        img = H.apply_polygon(c.polygon)
        if window is None or _meets(img, window):
            out.append((c, img))
    return out


def partition_scene(stages, N: int, window: Rect | None = None, limit: int = 20000) -> Scene:
    """Cells of ``P_1 .. P_N`` (one path per cell, class keyed by kind)."""
    from .partition import D
    s = Scene(window or D)
    for n in range(1, N + 1):
        for c, img in stage_cells(stages, n, window, limit):
            s.add(img, f"cell {c.kind} stage{n}", f"P{n}.{c.i}.{c.j}")
    return s


def element_scene(approx, witness=None) -> Scene:
    x0, x1, y0, y1 = approx.g.bounds
    pad = max(x1 - x0, y1 - y0) / 10
    s = Scene(Rect(x0 - pad, x1 + pad, y0 - pad, y1 + pad))
    for k, reg in enumerate(approx.g.regions):
        s.add(reg, "element", f"g{approx.N}.{k}")
    s.add(tuple(approx.chain.witness), "point", "witness")
    if witness is not None:
        s.add(witness.T, "trapezoid", "T")
    return s
