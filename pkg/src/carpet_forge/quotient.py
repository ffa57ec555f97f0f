"""Explicit quotient geometry: the maps T and T', the two affine embeddings, the
patchwork map onto the pinched carpet B, nerve quotients and grid checks for
monotone / open surrogates.

The limit quotient maps pi_1, pi_2 are not constructible; their stand-ins are
T and T' themselves, whose fibers (one collapsed edge, otherwise points) are
the decompositions with the prescribed quotient geometry.  Reports call these
"surrogate" and never claim more.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .carpet import carpet_approx, on_hole_boundary
from .geom import Point, Polygon, Rect, Region, point_in
from .regionops import union_all
from .star import _as_partition, cell_polygon, cells_touch, star_union


class QuotientError(ValueError):
    pass


UNIT = Rect(0, 1, 0, 1)
R1 = Rect(Fraction(1, 6), Fraction(2, 9), Fraction(5, 9), Fraction(7, 9))
R2 = Rect(Fraction(1, 9), Fraction(1, 6), Fraction(5, 9), Fraction(7, 9))
PINCH = Point(Fraction(1, 6), Fraction(5, 9))
MAX_DEPTH = 4


def map_T(p) -> Point:
    x, y = Fraction(p[0]), Fraction(p[1])
    return Point(x, y * x)


def map_Tprime(p) -> Point:
    x, y = Fraction(p[0]), Fraction(p[1])
    return Point(x, y * (1 - x))


@dataclass(frozen=True)
class Affine:
    """``(x, y) -> (sx*x + tx, sy*y + ty)`` with positive scales."""

    sx: Fraction
    tx: Fraction
    sy: Fraction
    ty: Fraction

    def __call__(self, p) -> Point:
        return Point(self.sx * p[0] + self.tx, self.sy * p[1] + self.ty)

    def inverse(self, p) -> Point:
        return Point((p[0] - self.tx) / self.sx, (p[1] - self.ty) / self.sy)

    def rect(self, r: Rect) -> Rect:
        a, b = self((r.x_lo, r.y_lo)), self((r.x_hi, r.y_hi))
        return Rect(a.x, b.x, a.y, b.y)


def affine_embeds() -> tuple:
    """``(h1, h2)`` onto ``[1/6,2/9] x [5/9,7/9]`` and ``[1/9,1/6] x [5/9,7/9]``."""
    F = Fraction
    h1 = Affine(F(1, 18), F(1, 6), F(2, 9), F(5, 9))
    h2 = Affine(F(1, 18), F(1, 9), F(2, 9), F(5, 9))
    return h1, h2


# patchwork

@dataclass
class Patch:
    region: Rect
    fn: Callable
    label: str


@dataclass
class PatchworkMap:
    patches: list
    label: str = "patchwork"

    def __post_init__(self):
        for i, a in enumerate(self.patches):
            for b in self.patches[i + 1:]:
                ra, rb = a.region, b.region
                if (max(ra.x_lo, rb.x_lo) < min(ra.x_hi, rb.x_hi)
                        and max(ra.y_lo, rb.y_lo) < min(ra.y_hi, rb.y_hi)):
                    raise QuotientError(f"patches {a.label} and {b.label} overlap")

    def branches(self, p) -> list:
        return [pt for pt in self.patches if pt.region.contains_point(p)]

    def __call__(self, p) -> Point:
        p = Point(Fraction(p[0]), Fraction(p[1]))
        for pt in self.patches:
            if pt.region.contains_point(p):
                return pt.fn(p)
        return p

    def breaks(self) -> set:
        out = set()
        for pt in self.patches:
            r = pt.region
            out |= {r.x_lo, r.x_hi, r.y_lo, r.y_hi}
        return out


def conjugate(h: Affine, pi: Callable) -> Callable:
    return lambda p: h(pi(h.inverse(p)))


def boundary_agreement(pw: PatchworkMap, source: Region, samples: int = 8) -> dict:
    """Compare every branch that applies at sampled patch-edge points.

    The identity branch counts only where the source set continues outside
    the patches, probed a short step off the edge.
    """
    mismatches = []
    checked = 0
    for pt in pw.patches:
        r = pt.region
        corners = r.polygon().vertices
        step = min(r.width, r.height) / (4 * samples)
        for k in range(4):
            a, b = corners[k], corners[(k + 1) % 4]
            # outward normal of a ccw rectangle edge
            nx, ny = b[1] - a[1], a[0] - b[0]
            scale = step / (abs(nx) + abs(ny))
            for s in range(samples + 1):
                t = Fraction(s, samples)
                p = Point(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
                values = [(q.label, q.fn(p)) for q in pw.branches(p)]
                probe = Point(p.x + nx * scale, p.y + ny * scale)
                if not pw.branches(probe) and point_in(probe, source) != "outside":
                    values.append(("identity", p))
                checked += 1
                if len({v for _, v in values}) > 1:
                    mismatches.append({"point": p, "values": values})
    return {"pass": not mismatches, "checked": checked, "mismatches": mismatches}


def collapse_preimage(fn: Callable, target, domain: Rect, resolution) -> list:
    """Grid points of ``domain`` (spacing ``resolution``) that ``fn`` sends to ``target``."""
    r = Fraction(resolution)
    nx, ny = int(domain.width / r), int(domain.height / r)
    target = Point(Fraction(target[0]), Fraction(target[1]))
    out = []
    for i in range(nx + 1):
        for j in range(ny + 1):
            p = Point(domain.x_lo + i * r, domain.y_lo + j * r)
            if fn(p) == target:
                out.append(p)
    return out


# identifications

@dataclass(frozen=True)
class Identification:
    classes: tuple          # each class: tuple of (tag, Point)

    @property
    def lobes(self) -> tuple:
        return tuple(len(c) for c in self.classes)


def _member(m) -> tuple:
    if isinstance(m, tuple) and len(m) == 2 and isinstance(m[0], str):
        return m[0], Point(Fraction(m[1][0]), Fraction(m[1][1]))
    p = Point(Fraction(m[0]), Fraction(m[1]))
    return "", p


def identify_points(region: Region, classes: Sequence) -> Identification:
    """Attach identification classes; members are points or ``(tag, point)`` pairs.

    Repeated members collapse; classes left with one member are dropped.
    """
    out = []
    for cls in classes:
        members = []
        for m in cls:
            tag, p = _member(m)
            if not on_hole_boundary(p, region):
                raise QuotientError(f"point {p} is not on a hole boundary")
            if (tag, p) not in members:
                members.append((tag, p))
        if len(members) > 1:
            out.append(tuple(members))
    return Identification(tuple(out))


# Theorem 2 surrogate

def _image_quad(fn: Callable, h: Affine, r: Rect) -> Polygon:
    # T and T' keep vertical and horizontal lines straight, so rectangles go to quads
    return Polygon(tuple(h(fn(v)) for v in r.polygon().vertices))


def _open_overlap(a: Rect, b: Rect) -> bool:
    return (max(a.x_lo, b.x_lo) < min(a.x_hi, b.x_hi)
            and max(a.y_lo, b.y_lo) < min(a.y_hi, b.y_hi))


@dataclass
class Theorem2Surrogate:
    depth: int
    patchwork: PatchworkMap
    source: Region
    target: Region
    identification: Identification
    notes: dict = field(default_factory=dict)


def theorem2_surrogate(depth: int = 2) -> Theorem2Surrogate:
    """Patchwork ``S' -> B`` with T, T' standing in for the quotient maps."""
    if not 1 <= depth <= MAX_DEPTH:
        raise QuotientError(f"depth {depth} outside 1..{MAX_DEPTH}")
    h1, h2 = affine_embeds()
    pw = PatchworkMap([Patch(R1, conjugate(h1, map_T), "h1 T h1^-1"),
                       Patch(R2, conjugate(h2, map_Tprime), "h2 T' h2^-1")])
    # the rectangles are bounded above and below by holes only from depth 3 on
    base = carpet_approx(max(depth, 3))
    outer = [r for r in base.hole_rects if not (_open_overlap(r, R1) or _open_overlap(r, R2))]
    copy = carpet_approx(depth).hole_rects
    src_holes = ([r.polygon() for r in outer]
                 + [h.rect(r).polygon() for h in (h1, h2) for r in copy])
    source = Region(UNIT.polygon(), tuple(src_holes))

    # B: the triangle left over between the two quotient images joins the hole above
    gap = Polygon(((R2.x_lo, R2.y_hi), PINCH, (R1.x_hi, R1.y_hi)))
    merged = []
    rest = []
    for r in outer:
        if r.y_lo == R1.y_hi and r.x_lo <= R2.x_lo and r.x_hi >= R1.x_hi:
            merged.append(r.polygon())
        else:
            rest.append(r.polygon())
    tgt_holes = list(rest)
    if merged:
        tgt_holes.append(union_all(merged + [gap]).region().outer)
    else:
        tgt_holes.append(gap)
    tgt_holes += [_image_quad(map_T, h1, r) for r in copy]
    tgt_holes += [_image_quad(map_Tprime, h2, r) for r in copy]
    target = Region(UNIT.polygon(), tuple(tgt_holes))

    left = h1(map_T((0, 0)))
    right = h2(map_Tprime((1, 0)))
    ident = identify_points(target, [(("h1 T: left edge", left), ("h2 T': right edge", right))])
    return Theorem2Surrogate(depth, pw, source, target, ident,
                             notes={"pi_1": "surrogate T", "pi_2": "surrogate T'",
                                    "outer_depth": base.depth})


# nerve quotient

@dataclass
class NerveQuotient:
    cells: list
    edges: set
    fibers: list            # star union of each class

    @property
    def vertices(self) -> int:
        return len(self.cells)

    def __call__(self, p) -> int:
        """Class of ``p``: its cell, ties to the lowest index."""
        for k, c in enumerate(self.cells):
            if point_in(Point(*p), Region(cell_polygon(c))) != "outside":
                return k
        raise QuotientError(f"point {p} is outside the partition")


def nerve_quotient(P) -> NerveQuotient:
    """Classes are the cells' stars; two classes are adjacent when their cells touch."""
    part = _as_partition(P)
    cells = list(part.cells)
    edges = set()
    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            if cells_touch(cells[i], cells[j]):
                edges.add((i, j))
    fibers = [star_union(c, part) for c in cells]
    for k, f in enumerate(fibers):
        if len(f.regions) != 1:
            raise QuotientError(f"class {k} is disconnected")
    return NerveQuotient(cells, edges, fibers)


# grid surrogates

@dataclass
class GridMapCheck:
    resolution: Fraction
    cells: int
    fibers: int
    disconnected: list
    open_violations: list

    @property
    def monotone(self) -> bool:
        return not self.disconnected

    @property
    def open(self) -> bool:
        return not self.open_violations


def _floor_div(v: Fraction, r: Fraction) -> int:
    return (v / r).__floor__()


def grid_monotone_open_check(fn: Callable, domain, resolution,
                             breaks: Sequence = ()) -> GridMapCheck:
    """Rasterize ``domain`` at ``resolution`` and test fibers and local coverage.

    A domain cell belongs to the raster when its centre lies in the domain.
    Fibers are the domain cells whose centres land in one image cell; each must
    be 4-connected.  Openness surrogate: the images of a cell's 3x3 block must
    hit every rastered image cell adjacent to the cell's own image cell.
    """
    r = Fraction(resolution)
    for b in breaks:
        if (Fraction(b) / r).denominator != 1:
            raise QuotientError(f"resolution {r} straddles patch boundary {b}")
    region = domain.region() if isinstance(domain, Rect) else domain
    x0, x1, y0, y1 = region.bounds
    nx, ny = int((x1 - x0) / r), int((y1 - y0) / r)
    half = r / 2
    img = {}
    for i in range(nx):
        for j in range(ny):
            c = Point(x0 + i * r + half, y0 + j * r + half)
            if point_in(c, region) == "inside":
                q = fn(c)
                img[(i, j)] = (_floor_div(q[0], r), _floor_div(q[1], r))
    fibers = {}
    for cell, key in img.items():
        fibers.setdefault(key, []).append(cell)
    disconnected = []
    for key, members in fibers.items():
        mset = set(members)
        seen = {members[0]}
        todo = deque([members[0]])
        while todo:
            i, j = todo.popleft()
            for nb in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
                if nb in mset and nb not in seen:
                    seen.add(nb)
                    todo.append(nb)
        if len(seen) != len(mset):
            disconnected.append(key)
    hit = set(fibers)
    violations = []
    for (i, j), key in img.items():
        got = {img[(i + di, j + dj)] for di in (-1, 0, 1) for dj in (-1, 0, 1)
               if (i + di, j + dj) in img}
        need = {(key[0] + di, key[1] + dj) for di in (-1, 0, 1) for dj in (-1, 0, 1)} & hit
        if not need <= got:
            violations.append((i, j))
    return GridMapCheck(r, len(img), len(fibers), sorted(disconnected), sorted(violations))
