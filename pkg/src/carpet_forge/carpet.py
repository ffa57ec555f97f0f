"""Carpet approximants, pinched-hole bookkeeping and the B / B^r chains.

``S_i`` is the unit square with the open centre ninths removed down to
generation ``i``.  Identifications are kept as explicit point classes next to
the region; nothing is re-embedded.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .geom import (GeometryError, Point, Polygon, Rect, Region, on_segment, point_in,
                   polygon_diameter2, segments_meet)

THIRD = Fraction(1, 3)


@dataclass(frozen=True)
class CarpetApprox:
    depth: int
    frame: Rect
    region: Region
    # holes[g] lists generation g+2 holes in row-major order
    generations: tuple = ()

    @property
    def holes(self) -> tuple:
        return self.region.holes

    @property
    def hole_rects(self) -> list:
        return [h for gen in self.generations for h in gen]


def _to_frame(frame: Rect, x, y) -> Point:
    return Point(frame.x_lo + x * frame.width, frame.y_lo + y * frame.height)


def _rect_in_frame(frame: Rect, x0, x1, y0, y1) -> Rect:
    a = _to_frame(frame, x0, y0)
    b = _to_frame(frame, x1, y1)
    return Rect(a.x, b.x, a.y, b.y)


def carpet_holes(depth: int) -> list:
    """Holes of ``S_depth`` in the unit square, grouped by generation."""
    if depth < 1:
        raise GeometryError("carpet depth must be at least 1")
    gens = []
    squares = [(Fraction(0), Fraction(0))]
    size = Fraction(1)
    for _ in range(depth - 1):
        sub = size / 3
        gen = [(x + sub, y + sub, sub) for x, y in squares]
        gen.sort(key=lambda h: (h[1], h[0]))
        gens.append(gen)
        squares = [(x + i * sub, y + j * sub) for x, y in squares
                   for j in range(3) for i in range(3) if (i, j) != (1, 1)]
        size = sub
    return gens


def carpet_approx(depth: int, frame: Rect | None = None) -> CarpetApprox:
    """``S_depth`` mapped affinely onto ``frame`` (default the unit square)."""
    if depth < 1:
        raise GeometryError("carpet depth must be at least 1")
    frame = frame or Rect(0, 1, 0, 1)
    gens = []
    for gen in carpet_holes(depth):
        gens.append(tuple(_rect_in_frame(frame, x, x + s, y, y + s) for x, y, s in gen))
    holes = tuple(r.polygon() for g in gens for r in g)
    return CarpetApprox(depth, frame, Region(frame.polygon(), holes), tuple(gens))


# pinched holes

@dataclass(frozen=True)
class PinchedSpec:
    lobes: int
    pinch_flags: tuple = ()
    hole_index: int = 0

    def __post_init__(self):
        if self.lobes < 1:
            raise GeometryError("a pinched hole needs at least one lobe")
        flags = tuple(bool(f) for f in self.pinch_flags)
        if len(flags) > self.lobes:
            raise GeometryError("more pinch flags than lobes")
        object.__setattr__(self, "pinch_flags", flags + (False,) * (self.lobes - len(flags)))


@dataclass(frozen=True)
class PinchedSpace:
    carpet: CarpetApprox
    spec: PinchedSpec
    hole: Rect
    center: tuple          # the n-point class of the pinched hole
    lobe_classes: tuple    # one 2-point class per pinched lobe
    identifications: tuple = field(default=())

    @property
    def region(self) -> Region:
        return self.carpet.region


def _perimeter_point(r: Rect, t: Fraction) -> Point:
    """Point at perimeter fraction ``t`` counterclockwise from the lower-left corner."""
    t = t % 1
    per = 2 * (r.width + r.height)
    s = t * per
    if s <= r.width:
        return Point(r.x_lo + s, r.y_lo)
    s -= r.width
    if s <= r.height:
        return Point(r.x_hi, r.y_lo + s)
    s -= r.height
    if s <= r.width:
        return Point(r.x_hi - s, r.y_hi)
    s -= r.width
    return Point(r.x_lo, r.y_hi - s)


def on_hole_boundary(p, region: Region) -> bool:
    return any(on_segment(p, a, b) for h in region.holes for a, b in h.edges())


def pinched_space(spec: PinchedSpec, depth: int = 2, frame: Rect | None = None,
                  extra: Sequence = ()) -> PinchedSpace:
    """Carpet approximant with one hole pinched into ``spec.lobes`` lobes.

    The centre class takes ``n`` points at perimeter fractions ``k/n`` of the
    chosen hole; lobe ``k`` is the arc between centre points ``k`` and ``k+1``.
    A pinched lobe identifies the points at one and two thirds along its arc.
    ``extra`` may add further classes; each point must lie on a hole boundary.
    """
    c = carpet_approx(depth, frame)
    rects = c.hole_rects
    if not rects or spec.hole_index >= len(rects):
        raise GeometryError("chosen hole does not exist at this depth")
    hole = rects[spec.hole_index]
    n = spec.lobes
    center = tuple(_perimeter_point(hole, Fraction(k, n)) for k in range(n))
    lobe_classes = []
    for k, flag in enumerate(spec.pinch_flags):
        if flag:
            t0 = Fraction(k, n)
            lobe_classes.append((_perimeter_point(hole, t0 + Fraction(1, 3 * n)),
                                 _perimeter_point(hole, t0 + Fraction(2, 3 * n))))
    classes = []
    if n > 1:
        classes.append(center)
    classes.extend(lobe_classes)
    for cls in extra:
        cls = tuple(Point(*p) for p in cls)
        for p in cls:
            if not on_hole_boundary(p, c.region):
                raise GeometryError(f"identification point {p} is not on a hole boundary")
        classes.append(cls)
    return PinchedSpace(c, spec, hole, center, tuple(lobe_classes), tuple(classes))


# the B chain

@dataclass(frozen=True)
class BChainSpec:
    count: int
    frames: tuple
    stages: tuple  # PinchedSpec per frame, None for the plain carpet B_0

    accumulation = Point(Fraction(3, 2), Fraction(0))

    def contact(self, n: int):
        """Exact intersection of frames ``n`` and ``n+1``: a point or a segment."""
        a, b = self.frames[n], self.frames[n + 1]
        x0, x1 = max(a.x_lo, b.x_lo), min(a.x_hi, b.x_hi)
        y0, y1 = max(a.y_lo, b.y_lo), min(a.y_hi, b.y_hi)
        if x0 > x1 or y0 > y1:
            return None
        if (x0, y0) == (x1, y1):
            return (Point(x0, y0),)
        return (Point(x0, y0), Point(x1, y1))


def b_frame(n: int) -> Rect:
    lo = sum((THIRD ** i for i in range(n)), Fraction(0))
    return Rect(lo, lo + THIRD ** n, 0, THIRD ** n)


def b_chain(count: int, bits: Sequence[int] | None = None, pinch_on: int = 1) -> BChainSpec:
    """Frames ``0..count`` of B (or B^r when ``bits`` are given).

    Stage ``n >= 1`` carries a pinched hole with ``n+1`` lobes.  For B^r, stage
    ``n`` also pinches lobe 0 when bit ``b_n`` equals ``pinch_on``.
    """
    if count < 1:
        raise GeometryError("count must be positive")
    frames = tuple(b_frame(n) for n in range(count + 1))
    stages = [None]
    for n in range(1, count + 1):
        flags = ()
        if bits is not None and n <= len(bits) and bits[n - 1] == pinch_on:
            flags = (True,)
        stages.append(PinchedSpec(n + 1, flags))
    return BChainSpec(count, frames, tuple(stages))


@dataclass(frozen=True)
class BrSignature:
    r_bits: tuple
    pinch_on: int = 1

    def __post_init__(self):
        bits = tuple(int(b) for b in self.r_bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0 or 1")
        object.__setattr__(self, "r_bits", bits)

    @classmethod
    def from_rational(cls, r: Fraction, length: int) -> "BrSignature":
        r = Fraction(r)
        if not 0 <= r <= 1:
            raise ValueError("r must lie in [0, 1]")
        bits = []
        for _ in range(length):
            r *= 2
            b = int(r >= 1) if r != 2 else 1
            bits.append(b)
            r -= b
        return cls(tuple(bits))

    def chain(self) -> BChainSpec:
        return b_chain(len(self.r_bits), self.r_bits, self.pinch_on)

    def bookkeeping(self) -> tuple:
        """Per stage: (lobe count, number of extra lobe classes)."""
        return tuple((s.lobes, sum(s.pinch_flags)) for s in self.chain().stages[1:])


# Whyburn-style report

def _segment_meets_rect(a, b, r: Rect) -> bool:
    if not (min(a[0], b[0]) <= r.x_hi and max(a[0], b[0]) >= r.x_lo
            and min(a[1], b[1]) <= r.y_hi and max(a[1], b[1]) >= r.y_lo):
        return False
    if r.contains_point(a) or r.contains_point(b):
        return True
    corners = r.polygon().vertices
    return any(segments_meet(a, b, corners[i], corners[(i + 1) % 4]) for i in range(4))


def whyburn_report(region: Region, depth: int | None = None, eps: Fraction | None = None,
                   generations: Sequence | None = None) -> dict:
    """Finite-stage proxies for the carpet characterization.

    (a) boundary curves simple and pairwise disjoint; (b) squared maximum hole
    diameter per generation, nonincreasing; (c) every grid square of side
    ``eps`` meeting the region touches some boundary curve.
    """
    problems = region.check_invariants()
    simple_ok = not problems
    if generations is None:
        generations = [[h for h in region.holes]] if region.holes else []
    diam = []
    for gen in generations:
        polys = [g.polygon() if isinstance(g, Rect) else g for g in gen]
        diam.append(max(polygon_diameter2(p) for p in polys))
    diam_ok = all(diam[i + 1] <= diam[i] for i in range(len(diam) - 1))

    x0, x1, y0, y1 = region.bounds
    if eps is None:
        eps = (x1 - x0) / 3 ** max((depth or 1) - 1, 0)
    nx = -(-(x1 - x0) // eps)
    ny = -(-(y1 - y0) // eps)
    nx, ny = int(nx), int(ny)
    touched = set()
    for poly in region.boundaries():
        for a, b in poly.edges():
            i0 = max(int((min(a[0], b[0]) - x0) // eps) - 1, 0)
            i1 = min(int((max(a[0], b[0]) - x0) // eps) + 1, nx - 1)
            j0 = max(int((min(a[1], b[1]) - y0) // eps) - 1, 0)
            j1 = min(int((max(a[1], b[1]) - y0) // eps) + 1, ny - 1)
            for i in range(i0, i1 + 1):
                for j in range(j0, j1 + 1):
                    if (i, j) in touched:
                        continue
                    sq = Rect(x0 + i * eps, x0 + (i + 1) * eps, y0 + j * eps, y0 + (j + 1) * eps)
                    if _segment_meets_rect(a, b, sq):
                        touched.add((i, j))
    bad = []
    for i in range(nx):
        for j in range(ny):
            if (i, j) in touched:
                continue
            c = Point(x0 + (i + Fraction(1, 2)) * eps, y0 + (j + Fraction(1, 2)) * eps)
            if point_in(c, region) != "outside":
                bad.append((i, j))
    return {
        "simple_disjoint": {"pass": simple_ok, "problems": problems},
        "hole_diameters2": {"pass": diam_ok, "values": diam},
        "density": {"pass": not bad, "eps": eps, "bad_squares": bad},
        "pass": simple_ok and diam_ok and not bad,
    }
