"""Exact rational planar primitives.

Every coordinate is a :class:`fractions.Fraction`; nothing in this module
rounds.  Polygons are simple closed curves given by their vertex cycle,
regions are an outer polygon minus open polygonal holes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

Q = Fraction


class GeometryError(ValueError):
    pass


def q(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def fmt(value: Fraction) -> str:
    value = q(value)
    return f"{value.numerator}/{value.denominator}"


class Point(NamedTuple):
    x: Fraction
    y: Fraction

    def __add__(self, other):  # type: ignore[override]
        return Point(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Point(self.x - other[0], self.y - other[1])


def P(x, y) -> Point:
    return Point(q(x), q(y))


@dataclass(frozen=True)
class Rect:
    x_lo: Fraction
    x_hi: Fraction
    y_lo: Fraction
    y_hi: Fraction

    def __post_init__(self):
        for name in ("x_lo", "x_hi", "y_lo", "y_hi"):
            object.__setattr__(self, name, q(getattr(self, name)))
        if not (self.x_lo < self.x_hi and self.y_lo < self.y_hi):
            raise GeometryError(f"degenerate rectangle {self}")

    @property
    def width(self) -> Fraction:
        return self.x_hi - self.x_lo

    @property
    def height(self) -> Fraction:
        return self.y_hi - self.y_lo

    @property
    def area(self) -> Fraction:
        return self.width * self.height

    @property
    def center(self) -> Point:
        return Point((self.x_lo + self.x_hi) / 2, (self.y_lo + self.y_hi) / 2)

    def contains_point(self, p, closed: bool = True) -> bool:
        if closed:
            return self.x_lo <= p[0] <= self.x_hi and self.y_lo <= p[1] <= self.y_hi
        return self.x_lo < p[0] < self.x_hi and self.y_lo < p[1] < self.y_hi

    def contains_rect(self, other: "Rect") -> bool:
        return (self.x_lo <= other.x_lo and other.x_hi <= self.x_hi
                and self.y_lo <= other.y_lo and other.y_hi <= self.y_hi)

    def meets(self, other: "Rect") -> bool:
        """Closed rectangles share at least one point."""
        return (self.x_lo <= other.x_hi and other.x_lo <= self.x_hi
                and self.y_lo <= other.y_hi and other.y_lo <= self.y_hi)

    def interiors_meet(self, other: "Rect") -> bool:
        return (self.x_lo < other.x_hi and other.x_lo < self.x_hi
                and self.y_lo < other.y_hi and other.y_lo < self.y_hi)

    def translate(self, dx, dy) -> "Rect":
        return Rect(self.x_lo + dx, self.x_hi + dx, self.y_lo + dy, self.y_hi + dy)

    def polygon(self) -> "Polygon":
        return Polygon((Point(self.x_lo, self.y_lo), Point(self.x_hi, self.y_lo),
                        Point(self.x_hi, self.y_hi), Point(self.x_lo, self.y_hi)))

    def region(self) -> "Region":
        return Region(self.polygon())


def signed_area2(points: Sequence) -> Fraction:
    """Twice the signed shoelace area (positive for counterclockwise)."""
    n = len(points)
    total = Fraction(0)
    for i in range(n):
        x0, y0 = points[i]
        x1, y1 = points[(i + 1) % n]
        total += x0 * y1 - x1 * y0
    return total


def orient(a, b, c) -> int:
    d = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return (d > 0) - (d < 0)


def on_segment(p, a, b) -> bool:
    """``p`` lies on the closed segment ``ab``."""
    if orient(a, b, p) != 0:
        return False
    return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def segments_meet(a, b, c, d) -> bool:
    """Closed segments ``ab`` and ``cd`` share a point."""
    if (max(a[0], b[0]) < min(c[0], d[0]) or max(c[0], d[0]) < min(a[0], b[0])
            or max(a[1], b[1]) < min(c[1], d[1]) or max(c[1], d[1]) < min(a[1], b[1])):
        return False
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 != o2 and o3 != o4:
        return True
    return (on_segment(c, a, b) or on_segment(d, a, b)
            or on_segment(a, c, d) or on_segment(b, c, d))


def segments_cross_properly(a, b, c, d) -> bool:
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    return o1 * o2 < 0 and o3 * o4 < 0


def line_intersection(a, b, c, d) -> Point | None:
    """Intersection of the supporting lines of ``ab`` and ``cd`` (None if parallel)."""
    den = (b[0] - a[0]) * (d[1] - c[1]) - (b[1] - a[1]) * (d[0] - c[0])
    if den == 0:
        return None
    t = ((c[0] - a[0]) * (d[1] - c[1]) - (c[1] - a[1]) * (d[0] - c[0])) / den
    return Point(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))


def bbox(points: Iterable) -> Rect | tuple:
    xs, ys = [], []
    for x, y in points:
        xs.append(x)
        ys.append(y)
    if not xs:
        raise GeometryError("empty set")
    return (min(xs), max(xs), min(ys), max(ys))


@dataclass(frozen=True)
class Polygon:
    vertices: tuple
    _bbox: tuple = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        verts = tuple(Point(q(x), q(y)) for x, y in self.vertices)
        if len(verts) < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "_bbox", bbox(verts))

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    @property
    def bounds(self) -> tuple:
        return self._bbox

    @property
    def signed_area(self) -> Fraction:
        return signed_area2(self.vertices) / 2

    @property
    def area(self) -> Fraction:
        return abs(self.signed_area)

    def is_ccw(self) -> bool:
        return self.signed_area > 0

    def ccw(self) -> "Polygon":
        return self if self.is_ccw() else self.reversed()

    def cw(self) -> "Polygon":
        return self.reversed() if self.is_ccw() else self

    def reversed(self) -> "Polygon":
        return Polygon(tuple(reversed(self.vertices)))

    def edges(self):
        v = self.vertices
        n = len(v)
        for i in range(n):
            yield v[i], v[(i + 1) % n]

    def translate(self, dx, dy) -> "Polygon":
        return Polygon(tuple(Point(x + dx, y + dy) for x, y in self.vertices))

    def is_simple(self) -> bool:
        """Exact O(n^2) simplicity test: only consecutive edges may touch."""
        edges = list(self.edges())
        n = len(edges)
        if self.signed_area == 0:
            return False
        for i in range(n):
            a, b = edges[i]
            if a == b:
                return False
            for j in range(i + 1, n):
                c, d = edges[j]
                if j == i + 1 or (i == 0 and j == n - 1):
                    # adjacent edges share one vertex; reject folding back
                    shared = b if j == i + 1 else a
                    other = d if j == i + 1 else c
                    mine = a if j == i + 1 else b
                    if orient(mine, shared, other) == 0 and (
                            on_segment(other, mine, shared) or on_segment(mine, shared, other)):
                        return False
                    continue
                if segments_meet(a, b, c, d):
                    return False
        return True


def _as_polygon(obj) -> Polygon:
    if isinstance(obj, Polygon):
        return obj
    if isinstance(obj, Rect):
        return obj.polygon()
    return Polygon(tuple(obj))


@dataclass(frozen=True)
class Region:
    """Closed planar set: ``outer`` minus the open interiors of ``holes``.

    The distinguished empty region has ``outer is None``.
    """

    outer: Polygon | None
    holes: tuple = ()

    def __post_init__(self):
        if self.outer is None:
            if self.holes:
                raise GeometryError("empty region cannot carry holes")
            return
        object.__setattr__(self, "outer", _as_polygon(self.outer).ccw())
        object.__setattr__(self, "holes", tuple(_as_polygon(h).cw() for h in self.holes))

    @property
    def is_empty(self) -> bool:
        return self.outer is None

    @property
    def area(self) -> Fraction:
        if self.outer is None:
            return Fraction(0)
        return self.outer.area - sum((h.area for h in self.holes), Fraction(0))

    @property
    def bounds(self) -> tuple:
        if self.outer is None:
            raise GeometryError("empty set")
        return self.outer.bounds

    def boundaries(self):
        if self.outer is None:
            return []
        return [self.outer, *self.holes]

    def vertices(self):
        for poly in self.boundaries():
            yield from poly.vertices

    def check_invariants(self) -> list:
        """Return a list of violated invariants (empty when valid)."""
        problems = []
        if self.outer is None:
            return problems
        loops = self.boundaries()
        for k, poly in enumerate(loops):
            if not poly.is_simple():
                problems.append(f"boundary {k} is not simple")
        for k, h in enumerate(self.holes):
            for v in h.vertices:
                if point_in_polygon(v, self.outer) != "inside":
                    problems.append(f"hole {k} not strictly inside outer")
                    break
        for i in range(len(loops)):
            for j in range(i + 1, len(loops)):
                if polygons_meet(loops[i], loops[j], boundary_only=True):
                    problems.append(f"boundaries {i} and {j} meet")
        return problems


EMPTY = Region(None)


def width(obj) -> Fraction:
    """Horizontal extent lub(x) - glb(x) of a bounded nonempty set."""
    x0, x1, _, _ = _extent(obj)
    return x1 - x0


def height(obj) -> Fraction:
    _, _, y0, y1 = _extent(obj)
    return y1 - y0


def _extent(obj) -> tuple:
    if isinstance(obj, Rect):
        return (obj.x_lo, obj.x_hi, obj.y_lo, obj.y_hi)
    if isinstance(obj, (Polygon, Region)):
        return obj.bounds
    if hasattr(obj, "bounds"):
        return obj.bounds
    return bbox(obj)


def point_in_polygon(p, poly: Polygon) -> str:
    """Classify ``p`` against the closed polygon: inside, boundary or outside."""
    x0, x1, y0, y1 = poly.bounds
    px, py = p
    if px < x0 or px > x1 or py < y0 or py > y1:
        return "outside"
    inside = False
    for a, b in poly.edges():
        if on_segment(p, a, b):
            return "boundary"
        ay, by = a[1], b[1]
        if (ay > py) != (by > py):
            # exact crossing abscissa of the horizontal ray
            xc = a[0] + (py - ay) * (b[0] - a[0]) / (by - ay)
            if xc > px:
                inside = not inside
    return "inside" if inside else "outside"


def point_in(p, region) -> str:
    """Classify ``p`` against a Region (holes are open, so their edges count as boundary)."""
    if isinstance(region, (Polygon, Rect)):
        return point_in_polygon(p, _as_polygon(region))
    if region.outer is None:
        return "outside"
    where = point_in_polygon(p, region.outer)
    if where != "inside":
        return where
    for h in region.holes:
        w = point_in_polygon(p, h)
        if w == "inside":
            return "outside"
        if w == "boundary":
            return "boundary"
    return "inside"


def polygons_meet(a: Polygon, b: Polygon, boundary_only: bool = False) -> bool:
    """Closed polygons ``a`` and ``b`` share a point.

    With ``boundary_only`` the test is between the two boundary curves.
    """
    ax0, ax1, ay0, ay1 = a.bounds
    bx0, bx1, by0, by1 = b.bounds
    if ax1 < bx0 or bx1 < ax0 or ay1 < by0 or by1 < ay0:
        return False
    b_edges = [e for e in b.edges()
               if not (max(e[0][0], e[1][0]) < ax0 or min(e[0][0], e[1][0]) > ax1
                       or max(e[0][1], e[1][1]) < ay0 or min(e[0][1], e[1][1]) > ay1)]
    for p0, p1 in a.edges():
        for c0, c1 in b_edges:
            if segments_meet(p0, p1, c0, c1):
                return True
    if boundary_only:
        return False
    return (point_in_polygon(a.vertices[0], b) != "outside"
            or point_in_polygon(b.vertices[0], a) != "outside")


def polygon_diameter2(poly: Polygon) -> Fraction:
    """Squared Euclidean diameter (attained at vertices)."""
    v = poly.vertices
    best = Fraction(0)
    for i in range(len(v)):
        for j in range(i + 1, len(v)):
            d = (v[i][0] - v[j][0]) ** 2 + (v[i][1] - v[j][1]) ** 2
            if d > best:
                best = d
    return best


def simplify(points: Sequence) -> list:
    """Drop repeated and collinear-intermediate vertices of a closed cycle."""
    pts = []
    for p in points:
        if not pts or pts[-1] != p:
            pts.append(p)
    while len(pts) > 1 and pts[0] == pts[-1]:
        pts.pop()
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        out = []
        n = len(pts)
        for i in range(n):
            a, b, c = pts[i - 1], pts[i], pts[(i + 1) % n]
            if orient(a, b, c) == 0 and (
                    (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1]) >= 0):
                changed = True
                continue
            out.append(b)
        pts = out
    return pts
