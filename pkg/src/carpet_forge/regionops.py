"""Exact boolean operations on polygonal regions.

The plane is cut into vertical slabs at every vertex abscissa and every
proper edge crossing.  Inside a slab no two edges cross, so a bottom-to-top
winding sweep yields the result as a list of trapezoids; their boundary is
then re-chained into loops.  All arithmetic is exact.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .geom import (EMPTY, GeometryError, Point, Polygon, Rect, Region, on_segment,
                   point_in, point_in_polygon, segments_meet, signed_area2, simplify)

_PREDICATES = {
    "union": lambda a, b: a or b,
    "intersect": lambda a, b: a and b,
    "difference": lambda a, b: a and not b,
    "xor": lambda a, b: a != b,
}


@dataclass(frozen=True)
class Shape:
    """Result of a boolean operation.

    ``regions`` are the full-dimensional components.  ``boundary_only`` holds
    measure-zero pieces (segments as point pairs, or single points) where two
    closed operands touch without overlapping; they are only reported for
    intersections.
    """

    regions: tuple = ()
    boundary_only: tuple = ()

    @property
    def is_empty(self) -> bool:
        return not self.regions

    @property
    def touches(self) -> bool:
        return bool(self.regions or self.boundary_only)

    @property
    def area(self) -> Fraction:
        return sum((r.area for r in self.regions), Fraction(0))

    @property
    def bounds(self) -> tuple:
        if not self.regions:
            raise GeometryError("empty set")
        bs = [r.bounds for r in self.regions]
        return (min(b[0] for b in bs), max(b[1] for b in bs),
                min(b[2] for b in bs), max(b[3] for b in bs))

    def region(self) -> Region:
        if not self.regions:
            return EMPTY
        if len(self.regions) > 1:
            raise GeometryError(f"shape has {len(self.regions)} components")
        return self.regions[0]

    def loops(self) -> list:
        out = []
        for r in self.regions:
            out.extend(r.boundaries())
        return out

    def classify(self, p) -> str:
        best = "outside"
        for r in self.regions:
            w = point_in(p, r)
            if w == "inside":
                return w
            if w == "boundary":
                best = w
        return best


def _loops_of(obj) -> list:
    if obj is None:
        return []
    if isinstance(obj, Shape):
        return [p.vertices for p in obj.loops()]
    if isinstance(obj, Region):
        return [p.vertices for p in obj.boundaries()]
    if isinstance(obj, Polygon):
        return [obj.ccw().vertices]
    if isinstance(obj, Rect):
        return [obj.polygon().vertices]
    # iterable of shapes/polygons
    out = []
    for item in obj:
        out.extend(_loops_of(item))
    return out


def _edges(loops, tag):
    out = []
    for loop in loops:
        pts = simplify(loop)
        n = len(pts)
        if n < 3:
            continue
        for i in range(n):
            a, b = pts[i], pts[(i + 1) % n]
            if a[0] == b[0]:
                continue
            # +1 when crossed upward enters the ccw-oriented interior
            if a[0] < b[0]:
                out.append((a, b, tag, 1))
            else:
                out.append((b, a, tag, -1))
    return out


def _y_at(edge, x):
    (x0, y0), (x1, y1) = edge[0], edge[1]
    if x == x0:
        return y0
    if x == x1:
        return y1
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0)


def _slab_xs(edges, extra_xs=()):
    xs = set(extra_xs)
    for a, b, _, _ in edges:
        xs.add(a[0])
        xs.add(b[0])
    xs = sorted(xs)
    if len(xs) < 2:
        return xs
    # proper crossings inside slabs add abscissae
    spanning = _spanning(edges, xs)
    extra = set()
    for k in range(len(xs) - 1):
        xl, xr = xs[k], xs[k + 1]
        es = spanning[k]
        if len(es) < 2:
            continue
        ends = [(_y_at(e, xl), _y_at(e, xr)) for e in es]
        order_l = sorted(range(len(es)), key=lambda i: (ends[i][0], ends[i][1]))
        order_r = sorted(range(len(es)), key=lambda i: (ends[i][1], ends[i][0]))
        if order_l == order_r:
            continue
        for ii in range(len(es)):
            yl_i, yr_i = ends[ii]
            for jj in range(ii + 1, len(es)):
                yl_j, yr_j = ends[jj]
                if (yl_i - yl_j) * (yr_i - yr_j) < 0:
                    # solve yl_i + t*(yr_i-yl_i) = yl_j + t*(yr_j-yl_j)
                    t = (yl_j - yl_i) / ((yr_i - yl_i) - (yr_j - yl_j))
                    extra.add(xl + t * (xr - xl))
    if extra:
        xs = sorted(set(xs) | extra)
    return xs


def _spanning(edges, xs):
    """For each slab index, the edges whose x-range covers it."""
    slabs = [[] for _ in range(max(len(xs) - 1, 0))]
    for e in edges:
        i0 = bisect.bisect_left(xs, e[0][0])
        i1 = min(bisect.bisect_left(xs, e[1][0]), len(slabs))
        for k in range(i0, i1):
            slabs[k].append(e)
    return slabs


def _trapezoids(edges, predicate, xs, base=None):
    """Trapezoids of the slabs where ``predicate`` holds.

    ``base[k]`` holds winding offsets (per tag) contributed by edges lying
    wholly below everything kept in slab ``k``.
    """
    spanning = _spanning(edges, xs)
    traps = []  # (xl, xr, bot_l, bot_r, top_l, top_r)
    for k in range(len(xs) - 1):
        xl, xr = xs[k], xs[k + 1]
        es = spanning[k]
        if not es:
            continue
        groups = {}
        for e in es:
            key = (_y_at(e, xl), _y_at(e, xr))
            d = groups.setdefault(key, [0, 0, 0])
            d[e[2]] += e[3]
        keys = sorted(groups, key=lambda kk: (kk[0] + kk[1], kk[0]))
        w = list(base[k]) if base is not None else [0, 0, 0]
        inside = False
        start = None
        for key in keys:
            for t in range(3):
                w[t] += groups[key][t]
            now = predicate(w[0] != 0, w[1] != 0) and (base is None or w[2] != 0)
            if now and not inside:
                start = key
            elif inside and not now:
                traps.append((xl, xr, start[0], start[1], key[0], key[1]))
            inside = now
    return traps


def _merged(intervals) -> tuple:
    """Disjoint sorted union of closed intervals as (starts, ends)."""
    starts, ends = [], []
    for a, b in sorted(intervals):
        if ends and a <= ends[-1]:
            if b > ends[-1]:
                ends[-1] = b
        else:
            starts.append(a)
            ends.append(b)
    return starts, ends


def _interval_cover(merged, y0, y1):
    starts, ends = merged
    k = bisect.bisect_right(starts, y0) - 1
    return k >= 0 and ends[k] >= y1


def _boundary_edges(traps):
    edges = []
    right_sides = {}
    left_sides = {}
    for xl, xr, bl, br, tl, tr in traps:
        edges.append((Point(xl, bl), Point(xr, br)))
        edges.append((Point(xr, tr), Point(xl, tl)))
        if tr > br:
            right_sides.setdefault(xr, []).append((br, tr))
        if tl > bl:
            left_sides.setdefault(xl, []).append((bl, tl))
    for x in set(right_sides) | set(left_sides):
        ls = right_sides.get(x, [])
        rs = left_sides.get(x, [])
        ys = sorted({y for iv in ls + rs for y in iv})
        ls, rs = _merged(ls), _merged(rs)
        for y0, y1 in zip(ys, ys[1:]):
            in_l = _interval_cover(ls, y0, y1)
            in_r = _interval_cover(rs, y0, y1)
            if in_l and not in_r:
                edges.append((Point(x, y0), Point(x, y1)))
            elif in_r and not in_l:
                edges.append((Point(x, y1), Point(x, y0)))
    return [e for e in edges if e[0] != e[1]]


def _turn_key(incoming, outgoing):
    """Order candidates by counterclockwise angle from the reversed incoming direction."""
    rx, ry = -incoming[0], -incoming[1]
    dx, dy = outgoing
    cross = rx * dy - ry * dx
    dot = rx * dx + ry * dy
    if cross == 0:
        if dot > 0:
            return (-1, Fraction(0))  # straight back: last resort
        return (1, Fraction(-10 ** 30))
    if cross > 0:
        return (0, -dot / cross)
    return (1, -dot / cross)


def _chain(edges):
    outgoing = {}
    for e in edges:
        outgoing.setdefault(e[0], []).append(e)
    used = set()
    loops = []
    for first in edges:
        if id(first) in used:
            continue
        used.add(id(first))
        loop = [first[0]]
        cur = first
        while True:
            v = cur[1]
            cands = [c for c in outgoing.get(v, []) if id(c) not in used]
            if v == first[0]:
                cands.append(first)
            if not cands:
                raise GeometryError("open boundary chain")
            if len(cands) > 1:
                inc = (cur[1][0] - cur[0][0], cur[1][1] - cur[0][1])
                # leftmost turn keeps the traced face on one side of a pinch vertex
                cands.sort(key=lambda c: _turn_key(inc, (c[1][0] - c[0][0], c[1][1] - c[0][1])),
                           reverse=True)
            cur = cands[0]
            if cur is first:
                break
            used.add(id(cur))
            loop.append(cur[0])
        loops.append(loop)
    return loops


def _assemble(loops) -> tuple:
    outers, holes = [], []
    for loop in loops:
        pts = simplify(loop)
        if len(pts) < 3:
            continue
        a2 = signed_area2(pts)
        if a2 > 0:
            outers.append(Polygon(tuple(pts)))
        elif a2 < 0:
            holes.append(Polygon(tuple(pts)))
    outers.sort(key=lambda p: p.area)
    assigned = {i: [] for i in range(len(outers))}
    for h in holes:
        probe = _interior_probe(h)
        for i, o in enumerate(outers):
            if point_in_polygon(probe, o) == "inside":
                assigned[i].append(h)
                break
        else:
            raise GeometryError("orphan hole while assembling boolean result")
    regions = [Region(o, tuple(assigned[i])) for i, o in enumerate(outers)]
    regions.sort(key=lambda r: (r.outer.bounds[0], r.outer.bounds[2]))
    return tuple(regions)


def _interior_probe(poly: Polygon) -> Point:
    """A point strictly inside the (oriented) polygon, near one of its edges."""
    verts = poly.vertices
    ccw = signed_area2(verts) > 0
    for a, b in poly.edges():
        mx, my = (a[0] + b[0]) / 2, (a[1] + b[1]) / 2
        nx, ny = -(b[1] - a[1]), b[0] - a[0]
        if not ccw:
            nx, ny = -nx, -ny
        eps = Fraction(1, 2)
        for _ in range(60):
            p = Point(mx + eps * nx, my + eps * ny)
            if point_in_polygon(p, poly) == "inside":
                return p
            eps /= 4
    raise GeometryError("could not find an interior probe")


def _bounds_of(edges) -> tuple:
    return (min(e[0][0] for e in edges), max(e[1][0] for e in edges),
            min(min(e[0][1], e[1][1]) for e in edges), max(max(e[0][1], e[1][1]) for e in edges))


def _window_trapezoids(edges, predicate, window):
    """Trapezoids restricted to the closed rectangle ``window``.

    Edges wholly above the window never affect winding inside it and are
    dropped; edges wholly below collapse into per-slab offsets.
    """
    X0, X1, Y0, Y1 = window
    keep, below = [], []
    for e in edges:
        if e[1][0] <= X0 or e[0][0] >= X1:
            continue
        lo, hi = min(e[0][1], e[1][1]), max(e[0][1], e[1][1])
        if lo > Y1:
            continue
        if hi < Y0:
            below.append(e)
        else:
            keep.append(e)
    if Y0 == Y1:
        return []
    frame = [(Point(X0, Y0), Point(X1, Y0), 2, 1), (Point(X0, Y1), Point(X1, Y1), 2, -1)]
    keep += frame
    xs = {x for x in _slab_xs(keep, (X0, X1)) if X0 <= x <= X1}
    # offsets from the collapsed edges change only at their ends
    xs.update(x for e in below for x in (e[0][0], e[1][0]) if X0 < x < X1)
    xs = sorted(xs)
    nslab = len(xs) - 1
    diff = [[0, 0, 0] for _ in range(nslab + 1)]
    for e in below:
        i0 = bisect.bisect_left(xs, max(e[0][0], X0))
        i1 = min(bisect.bisect_left(xs, min(e[1][0], X1)), nslab)
        if i0 < i1:
            diff[i0][e[2]] += e[3]
            diff[i1][e[2]] -= e[3]
    base, run = [], [0, 0, 0]
    for k in range(nslab):
        run = [run[t] + diff[k][t] for t in range(3)]
        base.append(tuple(run))
    return _trapezoids(keep, predicate, xs, base)


def boolean(a, b, op: str) -> Shape:
    predicate = _PREDICATES[op]
    ea, eb = _edges(_loops_of(a), 0), _edges(_loops_of(b), 1)
    edges = ea + eb
    if not edges:
        return Shape()
    window = None
    if op in ("intersect", "difference") and ea:
        window = _bounds_of(ea)
        if op == "intersect" and eb:
            wb = _bounds_of(eb)
            window = (max(window[0], wb[0]), min(window[1], wb[1]),
                      max(window[2], wb[2]), min(window[3], wb[3]))
        if window[0] >= window[1] or window[2] > window[3]:
            return Shape((), _touching(a, b, ()) if op == "intersect" else ())
    if window is None:
        xs = _slab_xs(edges)
        traps = _trapezoids(edges, predicate, xs)
    else:
        traps = _window_trapezoids(edges, predicate, window)
    regions = _assemble(_chain(_boundary_edges(traps))) if traps else ()
    touch = ()
    if op == "intersect":
        touch = _touching(a, b, regions)
    return Shape(regions, touch)


def region_ops(a, b, op: str) -> Shape:
    """Exact union / intersect / difference of two regions (or shapes, polygons, rects)."""
    if op not in ("union", "intersect", "difference"):
        raise ValueError(f"unknown operation {op!r}")
    return boolean(a, b, op)


def union_all(items: Iterable) -> Shape:
    """Union of many closed polygonal sets (touching pieces merge)."""
    return boolean(list(items), None, "union")


def _touching(a, b, regions) -> tuple:
    """Measure-zero contact between the boundaries of ``a`` and ``b`` not inside ``regions``."""
    la, lb = _loops_of(a), _loops_of(b)
    pieces = []
    ea = [(p[i], p[(i + 1) % len(p)]) for p in la for i in range(len(p))]
    eb = [(p[i], p[(i + 1) % len(p)]) for p in lb for i in range(len(p))]
    if not ea or not eb:
        return ()
    eb.sort(key=lambda e: min(e[0][0], e[1][0]))
    b_lo = [min(e[0][0], e[1][0]) for e in eb]
    for a0, a1 in ea:
        ax0, ax1 = min(a0[0], a1[0]), max(a0[0], a1[0])
        ay0, ay1 = min(a0[1], a1[1]), max(a0[1], a1[1])
        for b0, b1 in eb[:bisect.bisect_right(b_lo, ax1)]:
            if max(b0[0], b1[0]) < ax0 or max(b0[1], b1[1]) < ay0 or min(b0[1], b1[1]) > ay1:
                continue
            if not segments_meet(a0, a1, b0, b1):
                continue
            pts = [p for p in (a0, a1) if on_segment(p, b0, b1)]
            pts += [p for p in (b0, b1) if on_segment(p, a0, a1) and p not in pts]
            if len(pts) >= 2:
                pts.sort()
                piece = (pts[0], pts[-1])
                probe = Point((pts[0][0] + pts[-1][0]) / 2, (pts[0][1] + pts[-1][1]) / 2)
            elif len(pts) == 1:
                piece = (pts[0],)
                probe = pts[0]
            else:
                from .geom import line_intersection
                x = line_intersection(a0, a1, b0, b1)
                piece = (x,)
                probe = x
            if any(point_in(probe, r) != "outside" for r in regions):
                continue
            if piece not in pieces:
                pieces.append(piece)
    segs = [p for p in pieces if len(p) == 2]
    pieces = [p for p in pieces
              if len(p) == 2 or not any(on_segment(p[0], s[0], s[1]) for s in segs)]
    pieces.sort()
    return tuple(pieces)


def contains(outer, inner) -> bool:
    """Exact test ``inner ⊆ outer`` for closed polygonal sets."""
    return boolean(inner, outer, "difference").is_empty


def x_projection(shape) -> list:
    """Projection of a closed polygonal set onto the x-axis as sorted disjoint intervals."""
    ivs = []
    for loop in _loops_of(shape):
        n = len(loop)
        for i in range(n):
            a, b = loop[i], loop[(i + 1) % n]
            ivs.append((min(a[0], b[0]), max(a[0], b[0])))
    ivs.sort()
    out = []
    for lo, hi in ivs:
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return out


def _line_cover(loops, coord: int, c) -> list:
    """Closed intervals of the line ``{p[coord] = c}`` lying inside the set (even-odd)."""
    other = 1 - coord
    hits = []
    for loop in loops:
        n = len(loop)
        for i in range(n):
            a, b = loop[i], loop[(i + 1) % n]
            lo, hi = (a, b) if a[coord] <= b[coord] else (b, a)
            if lo[coord] <= c < hi[coord]:
                t = (c - lo[coord]) / (hi[coord] - lo[coord])
                hits.append(lo[other] + t * (hi[other] - lo[other]))
    hits.sort()
    return [(hits[k], hits[k + 1]) for k in range(0, len(hits) - 1, 2)]


def band_projection(shape, y0, y1) -> list:
    """x-projection of ``shape ∩ ([-inf, inf] x [y0, y1])`` as sorted disjoint intervals.

    A vertical line meets the intersection iff a boundary edge crosses it
    inside the band or the band's bottom line is inside the shape there.
    """
    loops = _loops_of(shape)
    ivs = list(_line_cover(loops, 1, y0))
    for loop in loops:
        n = len(loop)
        for i in range(n):
            a, b = loop[i], loop[(i + 1) % n]
            if max(a[1], b[1]) < y0 or min(a[1], b[1]) > y1:
                continue
            if a[1] == b[1]:
                ivs.append((min(a[0], b[0]), max(a[0], b[0])))
                continue
            ts = []
            for y in (y0, y1):
                t = (y - a[1]) / (b[1] - a[1])
                if 0 <= t <= 1:
                    ts.append(t)
            for t in (0, 1):
                p = (a, b)[t]
                if y0 <= p[1] <= y1:
                    ts.append(Fraction(t))
            xs = [a[0] + t * (b[0] - a[0]) for t in ts]
            ivs.append((min(xs), max(xs)))
    ivs.sort()
    out = []
    for lo, hi in ivs:
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return out


def vertical_cover(shape, x) -> list:
    """Closed y-intervals of ``shape ∩ Vert(x)``, boundary contacts included."""
    loops = _loops_of(shape)
    ivs = _line_cover(loops, 0, x)
    for loop in loops:
        n = len(loop)
        for i in range(n):
            a, b = loop[i], loop[(i + 1) % n]
            if a[0] == b[0] == x:
                ivs.append((min(a[1], b[1]), max(a[1], b[1])))
            elif min(a[0], b[0]) <= x <= max(a[0], b[0]) and a[0] != b[0]:
                y = a[1] + (x - a[0]) * (b[1] - a[1]) / (b[0] - a[0])
                ivs.append((y, y))
    return sorted(ivs)
