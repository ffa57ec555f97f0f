"""Divisions, polygonal line families and stage partitions.

Every stage is described in a local frame: ``u`` runs along the lines and
``v`` across them.  Odd stages have vertical strips and horizontal lines
(``u = x``, ``v = y``); even stages swap the roles (``u = y``, ``v = x``).

A line is ``v = level + amp * Z(u)`` where ``Z`` is the comb profile of the
strip containing ``u``: ``k/2`` tent teeth of width ``w = (a - s)/k``, a flat
middle of width ``s``, then ``k/2`` more teeth.  ``Z`` vanishes on strip
edges, so every line meets every strip edge at its straight level.
Amplitudes vanish on the flat levels ``O_n`` and taper next to the upper
flat level, which keeps consecutive lines at least ``d/2`` apart.

Cells are addressed by ``(i, j)``: strip ``i`` (1-based) and the band
between lines ``j-1`` and ``j`` (``j = 0 .. m+1``); they are built lazily.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .geom import GeometryError, Point, Polygon, Rect, simplify
from .schedule import HALF, StageParams, t

D = Rect(HALF, 1, 0, 2)


class PartitionError(ValueError):
    pass


# divisions

@dataclass(frozen=True)
class Division:
    orientation: str  # "vertical" | "horizontal"
    mesh: Fraction

    def __post_init__(self):
        if self.orientation not in ("vertical", "horizontal"):
            raise PartitionError(f"bad orientation {self.orientation!r}")
        span = HALF if self.orientation == "vertical" else Fraction(2)
        if (span / self.mesh).denominator != 1:
            raise PartitionError(f"mesh {self.mesh} does not tile D")

    @property
    def count(self) -> int:
        span = HALF if self.orientation == "vertical" else Fraction(2)
        return int(span / self.mesh)

    def strip(self, i: int) -> Rect:
        a = self.mesh
        if not 1 <= i <= self.count:
            raise PartitionError("strip index out of range")
        if self.orientation == "vertical":
            return Rect(HALF + (i - 1) * a, HALF + i * a, 0, 2)
        return Rect(HALF, 1, (i - 1) * a, i * a)

    @property
    def strips(self) -> Iterator[Rect]:
        return (self.strip(i) for i in range(1, self.count + 1))


def refine_division(r_hat: Division) -> Division:
    return Division(r_hat.orientation, r_hat.mesh / 4)


def next_division(rects: Iterable[Rect], n: int, d: Fraction | None = None) -> Division:
    """Division for stage ``n+1`` from the straightened cells of stage ``n``.

    The vertices of the rectangles are projected on the axis across the
    stage-``n`` strips; they must form a uniform grid.
    """
    odd = n % 2 == 1
    coords = set()
    for r in rects:
        if odd:
            coords.update((r.y_lo, r.y_hi))
        else:
            coords.update((r.x_lo, r.x_hi))
    vals = sorted(coords)
    if len(vals) < 2:
        raise PartitionError("no rectangles to project")
    gaps = {b - a for a, b in zip(vals, vals[1:])}
    if len(gaps) != 1:
        raise PartitionError("projected vertices are not uniform")
    mesh = gaps.pop()
    if d is not None and mesh != d:
        raise PartitionError(f"mesh {mesh} differs from d_n = {d}")
    return Division("horizontal" if odd else "vertical", mesh)


# ordinate sets

@dataclass(frozen=True)
class OrdinateSet:
    values: tuple
    source: str  # "ordinates" | "abscissas"

    def nxt(self, y) -> Fraction:
        k = bisect.bisect_right(self.values, y)
        if k >= len(self.values):
            raise PartitionError("no successor")
        return self.values[k]


def nxt(y, O: OrdinateSet) -> Fraction:
    return O.nxt(y)


@dataclass(frozen=True)
class Hole:
    """Open square hole (stored by its closure) introduced at ``stage``."""
    rect: Rect
    stage: int = 0


def _hole_rects(holes) -> list:
    return [h.rect if isinstance(h, Hole) else h for h in holes]


def ordinates(holes: Sequence, n: int, prev_a: Fraction | None = None) -> OrdinateSet:
    """``O_n``: flat levels across the lines of stage ``n``."""
    rects = _hole_rects(holes)
    if n % 2 == 1:
        vals = {Fraction(0), Fraction(2)}
        for r in rects:
            vals.update((r.y_lo, r.y_hi))
        return OrdinateSet(tuple(sorted(vals)), "ordinates")
    if n > 4:
        left = t(n - 4)
    else:
        if prev_a is None:
            raise PartitionError("even stage <= 4 needs a_{n-1}")
        left = 1 - prev_a / 2
    vals = {left, Fraction(1), t(n)}
    for r in rects:
        for x in (r.x_lo, r.x_hi):
            if x >= left:
                vals.add(x)
    return OrdinateSet(tuple(sorted(vals)), "abscissas")


# line families

class LineFamily:
    """The lines ``L^{-1} .. L^{m+1}`` of one stage, evaluated lazily."""

    def __init__(self, params: StageParams, holes: Sequence = (), prev_a: Fraction | None = None):
        p = params
        self.params = p
        self.n = p.n
        self.odd = p.n % 2 == 1
        self.a, self.d, self.c, self.s, self.k = p.a, p.d, p.c, p.s, p.k
        if self.k % 2:
            raise PartitionError("k_n must be even")
        self.w = (p.a - p.s) / p.k
        if self.w <= 0:
            raise PartitionError("s_n must be below a_n")
        self.holes = tuple(holes)
        if self.odd:
            self.u_lo, self.u_hi, self.v_lo, self.v_hi = HALF, Fraction(1), Fraction(0), Fraction(2)
        else:
            self.u_lo, self.u_hi, self.v_lo, self.v_hi = Fraction(0), Fraction(2), HALF, Fraction(1)
        span_u = self.u_hi - self.u_lo
        span_v = self.v_hi - self.v_lo
        if (span_u / p.a).denominator != 1 or (span_v / p.d).denominator != 1:
            raise PartitionError("mesh does not tile D")
        self.strips = int(span_u / p.a)
        self.m = int(span_v / p.d) - 2
        if p.m != self.m:
            raise PartitionError("m_n disagrees with the schedule")
        self.O = ordinates(self.holes, p.n, prev_a)
        for o in self.O.values:
            if ((o - self.v_lo) / p.d).denominator != 1:
                raise PartitionError(f"flat level {o} is not on the d_n grid")
        self.t_in = t(p.n + 1)
        self.t_n = t(p.n)
        for z in (self.t_in, self.t_n):
            if ((z - HALF) / p.a).denominator != 1 and self.odd:
                raise PartitionError("zone lines must lie on strip edges")
            if ((z - HALF) / p.d).denominator != 1 and not self.odd:
                raise PartitionError("zone lines must lie on the d_n grid")
        half = p.k // 2
        self.local_breaks = tuple([i * self.w / 2 for i in range(p.k + 1)]
                                  + [half * self.w + p.s + i * self.w / 2 for i in range(p.k + 1)])
        self.local_z = tuple([Fraction(i % 2) for i in range(p.k + 1)] * 2)
        self._amp = {}
        self._us = {}
        self._chains = {}

    # levels and amplitudes

    def level(self, j: int) -> Fraction:
        """Straight level of line ``j`` (``-1 <= j <= m+1``)."""
        return self.v_lo + (j + 1) * self.d

    def level_index(self, v) -> int:
        """Largest ``j`` with ``level(j) <= v``."""
        return min(int((Fraction(v) - self.v_lo) // self.d) - 1, self.m + 1)

    def amp(self, j: int) -> Fraction:
        if j in self._amp:
            return self._amp[j]
        lv = self.level(j)
        vals = self.O.values
        a = Fraction(0)
        if vals[0] < lv < vals[-1] and lv not in vals:
            p = bisect.bisect_right(vals, lv)
            lo, hi = vals[p - 1], vals[p]
            r = (lv - lo) / self.d
            M = (hi - lo) / self.d
            a = min(self.c, (M - r) * self.d / 2)
        self._amp[j] = a
        return a

    # comb profile

    def strip_of(self, u) -> int:
        """1-based strip containing ``u`` (right edge belongs to the left strip)."""
        i = int(-(-(Fraction(u) - self.u_lo) // self.a))
        return min(max(i, 1), self.strips)

    def strip_range(self, i: int) -> tuple:
        return (self.u_lo + (i - 1) * self.a, self.u_lo + i * self.a)

    def comb_strip(self, i: int) -> bool:
        if self.odd:
            return self.strip_range(i)[0] >= self.t_n
        return True

    def Z(self, u) -> Fraction:
        u = Fraction(u)
        cache = self.__dict__.setdefault("_zcache", {})
        z = cache.get(u)
        if z is None:
            z = cache[u] = self._Z(u)
        return z

    def _Z(self, u: Fraction) -> Fraction:
        i = self.strip_of(u)
        if not self.comb_strip(i):
            return Fraction(0)
        x = u - self.strip_range(i)[0]
        half = (self.k // 2) * self.w
        if x > half:
            x -= half + self.s
            if x < 0:
                return Fraction(0)
        r = x - (x // self.w) * self.w
        if r <= self.w / 2:
            return 2 * r / self.w
        return 2 * (self.w - r) / self.w

    def value(self, j: int, u) -> Fraction:
        if j <= -1 or j >= self.m + 1:
            return self.level(j)
        a = self.amp(j)
        if a == 0:
            return self.level(j)
        return self.level(j) + a * self.Z(u)

    def strip_breakpoints(self, i: int) -> tuple:
        cache = self.__dict__.setdefault("_bpcache", {})
        bps = cache.get(i)
        if bps is None:
            u0, u1 = self.strip_range(i)
            bps = (u0, u1) if not self.comb_strip(i) else tuple(u0 + b for b in self.local_breaks)
            cache[i] = bps
        return bps

    def breakpoints(self, lo, hi) -> list:
        """All breakpoints of the family in ``[lo, hi]`` (strip edges included)."""
        lo, hi = max(Fraction(lo), self.u_lo), min(Fraction(hi), self.u_hi)
        out = []
        for i in range(self.strip_of(lo), self.strip_of(hi) + 1):
            for b in self.strip_breakpoints(i):
                if lo <= b <= hi and (not out or out[-1] != b):
                    out.append(b)
        return out

    def _strip_us(self, i: int) -> tuple:
        us = self._us.get(i)
        if us is None:
            u0 = self.strip_range(i)[0]
            us = tuple(u0 + b for b in self.local_breaks)
            if len(self._us) > 4096:
                self._us.clear()
            self._us[i] = us
        return us

    def chain(self, j: int, i: int) -> tuple:
        """Vertices ``(u, v)`` of line ``j`` over strip ``i``."""
        key = (j, i)
        ch = self._chains.get(key)
        if ch is not None:
            return ch
        lv = self.level(j)
        a = self.amp(j) if 0 <= j <= self.m else 0
        if not self.comb_strip(i):
            u0, u1 = self.strip_range(i)
            ch = ((u0, lv), (u1, lv))
        elif a == 0:
            ch = tuple((u, lv) for u in self._strip_us(i))
        else:
            top = lv + a
            ch = tuple((u, top if z else lv) for u, z in zip(self._strip_us(i), self.local_z))
        if len(self._chains) > 8192:
            self._chains.clear()
        self._chains[key] = ch
        return ch

    def min_gap(self, j: int) -> Fraction:
        """Exact minimum of ``L^{j+1} - L^j`` over the comb zone and over straight zones."""
        base = self.level(j + 1) - self.level(j)
        da = (self.amp(j + 1) if j + 1 <= self.m else 0) - (self.amp(j) if j >= 0 else 0)
        return base + min(Fraction(0), da)

    def to_xy(self, u, v) -> Point:
        return Point(u, v) if self.odd else Point(v, u)

    # lines as polylines in D

    def line(self, j: int) -> tuple:
        pts = []
        for i in range(1, self.strips + 1):
            for u, v in self.chain(j, i):
                pt = self.to_xy(u, v)
                if not pts or pts[-1] != pt:
                    pts.append(pt)
        return tuple(pts)


# cells

RECT, TRANSITION, TYPE1, TYPE2 = "rectangular", "transition", "type1", "type2"


@dataclass(frozen=True)
class Cell:
    n: int
    i: int
    j: int
    kind: str = field(compare=False)
    polygon: Polygon = field(compare=False, repr=False)
    lower: tuple = field(compare=False, repr=False)   # (u, v) chain of line j-1
    upper: tuple = field(compare=False, repr=False)   # (u, v) chain of line j
    typical: bool = field(compare=False, default=True)

    @property
    def key(self) -> tuple:
        return (self.n, self.i, self.j)


class Partition:
    """Lazy stage partition ``Q_n`` over a :class:`LineFamily`."""

    def __init__(self, family: LineFamily, holes: Sequence = ()):
        self.family = family
        self.n = family.n
        self.holes = tuple(holes)
        self._type2 = self._type2_cells()
        self._cache = {}

    @property
    def rows(self) -> int:
        return self.family.m + 2

    @property
    def shape(self) -> tuple:
        return (self.family.strips, self.rows)

    def exists(self, i: int, j: int) -> bool:
        f = self.family
        if not (1 <= i <= f.strips and 0 <= j <= f.m + 1):
            return False
        u0, u1 = f.strip_range(i)
        v0, v1 = f.level(j - 1), f.level(j)
        for h in _hole_rects(self.holes):
            hu0, hu1, hv0, hv1 = ((h.x_lo, h.x_hi, h.y_lo, h.y_hi) if f.odd
                                  else (h.y_lo, h.y_hi, h.x_lo, h.x_hi))
            if hu0 <= u0 and u1 <= hu1 and hv0 <= v0 and v1 <= hv1:
                return False
        return True

    def __contains__(self, cell) -> bool:
        return isinstance(cell, Cell) and cell.n == self.n and self.exists(cell.i, cell.j)

    def kind(self, i: int, j: int) -> str:
        f = self.family
        if f.odd:
            u0, u1 = f.strip_range(i)
            if u1 <= f.t_in:
                return RECT
            if u1 <= f.t_n:
                return TRANSITION
        else:
            v0, v1 = f.level(j - 1), f.level(j)
            if v1 <= f.t_in:
                return RECT
            if v1 <= f.t_n:
                return TRANSITION
        return TYPE2 if (i, j) in self._type2 else TYPE1

    def _type2_cells(self) -> set:
        f = self.family
        n = f.n
        out = set()
        prev_holes = [h for h in self.holes if isinstance(h, Hole) and h.stage == n - 1]
        for h in prev_holes:
            r = h.rect
            hu0, hu1, hv0, hv1 = ((r.x_lo, r.x_hi, r.y_lo, r.y_hi) if f.odd
                                  else (r.y_lo, r.y_hi, r.x_lo, r.x_hi))
            left = f.strip_of(hu0)          # strip ending at the hole's low edge
            right = f.strip_of(hu1) + 1     # strip starting at its high edge
            j0 = f.level_index(hv0) + 1
            j1 = f.level_index(hv1)
            for i in (left, right):
                if 1 <= i <= f.strips:
                    for j in range(j0, j1 + 1):
                        out.add((i, j))
        if f.odd and n > 5:
            # chain leftward between t_n and t_{n-5}
            lim = t(n - 5)
            frontier = sorted(out)
            while frontier:
                nxt_frontier = []
                for i, j in frontier:
                    ii = i - 1
                    if ii >= 1 and f.strip_range(ii)[0] >= f.t_n and f.strip_range(ii)[1] <= lim \
                            and (ii, j) not in out and self.exists(ii, j):
                        out.add((ii, j))
                        nxt_frontier.append((ii, j))
                frontier = nxt_frontier
        return out

    def cell(self, i: int, j: int) -> Cell:
        key = (i, j)
        c = self._cache.get(key)
        if c is not None:
            return c
        if not self.exists(i, j):
            raise PartitionError("cell not in partition")
        f = self.family
        lower = f.chain(j - 1, i)
        upper = f.chain(j, i)
        alo = f.amp(j - 1) if 0 <= j - 1 <= f.m else 0
        ahi = f.amp(j) if 0 <= j <= f.m else 0
        # flat chains keep only their end points
        lo_pts = lower if alo else (lower[0], lower[-1])
        hi_pts = upper if ahi else (upper[0], upper[-1])
        pts = [f.to_xy(u, v) for u, v in lo_pts] + [f.to_xy(u, v) for u, v in reversed(hi_pts)]
        if not f.odd:
            pts.reverse()
        poly = Polygon(tuple(pts))
        kind = self.kind(i, j)
        typical = kind in (RECT, TRANSITION) or not f.comb_strip(i) or alo == ahi
        c = Cell(f.n, i, j, kind, poly, lower, upper, typical)
        if len(self._cache) > 200000:
            self._cache.clear()
        self._cache[key] = c
        return c

    def __iter__(self) -> Iterator[Cell]:
        return self.cells()

    def cells(self, window: Rect | None = None) -> Iterator[Cell]:
        """Cells in strip-then-row order, optionally only those meeting ``window``."""
        f = self.family
        irange = range(1, f.strips + 1)
        jrange = range(0, f.m + 2)
        if window is not None:
            ulo, uhi, vlo, vhi = ((window.x_lo, window.x_hi, window.y_lo, window.y_hi) if f.odd
                                  else (window.y_lo, window.y_hi, window.x_lo, window.x_hi))
            irange = range(max(f.strip_of(ulo) - (1 if ulo == f.strip_range(f.strip_of(ulo))[0] else 0), 1),
                           f.strip_of(uhi) + 1)
            # lines stay within c of their level
            jlo = max(f.level_index(vlo - f.c) - 1, 0)
            jhi = min(f.level_index(vhi) + 1, f.m + 1)
            jrange = range(jlo, jhi + 1)
        for i in irange:
            for j in jrange:
                if self.exists(i, j):
                    c = self.cell(i, j)
                    if window is not None:
                        x0, x1, y0, y1 = c.polygon.bounds
                        if x1 < window.x_lo or x0 > window.x_hi or y1 < window.y_lo or y0 > window.y_hi:
                            continue
                    yield c

    def count(self) -> int:
        f = self.family
        total = f.strips * (f.m + 2)
        if not self.holes:
            return total
        return sum(1 for i in range(1, f.strips + 1) for j in range(f.m + 2) if self.exists(i, j))

    def neighbors(self, cell: Cell) -> list:
        """Cells sharing at least one point with ``cell`` (itself included)."""
        out = []
        for i in (cell.i - 1, cell.i, cell.i + 1):
            for j in (cell.j - 1, cell.j, cell.j + 1):
                if self.exists(i, j):
                    out.append(self.cell(i, j))
        return out

    def locate(self, p) -> list:
        """Cells whose closure contains ``p`` (several on shared boundaries)."""
        f = self.family
        u, v = (p[0], p[1]) if f.odd else (p[1], p[0])
        u, v = Fraction(u), Fraction(v)
        if not (f.u_lo <= u <= f.u_hi and f.v_lo <= v <= f.v_hi):
            return []
        strips = {f.strip_of(u)}
        lo_edge = f.strip_range(f.strip_of(u))[0]
        if u == lo_edge and f.strip_of(u) > 1:
            strips.add(f.strip_of(u) - 1)
        if u == f.strip_range(f.strip_of(u))[1] and f.strip_of(u) < f.strips:
            strips.add(f.strip_of(u) + 1)
        out = []
        for i in sorted(strips):
            # lines are increasing in j: binary search the band
            lo, hi = -1, f.m + 1
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if f.value(mid, u) <= v:
                    lo = mid
                else:
                    hi = mid
            for j in (lo, lo + 1, hi):
                if 0 <= j <= f.m + 1 and self.exists(i, j) and \
                        f.value(j - 1, u) <= v <= f.value(j, u):
                    c = self.cell(i, j)
                    if c not in out:
                        out.append(c)
        return out

    def straightened(self, i: int, j: int) -> Rect:
        """``h_n^{-1}(q_{i,j})``: the grid rectangle of the cell."""
        f = self.family
        u0, u1 = f.strip_range(i)
        v0, v1 = f.level(j - 1), f.level(j)
        return Rect(u0, u1, v0, v1) if f.odd else Rect(v0, v1, u0, u1)


def build_lines(params: StageParams, holes: Sequence = (), prev_a: Fraction | None = None) -> LineFamily:
    return LineFamily(params, holes, prev_a)


def build_cells(family: LineFamily, holes: Sequence = ()) -> Partition:
    return Partition(family, holes or family.holes)


def classify_cell(part: Partition, cell: Cell) -> str:
    return part.kind(cell.i, cell.j)


# shape measurements of comb cells

def cell_metrics(part: Partition, cell: Cell) -> dict:
    """Width, transverse thickness and cell-point heights, exactly.

    Heights are taken per half tooth: the top of the upper chain minus the
    bottom of the lower chain over that interval.
    """
    f = part.family
    lo, hi = cell.lower, cell.upper
    u0, u1 = f.strip_range(cell.i)
    thick = max(h[1] - l[1] for l, h in zip(lo, hi))
    heights = []
    if f.comb_strip(cell.i):
        k = f.k
        for start in (0, k + 1):
            for q in range(k):
                a, b = start + q, start + q + 1
                top = max(hi[a][1], hi[b][1])
                bot = min(lo[a][1], lo[b][1])
                heights.append(top - bot)
    return {"width": u1 - u0, "thickness": thick, "point_heights": heights,
            "symmetric": _symmetric(lo, hi, (u0 + u1) / 2)}


def _symmetric(lo, hi, mid) -> bool:
    def mirror(chain):
        return sorted((2 * mid - u, v) for u, v in chain)
    return mirror(lo) == sorted(lo) and mirror(hi) == sorted(hi)


def cell_pieces(part: Partition, cell: Cell) -> list:
    """The ``k_n`` fingers of a comb cell, each as two cell-point polygons."""
    f = part.family
    if not f.comb_strip(cell.i):
        return []
    out = []
    lo, hi = cell.lower, cell.upper
    k = f.k
    for start in (0, k + 1):
        for q in range(0, k, 2):
            pts = []
            for a, b in ((start + q, start + q + 1), (start + q + 1, start + q + 2)):
                poly = [f.to_xy(*lo[a]), f.to_xy(*lo[b]), f.to_xy(*hi[b]), f.to_xy(*hi[a])]
                pts.append(Polygon(tuple(poly)).ccw())
            out.append(tuple(pts))
    return out


# verification

def _translate_chain(chain, du):
    return tuple((u + du, v) for u, v in chain)


def _cell_area(lower, upper) -> Fraction:
    """Area between two chains sharing breakpoints (trapezoid rule is exact)."""
    total = Fraction(0)
    for (u0, l0), (u1, l1), (_, h0), (_, h1) in zip(lower, lower[1:], upper, upper[1:]):
        total += (u1 - u0) * ((h0 - l0) + (h1 - l1)) / 2
    return total


def _hole_area(part) -> Fraction:
    return sum((r.area for r in _hole_rects(part.holes)), Fraction(0))


def verify_partition(part: Partition, strips: Iterable[int] | None = None,
                     strict_type1: bool | None = None) -> dict:
    """Exact partition checks over every row of the given strips (default: all).

    Returns a report with one entry per check.  When only some strips are
    listed, every other strip must be a translate of a listed one of the same
    class; the report then scales counts and areas accordingly.
    """
    f = part.family
    p = f.params
    if strict_type1 is None:
        strict_type1 = p.mode == "relaxed"
    problems = {k: [] for k in ("order", "disjoint", "cover", "rect", "type1", "congruence", "count")}
    all_strips = list(range(1, f.strips + 1))
    chosen = list(all_strips if strips is None else strips)

    # classes of strips: every strip must be a translate of a chosen one
    def strip_class(i):
        return (f.comb_strip(i), f.odd and f.strip_range(i)[1] <= f.t_in)
    reps = {}
    for i in chosen:
        reps.setdefault(strip_class(i), i)
    weight = {i: 0 for i in chosen}
    for i in all_strips:
        cls = strip_class(i)
        if cls not in reps:
            problems["count"].append(f"strip {i} has no representative")
            continue
        weight[reps[cls]] += 1
    if part.holes and strips is not None:
        problems["count"].append("class mode needs a hole-free stage")

    # line order: exact minimum gap of consecutive lines
    for j in range(-1, f.m + 1):
        if f.min_gap(j) <= 0:
            problems["order"].append(j)

    area = Fraction(0)
    count = 0
    typical = atypical = 0
    for i in chosen:
        wgt = weight[i] if strips is not None else 1
        if wgt == 0:
            continue
        prev_upper = None
        for j in range(0, f.m + 2):
            if not part.exists(i, j):
                prev_upper = None
                continue
            c = part.cell(i, j)
            count += wgt
            lo, hi = c.lower, c.upper
            if prev_upper is not None and prev_upper != lo:
                problems["disjoint"].append((i, j, "shared line mismatch"))
            prev_upper = hi
            if any(h[1] <= l[1] for l, h in zip(lo, hi)):
                problems["disjoint"].append((i, j, "nonpositive thickness"))
            a = _cell_area(lo, hi)
            if a != c.polygon.area:
                problems["cover"].append((i, j, "polygon area mismatch"))
            area += wgt * a
            kind = c.kind
            if kind in (RECT, TRANSITION):
                x0, x1, y0, y1 = c.polygon.bounds
                want = (p.a, p.d) if f.odd else (p.d, p.a)
                if len(c.polygon.vertices) != 4 or (x1 - x0, y1 - y0) != want:
                    problems["rect"].append((i, j))
            elif kind in (TYPE1, TYPE2):
                if kind == TYPE2:
                    continue
                if not c.typical and not strict_type1:
                    atypical += 1
                    continue
                typical += 1
                met = cell_metrics(part, c)
                bad = []
                if met["width"] != p.a:
                    bad.append("width")
                if not met["thickness"] < p.b:
                    bad.append("thickness")
                if not all(p.c <= h < p.b + p.c for h in met["point_heights"]):
                    bad.append("point height")
                if not met["symmetric"]:
                    bad.append("symmetry")
                if len(met["point_heights"]) != 2 * p.k:
                    bad.append("piece count")
                if bad:
                    problems["type1"].append((i, j, bad))
            # congruence with the right-hand neighbour (translation by a)
            if f.comb_strip(i) and i + 1 <= f.strips and f.comb_strip(i + 1) and part.exists(i + 1, j):
                other = part.cell(i + 1, j)
                if _translate_chain(lo, p.a) != other.lower or _translate_chain(hi, p.a) != other.upper:
                    problems["congruence"].append((i, j))
    x_area = D.area - _hole_area(part)
    if area != x_area:
        problems["cover"].append(("total", str(area), str(x_area)))
    expected = part.count()
    if count != expected:
        problems["count"].append(("cells", count, expected))
    if f.odd and not part.holes and expected != f.strips * (int(2 / p.d) - 2 + 2):
        problems["count"].append("m_n = 2/d_n - 2 inconsistent")
    report = {k: {"pass": not v, "problems": v[:20]} for k, v in problems.items()}
    report["cells"] = count
    report["area"] = area
    report["typical_type1_checked"] = typical
    report["atypical_type1_skipped"] = atypical
    report["pass"] = all(not v for v in problems.values())
    return report


def representative_strips(family: LineFamily) -> list:
    """One strip per translation class (rectangular, transition, comb)."""
    reps = {}
    for i in range(1, family.strips + 1):
        u0, u1 = family.strip_range(i)
        cls = (family.comb_strip(i), family.odd and u1 <= family.t_in)
        reps.setdefault(cls, i)
    return sorted(reps.values())
