"""Holes, stage pipeline, decomposition-element approximants and the trapezoid search.

Stage ``n`` works with the partition ``Q_n`` of ``X_n`` (straightened
coordinates) and its image ``P_n = H_n(Q_n)``.  A chain is located by pulling
a witness point back through ``H_n``; an element approximant is the exact
intersection ``g_N`` of the star images ``H_n(st(q_n, Q_n)*)``.
"""
from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .geom import Point, Polygon, Rect, Region, point_in, width
from .homeo import BendSystem, CompositeMap, FiberedPLMap, build_straightener, composite_H
from .partition import D, Hole, Partition, build_cells, build_lines
from .regionops import (Shape, band_projection, contains, region_ops, union_all,
                        vertical_cover, x_projection)
from .schedule import StageParams, build_schedule, relaxed_profile, t
from .star import star, star_union


class DecompError(ValueError):
    pass


# holes

class HoleSet:
    """``W_n``: open ``s_n``-squares centred in the straightened cells right of ``t_{n-4}``.

    Holes are enumerated lazily; membership is grid arithmetic.
    """

    def __init__(self, part: Partition):
        self.part = part
        f = part.family
        self.n = f.n
        self.params: StageParams = f.params
        self.s = self.params.s
        self.left = t(self.n - 4) if self.n > 3 else None

    @property
    def empty(self) -> bool:
        return self.left is None or self.left >= 1

    def _anchor_range(self):
        """Strip and row index ranges whose straightened rectangle lies right of ``left``."""
        f = self.part.family
        if self.empty:
            return range(0), range(0)
        if f.odd:
            i0 = -((f.u_lo - self.left) // f.a) + 1
            return range(i0, f.strips + 1), range(0, f.m + 2)
        j0 = -((f.v_lo - self.left) // f.d)  # level(j-1) >= left
        return range(1, f.strips + 1), range(j0, f.m + 2)

    def anchor(self, i: int, j: int) -> Rect:
        return self.part.straightened(i, j)

    def hole_of(self, rect: Rect) -> Rect:
        cx, cy = (rect.x_lo + rect.x_hi) / 2, (rect.y_lo + rect.y_hi) / 2
        h = self.s / 2
        return Rect(cx - h, cx + h, cy - h, cy + h)

    def __iter__(self) -> Iterator[tuple]:
        irange, jrange = self._anchor_range()
        for i in irange:
            for j in jrange:
                if self.part.exists(i, j):
                    yield (i, j), self.hole_of(self.anchor(i, j))

    def __len__(self) -> int:
        irange, jrange = self._anchor_range()
        if not self.part.holes:
            return len(irange) * len(jrange)
        return sum(1 for _ in self)

    def find(self, p) -> tuple | None:
        """Anchor index of the open hole containing ``p``, else ``None``."""
        if self.empty:
            return None
        f = self.part.family
        x, y = Fraction(p[0]), Fraction(p[1])
        u, v = (x, y) if f.odd else (y, x)
        if not (f.u_lo < u < f.u_hi and f.v_lo < v < f.v_hi):
            return None
        i = int((u - f.u_lo) // f.a) + 1
        j = int((v - f.v_lo) // f.d)
        irange, jrange = self._anchor_range()
        if i not in irange or j not in jrange or not self.part.exists(i, j):
            return None
        h = self.hole_of(self.anchor(i, j))
        if h.x_lo < x < h.x_hi and h.y_lo < y < h.y_hi:
            return (i, j)
        return None

    def materialize(self, limit: int = 20000) -> list:
        if len(self) > limit:
            raise DecompError(f"W_{self.n} has {len(self)} holes; refusing to materialize")
        return [Hole(r, stage=self.n) for _, r in self]


def insert_holes(part: Partition, limit: int = 20000):
    """``(W_n, X_{n+1})``.  ``X_{n+1}`` is returned as a Region when small enough."""
    W = HoleSet(part)
    if W.empty:
        prev = [h.rect for h in part.holes]
        return W, Region(D.polygon(), tuple(r.polygon() for r in prev))
    holes = [h.rect for h in part.holes] + [h.rect for h in W.materialize(limit)]
    return W, Region(D.polygon(), tuple(r.polygon() for r in holes))


# stage pipeline

class Stages:
    """Lazily built stages ``1..N`` of one schedule profile."""

    def __init__(self, N: int, profile="desk", hole_limit: int = 20000):
        self.N = N
        self.profile = relaxed_profile(profile) if isinstance(profile, str) else profile
        self.params = build_schedule(N, self.profile)
        self.hole_limit = hole_limit
        self._parts = {}
        self._h = {}
        self._W = {}

    def _holes_before(self, n: int) -> list:
        out = []
        for k in range(1, n):
            W = self.holes(k)
            if not W.empty:
                out.extend(W.materialize(self.hole_limit))
        return out

    def partition(self, n: int) -> Partition:
        if not 1 <= n <= self.N:
            raise DecompError(f"stage {n} outside 1..{self.N}")
        if n not in self._parts:
            holes = self._holes_before(n)
            prev_a = self.params[n - 2].a if n > 1 else None
            lines = build_lines(self.params[n - 1], holes, prev_a)
            self._parts[n] = build_cells(lines, holes)
        return self._parts[n]

    def holes(self, n: int) -> HoleSet:
        if n not in self._W:
            self._W[n] = HoleSet(self.partition(n))
        return self._W[n]

    def straightener(self, n: int) -> FiberedPLMap:
        if n not in self._h:
            self._h[n] = build_straightener(self.partition(n).family)
        return self._h[n]

    def H(self, n: int) -> CompositeMap:
        """``H_n = h_1 o ... o h_{n-1}``."""
        return composite_H([self.straightener(k) for k in range(1, n)])


# chains and elements

@dataclass
class CellChain:
    cells: list
    witness: Point
    stages: Stages = field(repr=False)

    @property
    def N(self) -> int:
        return len(self.cells)


def chain_from_point(p, stages: Stages, N: int | None = None) -> CellChain:
    """Cells ``q_n`` with ``H_n^{-1}(p)`` in ``q_n``; ties go to the smallest ``(i, j)``."""
    N = stages.N if N is None else N
    p = Point(Fraction(p[0]), Fraction(p[1]))
    cells = []
    for n in range(1, N + 1):
        if n > 1:
            W = stages.holes(n - 1)
            if not W.empty and W.find(stages.H(n).apply_inverse(p)) is not None:
                raise DecompError(f"point lies in a hole removed at stage {n}")
        x = stages.H(n).apply_inverse(p)
        found = stages.partition(n).locate(x)
        if not found:
            raise DecompError(f"no stage-{n} cell contains the point")
        cells.append(min(found, key=lambda c: (c.i, c.j)))
    return CellChain(cells, p, stages)


def star_image(chain: CellChain, n: int) -> Polygon:
    """``H_n(st(q_n, Q_n)*)`` as a polygon."""
    st = chain.stages
    shape = star_union(chain.cells[n - 1], st.partition(n))
    reg = shape.region()
    if reg.holes:
        raise DecompError("star union has a hole")
    return st.H(n).apply_polygon(reg.outer)


def cell_image(chain: CellChain, n: int) -> Polygon:
    return chain.stages.H(n).apply_polygon(chain.cells[n - 1].polygon)


def straightened_star(chain: CellChain, n: int) -> Shape:
    """``h_n^{-1}(st(q_n, Q_n)*)``: the union of the star cells' grid rectangles."""
    part = chain.stages.partition(n)
    cells = star(chain.cells[n - 1], part)
    return union_all(part.straightened(c.i, c.j).polygon() for c in cells)


def pullback_nesting(chain: CellChain, n: int) -> dict:
    """Exact test of ``H_{n+1}(st_{n+1}*) ⊆ H_n(st_n*)`` in stage-``n+1`` coordinates.

    Since ``H_{n+1} = H_n o h_n`` the containment is equivalent to
    ``st_{n+1}* ⊆ h_n^{-1}(st_n*)``, a comb polygon inside a union of rectangles.
    """
    st = chain.stages
    inner = star_union(chain.cells[n], st.partition(n + 1))
    outer = straightened_star(chain, n)
    diff = region_ops(inner, outer, "difference")
    if diff.is_empty:
        return {"stage": n + 1, "pass": True, "witness": None}
    v = next(iter(_vertices(diff)))
    return {"stage": n + 1, "pass": False, "witness": st.H(n + 1).apply(v)}


@dataclass
class ElementApprox:
    chain: CellChain
    g: Shape
    stars: list            # H_n(st_n*) for n = 1..N
    nesting: list          # pullback reports for n = 1..N-1

    @property
    def N(self) -> int:
        return self.chain.N

    def polygons(self) -> list:
        return [r.outer for r in self.g.regions]


def element_approx(chain: CellChain, intersect: bool = False) -> ElementApprox:
    """``g_N``.  When every star nests in its predecessor ``g_N`` is the last star
    image; otherwise (or with ``intersect=True``) the images are intersected."""
    stars = [star_image(chain, n) for n in range(1, chain.N + 1)]
    nesting = [pullback_nesting(chain, n) for n in range(1, chain.N)]
    if intersect or not all(r["pass"] for r in nesting):
        g = Shape((Region(stars[0]),))
        for n, s in enumerate(stars[1:], start=2):
            g = region_ops(g, s, "intersect")
            if g.is_empty:
                raise DecompError(f"g_{n} is empty")
    else:
        g = Shape((Region(stars[-1]),))
    return ElementApprox(chain, g, stars, nesting)


def nesting_report(images: Sequence) -> dict:
    """Check ``images[n+1] ⊆ images[n]`` exactly; failures carry an outside vertex."""
    failures = []
    for n in range(len(images) - 1):
        outer, inner = images[n], images[n + 1]
        if not contains(outer, inner):
            witness = None
            for v in _vertices(inner):
                if _classify(outer, v) == "outside":
                    witness = v
                    break
            if witness is None:
                diff = region_ops(inner, outer, "difference")
                witness = next(iter(_vertices(diff)))
            failures.append({"stage": n + 1, "witness": witness})
    return {"pass": not failures, "checked": len(images) - 1, "failures": failures}


def _vertices(obj):
    if isinstance(obj, Polygon):
        yield from obj.vertices
    elif isinstance(obj, Shape):
        for r in obj.regions:
            yield from r.vertices()
    elif isinstance(obj, Rect):
        yield from obj.polygon().vertices


def _classify(obj, p) -> str:
    if isinstance(obj, Shape):
        return obj.classify(p)
    if isinstance(obj, Rect):
        obj = obj.polygon()
    return point_in(p, Region(obj))


def verify_nesting(chains: Sequence[CellChain]) -> dict:
    """Star nesting for every chain and stage, by the exact pull-back test."""
    rows = []
    for ch in chains:
        reps = [pullback_nesting(ch, n) for n in range(1, ch.N)]
        rows.append({"witness": ch.witness, "pass": all(r["pass"] for r in reps),
                     "failures": [r for r in reps if not r["pass"]]})
    return {"pass": all(r["pass"] for r in rows), "chains": rows}


# Lemma 8

@dataclass
class TrapezoidWitness:
    T: Polygon
    n: int
    case: str
    target: Fraction
    band: tuple

    @property
    def width(self) -> Fraction:
        return width(self.T)


def lemma8_stage(g: Shape) -> int:
    """Least ``n`` with ``g`` strictly right of ``Vert(t_{n+1})``."""
    x0 = g.bounds[0]
    if x0 <= Fraction(1, 2):
        raise DecompError("element meets E; no trapezoid stage")
    n = 0
    while not x0 > t(n + 1):
        n += 1
    return n


def lemma8_case(approx: ElementApprox, n: int) -> str:
    """``'1'`` when ``p_{n-1}`` misses ``Vert(t_{n+1})``, else ``"1'"`` (``p_0`` is D)."""
    if n - 1 < 1:
        return "1'"
    p = cell_image(approx.chain, n - 1)
    x0, x1 = p.bounds[0], p.bounds[1]
    return "1'" if x0 <= t(n + 1) <= x1 else "1"


def _bands(g: Shape, lo: Fraction, hi: Fraction) -> list:
    _, _, y0, y1 = g.bounds
    y0, y1 = max(y0, lo), min(y1, hi)
    if y0 >= y1:
        return []
    bands = [(y0, y1)]
    ys = sorted({v[1] for v in _vertices(g) if y0 < v[1] < y1} | {y0, y1})
    bands += list(zip(ys, ys[1:]))
    return bands


def lemma8_search(approx: ElementApprox, n: int | None = None, case: str = "auto"):
    """Find a trapezoid ``T`` (a rectangle) for the element ``g_N``.

    Candidates are horizontal bands of ``g`` inside the allowed height range;
    ``T`` is the longest interval of the band's x-projection, so every vertical
    line meeting ``T`` meets ``g ∩ T`` by construction.
    """
    g = approx.g
    st = approx.chain.stages
    if n is None:
        n = lemma8_stage(g)
    elif not g.bounds[0] > t(n + 1):
        raise DecompError("element is not strictly right of Vert(t_{n+1})")
    if case == "auto":
        case = lemma8_case(approx, n)
    depth = n + 3 if case == "1" else n + 4
    if depth > st.N:
        raise DecompError(f"case {case} needs stages through {depth}")
    a = st.params[depth - 1].a
    xr = (t(n + 1), t(n - 1) if case == "1" else t(n))
    # open height range (a, 2-a): keep a margin of a/256 inside it
    lo, hi = a + a / 256, 2 - a - a / 256
    gx0, gx1, gy0, gy1 = g.bounds
    if len(g.regions) == 1 and lo <= gy0 and gy1 <= hi and xr[0] <= gx0 and gx1 <= xr[1]:
        # g lies in the allowed band: its bounding box works (g is connected)
        if gx1 - gx0 > a:
            return TrapezoidWitness(Rect(gx0, gx1, gy0, gy1).polygon(), n, case, a, (gy0, gy1))
    best = None
    for y0, y1 in _bands(g, lo, hi):
        if best is not None and best[1] - best[0] > a:
            break
        for u0, u1 in band_projection(g, y0, y1):
            u0, u1 = max(u0, xr[0]), min(u1, xr[1])
            if u1 > u0 and (best is None or u1 - u0 > best[1] - best[0]):
                best = (u0, u1, y0, y1)
    if best is None or not best[1] - best[0] > a:
        return {"found": False, "n": n, "case": case, "target": a,
                "best_width": None if best is None else best[1] - best[0]}
    T = Rect(*best).polygon()
    return TrapezoidWitness(T, n, case, a, (best[2], best[3]))


def vertical_line_check(g: Shape, T: Polygon) -> dict:
    """Oracle for condition 3: every vertical line through ``T`` meets ``g ∩ T``.

    Whether ``Vert(x)`` meets ``g ∩ T`` can only change at vertex abscissas of
    ``g`` and where edges of ``g`` cross the top or bottom of ``T``; the check
    evaluates every such abscissa and the midpoint of every gap between them.
    """
    x0, x1, y0, y1 = T.bounds
    crit = {x0, x1}
    for loop in _loops_of_shape(g):
        n = len(loop)
        for i in range(n):
            a, b = loop[i], loop[(i + 1) % n]
            if x0 <= a[0] <= x1:
                crit.add(a[0])
            if a[1] != b[1]:
                for y in (y0, y1):
                    t = (y - a[1]) / (b[1] - a[1])
                    if 0 < t < 1:
                        x = a[0] + t * (b[0] - a[0])
                        if x0 <= x <= x1:
                            crit.add(x)
    crit = sorted(crit)
    probes = sorted(crit + [(p + q) / 2 for p, q in zip(crit, crit[1:])])
    # A probe line meets g ∩ T iff a boundary point of g on it lies in the
    # band, or the crossings strictly below the band are odd in number.
    hit = [False] * len(probes)
    below = [0] * (len(probes) + 1)
    for loop in _loops_of_shape(g):
        n = len(loop)
        for i in range(n):
            a, b = loop[i], loop[(i + 1) % n]
            lo, hi = (a, b) if a[0] <= b[0] else (b, a)
            k0 = bisect_left(probes, lo[0])
            k1 = bisect_right(probes, hi[0])
            ylo, yhi = min(a[1], b[1]), max(a[1], b[1])
            if k0 >= k1 or (ylo > y1 and lo[0] < hi[0]):
                continue
            if y0 <= ylo and yhi <= y1:
                for k in range(k0, k1):
                    hit[k] = True
                continue
            if yhi < y0:
                if lo[0] < hi[0]:
                    k2 = bisect_left(probes, hi[0])
                    below[k0] += 1
                    below[k2] -= 1
                continue
            if lo[0] == hi[0]:
                if ylo <= y1 and yhi >= y0:
                    hit[k0] = True
                continue
            for k in range(k0, k1):
                x = probes[k]
                y = lo[1] + (x - lo[0]) * (hi[1] - lo[1]) / (hi[0] - lo[0])
                if y0 <= y <= y1:
                    hit[k] = True
                elif y < y0 and x < hi[0]:
                    below[k] += 1
                    below[k + 1] -= 1
    misses = []
    run = 0
    for k, x in enumerate(probes):
        run += below[k]
        if not hit[k] and run % 2 == 0:
            misses.append(x)
    return {"lines": len(probes), "pass": not misses, "misses": misses[:5]}


def _loops_of_shape(g: Shape) -> list:
    return [p.vertices for p in g.loops()]


def neighborhood_bound_check(chain: CellChain, m: int) -> dict:
    """First containment of the neighbourhood chain plus the exact bound arithmetic."""
    st = chain.stages
    if m + 3 > chain.N:
        raise DecompError(f"needs stages through {m + 3}")
    # H_n is a homeomorphism, so p ⊆ H_n(st*) is checked on the straightened side
    q = chain.cells[m + 2]
    stq = star_union(q, st.partition(m + 3))
    p = st.params[m + 1]  # stage m+2
    bound = (12 * p.L + 3 * p.K) / 2 ** (m + 4)
    target = p.a / 2 ** (m + 4)
    return {
        "containment": contains(stq, q.polygon),
        "bound": bound,
        "target": target,
        "relation": "equal" if bound == target else ("below" if bound < target else "above"),
    }


def bending_check(approx: ElementApprox, n: int, system: BendSystem | None = None) -> dict:
    """Does ``F(g_N)`` reach above ``2 - a_n`` and below ``a_n``?"""
    system = system or BendSystem(approx.chain.stages.profile)
    a = system.params(n).a
    ys = []
    for poly in approx.polygons():
        img = system.apply_F_polygon(poly)
        ys += [v[1] for v in img.vertices]
    return {"a": a, "max_y": max(ys), "min_y": min(ys),
            "above": max(ys) > 2 - a, "below": min(ys) < a}
