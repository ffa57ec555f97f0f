"""Fibered piecewise-linear homeomorphisms of D: straighteners, bends, composites.

A fibered map fixes the coordinate ``u`` along its fibers and moves ``v``.
Its source levels ``s_k`` go to target chains ``T_k(u)``.  Between two
breakpoint columns and two levels the quad is split by the diagonal from
``(u0, s_k)`` to ``(u1, s_{k+1})`` and each triangle maps affinely, so
images of polygons are polygons and inverses are exact.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .geom import Point, Polygon, simplify
from .partition import LineFamily
from .schedule import HALF, StageParams, build_schedule, relaxed_profile, t


class MapError(ValueError):
    pass


class FiberFamily:
    """Protocol for the data of a fibered PL map.  Subclasses fill in the blanks."""

    odd = True  # True: fibers are vertical (u = x); False: horizontal (u = y)
    u_lo = u_hi = v_lo = v_hi = Fraction(0)

    def n_levels(self) -> int:
        raise NotImplementedError

    def source(self, k: int) -> Fraction:
        raise NotImplementedError

    def target(self, k: int, u) -> Fraction:
        raise NotImplementedError

    def locate(self, v) -> int:
        """Largest ``k < n_levels - 1`` with ``source(k) <= v``."""
        lo, hi = 0, self.n_levels() - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.source(mid) <= v:
                lo = mid
            else:
                hi = mid
        return lo

    def column(self, u) -> tuple:
        raise NotImplementedError

    def breakpoints(self, lo, hi) -> list:
        raise NotImplementedError

    def to_frame(self, p) -> tuple:
        return (p[0], p[1]) if self.odd else (p[1], p[0])

    def to_xy(self, u, v) -> Point:
        return Point(u, v) if self.odd else Point(v, u)


class StraightenerFamily(FiberFamily):
    """Source grid levels plus identity breaklines near the boundary of D."""

    def __init__(self, lines: LineFamily):
        self.lines = lines
        self.odd = lines.odd
        self.u_lo, self.u_hi, self.v_lo, self.v_hi = lines.u_lo, lines.u_hi, lines.v_lo, lines.v_hi
        eps = lines.params.a_prime / 128
        extras = [self.v_hi - eps]
        if self.odd:
            extras.insert(0, self.v_lo + eps)
        self.extras = extras
        self.grid = lines.m + 3  # levels j = -1 .. m+1
        # merged index of each extra
        self._extra_pos = []
        for i, e in enumerate(extras):
            g = lines.level_index(e) + 2  # grid levels strictly below e
            self._extra_pos.append(g + i)

    def n_levels(self) -> int:
        return self.grid + len(self.extras)

    def _split(self, k: int):
        """``('extra', i)`` or ``('grid', j)`` for merged index ``k``."""
        before = 0
        for i, pos in enumerate(self._extra_pos):
            if pos == k:
                return ("extra", i)
            if pos < k:
                before += 1
        return ("grid", k - before - 1)

    def source(self, k: int) -> Fraction:
        kind, idx = self._split(k)
        if kind == "extra":
            return self.extras[idx]
        return self.lines.level(idx)

    def target(self, k: int, u) -> Fraction:
        kind, idx = self._split(k)
        if kind == "extra":
            return self.extras[idx]
        return self.lines.value(idx, u)

    def column(self, u) -> tuple:
        f = self.lines
        i = f.strip_of(u)
        bps = f.strip_breakpoints(i)
        p = bisect.bisect_right(bps, u)
        p = min(max(p, 1), len(bps) - 1)
        return bps[p - 1], bps[p]

    def breakpoints(self, lo, hi) -> list:
        return self.lines.breakpoints(lo, hi)


class BendFamily(FiberFamily):
    """Accordion of stage ``n``: vertical fibers, levels 0, a, 2-a, 2."""

    odd = True

    def __init__(self, n: int, a: Fraction):
        if n < 4:
            raise MapError("bends start at stage 4")
        self.n, self.a = n, Fraction(a)
        self.lo, self.hi = t(n - 3), t(n - 4)
        if ((self.hi - self.lo) / self.a).denominator != 1:
            raise MapError("period does not divide strip width")
        self.u_lo, self.u_hi, self.v_lo, self.v_hi = HALF, Fraction(1), Fraction(0), Fraction(2)
        self.levels = (Fraction(0), self.a, 2 - self.a, Fraction(2))

    def n_levels(self) -> int:
        return 4

    def source(self, k: int) -> Fraction:
        return self.levels[k]

    def envelopes(self, u) -> tuple:
        """``(lambda, mu)``: first- and second-half tents of the period containing ``u``."""
        u = Fraction(u)
        if not self.lo <= u <= self.hi:
            return Fraction(0), Fraction(0)
        a = self.a
        x = (u - self.lo) % a
        q = a / 4
        if x <= 2 * q:
            lam = x / q if x <= q else (2 * q - x) / q
            return lam, Fraction(0)
        x -= 2 * q
        mu = x / q if x <= q else (2 * q - x) / q
        return Fraction(0), mu

    def target(self, k: int, u) -> Fraction:
        if k in (0, 3):
            return self.levels[k]
        a = self.a
        lam, mu = self.envelopes(u)
        if k == 1:
            return a + lam * (2 - 3 * a / 2) - mu * (3 * a / 4)
        return 2 - a + lam * (3 * a / 4) - mu * (2 - 3 * a / 2)

    def column(self, u) -> tuple:
        u = Fraction(u)
        if u < self.lo:
            return self.u_lo, self.lo
        if u > self.hi or (u == self.hi and self.hi < self.u_hi):
            return self.hi, self.u_hi
        q = self.a / 4
        idx = int((u - self.lo) // q)
        idx = min(idx, int((self.hi - self.lo) / q) - 1)
        return self.lo + idx * q, self.lo + (idx + 1) * q

    def breakpoints(self, lo, hi) -> list:
        lo, hi = Fraction(lo), Fraction(hi)
        pts = {self.u_lo, self.u_hi}
        q = self.a / 4
        start = max(self.lo, lo)
        i0 = int(-(-(start - self.lo) // q))
        x = self.lo + i0 * q
        while x <= min(hi, self.hi):
            pts.add(x)
            x += q
        return sorted(p for p in pts if lo <= p <= hi)


class FiberedPLMap:
    def __init__(self, family: FiberFamily, n: int = 0, name: str = "h"):
        self.family = family
        self.n = n
        self.name = name

    # evaluation

    def _check(self, u, v):
        f = self.family
        if not (f.u_lo <= u <= f.u_hi and f.v_lo <= v <= f.v_hi):
            raise MapError(f"point {(u, v)} outside the domain")

    def _eval_frame(self, u, v) -> Fraction:
        f = self.family
        k = f.locate(v)
        s0, s1 = f.source(k), f.source(k + 1)
        if v == s0:
            return f.target(k, u)
        if v == s1:
            return f.target(k + 1, u)
        u0, u1 = f.column(u)
        alpha = (u - u0) / (u1 - u0)
        beta = (v - s0) / (s1 - s0)
        a0, a1 = f.target(k, u0), f.target(k, u1)
        b0, b1 = f.target(k + 1, u0), f.target(k + 1, u1)
        if beta <= alpha:
            return a0 + alpha * (a1 - a0) + beta * (b1 - a1)
        return a0 + beta * (b0 - a0) + alpha * (b1 - b0)

    def apply(self, p) -> Point:
        f = self.family
        u, v = f.to_frame((Fraction(p[0]), Fraction(p[1])))
        self._check(u, v)
        return f.to_xy(u, self._eval_frame(u, v))

    def apply_inverse(self, p) -> Point:
        f = self.family
        u, w = f.to_frame((Fraction(p[0]), Fraction(p[1])))
        self._check(u, w)
        lo, hi = 0, f.n_levels() - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if f.target(mid, u) <= w:
                lo = mid
            else:
                hi = mid
        k = lo
        s0, s1 = f.source(k), f.source(k + 1)
        t0, t1 = f.target(k, u), f.target(k + 1, u)
        if w == t0:
            return f.to_xy(u, s0)
        if w == t1:
            return f.to_xy(u, s1)
        u0, u1 = f.column(u)
        alpha = (u - u0) / (u1 - u0)
        a0, a1 = f.target(k, u0), f.target(k, u1)
        b0, b1 = f.target(k + 1, u0), f.target(k + 1, u1)
        diag = a0 + alpha * (a1 - a0) + alpha * (b1 - a1)
        if w <= diag:
            beta = (w - a0 - alpha * (a1 - a0)) / (b1 - a1)
        else:
            beta = (w - a0 - alpha * (b1 - b0)) / (b0 - a0)
        return f.to_xy(u, s0 + beta * (s1 - s0))

    # polygons

    def _split_points(self, p, q) -> list:
        """Parameters in (0, 1) where segment ``pq`` (frame coords) changes triangle."""
        f = self.family
        (pu, pv), (qu, qv) = p, q
        ts = set()
        if pu != qu:
            lo, hi = min(pu, qu), max(pu, qu)
            for b in f.breakpoints(lo, hi):
                if lo < b < hi:
                    ts.add((b - pu) / (qu - pu))
        if pv != qv:
            lo, hi = min(pv, qv), max(pv, qv)
            k = f.locate(lo)
            while k < f.n_levels() and f.source(k) < hi:
                s = f.source(k)
                if lo < s < hi:
                    ts.add((s - pv) / (qv - pv))
                k += 1
        pts = sorted(ts | {Fraction(0), Fraction(1)})
        # diagonals inside each piece
        extra = set()
        for t0, t1 in zip(pts, pts[1:]):
            tm = (t0 + t1) / 2
            um, vm = pu + tm * (qu - pu), pv + tm * (qv - pv)
            u0, u1 = f.column(um)
            k = f.locate(vm)
            s0, s1 = f.source(k), f.source(k + 1)
            # diagonal: v - s0 = (s1 - s0) (u - u0)/(u1 - u0)
            def g(tt):
                uu, vv = pu + tt * (qu - pu), pv + tt * (qv - pv)
                return (vv - s0) * (u1 - u0) - (s1 - s0) * (uu - u0)
            g0, g1 = g(t0), g(t1)
            if g0 * g1 < 0:
                extra.add(t0 + (t1 - t0) * g0 / (g0 - g1))
        return sorted(set(pts) | extra)

    def apply_polygon(self, poly) -> Polygon:
        f = self.family
        verts = [f.to_frame((Fraction(x), Fraction(y))) for x, y in poly]
        out = []
        n = len(verts)
        for i in range(n):
            p, q = verts[i], verts[(i + 1) % n]
            for tt in self._split_points(p, q)[:-1]:
                u = p[0] + tt * (q[0] - p[0])
                v = p[1] + tt * (q[1] - p[1])
                self._check(u, v)
                out.append(f.to_xy(u, self._eval_frame(u, v)))
        pts = simplify(out)
        return Polygon(tuple(pts))

    # Lipschitz data

    def triangle_norms(self, u_lo=None, u_hi=None, levels: Iterable[int] | None = None):
        """Yield ``(shear, scale)`` of every triangle over columns in ``[u_lo, u_hi]``."""
        f = self.family
        u_lo = f.u_lo if u_lo is None else u_lo
        u_hi = f.u_hi if u_hi is None else u_hi
        bps = f.breakpoints(u_lo, u_hi)
        ks = range(f.n_levels() - 1) if levels is None else levels
        for u0, u1 in zip(bps, bps[1:]):
            du = u1 - u0
            for k in ks:
                a0, a1 = f.target(k, u0), f.target(k, u1)
                b0, b1 = f.target(k + 1, u0), f.target(k + 1, u1)
                ds = f.source(k + 1) - f.source(k)
                yield (a1 - a0) / du, (b1 - a1) / ds   # lower triangle
                yield (b1 - b0) / du, (b0 - a0) / ds   # upper triangle

    def lipschitz_bound(self, u_lo=None, u_hi=None) -> Fraction:
        best = Fraction(1)
        for shear, scale in self.triangle_norms(u_lo, u_hi):
            v = 1 + abs(shear) + abs(scale)
            if v > best:
                best = v
        return best

    def fibers_increasing(self, u_lo=None, u_hi=None) -> bool:
        f = self.family
        u_lo = f.u_lo if u_lo is None else u_lo
        u_hi = f.u_hi if u_hi is None else u_hi
        for u in f.breakpoints(u_lo, u_hi):
            prev = None
            for k in range(f.n_levels()):
                val = f.target(k, u)
                if prev is not None and not val > prev:
                    return False
                prev = val
            if f.target(0, u) != f.v_lo or prev != f.v_hi:
                return False
        return True

    def max_displacement(self, u_lo=None, u_hi=None) -> tuple:
        """Largest ``|T_k(u) - s_k|`` over breakpoint vertices, with a witness."""
        f = self.family
        u_lo = f.u_lo if u_lo is None else u_lo
        u_hi = f.u_hi if u_hi is None else u_hi
        best, witness = Fraction(0), None
        for u in f.breakpoints(u_lo, u_hi):
            for k in range(f.n_levels()):
                dv = abs(f.target(k, u) - f.source(k))
                if dv > best:
                    best, witness = dv, f.to_xy(u, f.source(k))
        return best, witness


class IdentityMap:
    n = 0
    name = "id"

    def apply(self, p) -> Point:
        return Point(Fraction(p[0]), Fraction(p[1]))

    apply_inverse = apply

    def apply_polygon(self, poly) -> Polygon:
        return poly if isinstance(poly, Polygon) else Polygon(tuple(poly))

    def lipschitz_bound(self, *args) -> Fraction:
        return Fraction(1)


class CompositeMap:
    """``maps[0] o maps[1] o ... o maps[-1]`` (the last one acts first)."""

    def __init__(self, maps: Sequence, kind: str = "H"):
        self.maps = list(maps)
        self.kind = kind

    def apply(self, p) -> Point:
        for m in reversed(self.maps):
            p = m.apply(p)
        return Point(Fraction(p[0]), Fraction(p[1]))

    def apply_inverse(self, p) -> Point:
        for m in self.maps:
            p = m.apply_inverse(p)
        return Point(Fraction(p[0]), Fraction(p[1]))

    def apply_polygon(self, poly) -> Polygon:
        for m in reversed(self.maps):
            poly = m.apply_polygon(poly)
        return poly if isinstance(poly, Polygon) else Polygon(tuple(poly))

    def lipschitz_bound(self, *args) -> Fraction:
        out = Fraction(1)
        for m in self.maps:
            out *= m.lipschitz_bound(*args)
        return out


def build_straightener(lines: LineFamily) -> FiberedPLMap:
    f = StraightenerFamily(lines)
    for j in range(-1, lines.m + 1):
        if lines.min_gap(j) <= 0:
            raise MapError("target chains are not ordered")
    return FiberedPLMap(f, lines.n, f"h{lines.n}")


def build_bend(n: int, params: StageParams | Fraction | None = None):
    """``f_n``: identity for ``n <= 3``, otherwise the accordion of period ``a_n``."""
    if n <= 3:
        return IdentityMap()
    a = params.a if isinstance(params, StageParams) else Fraction(params)
    return FiberedPLMap(BendFamily(n, a), n, f"f{n}")


def bend_conditions(f: FiberedPLMap) -> list:
    """Per period: does the peak of each half push ``a`` above ``2-a`` / ``2-a`` below ``a``."""
    fam = f.family
    a, out = fam.a, []
    x = fam.lo
    while x < fam.hi:
        up = f.apply((x + a / 4, a))[1]
        down = f.apply((x + 3 * a / 4, 2 - a))[1]
        out.append({"period_start": x, "lifted": up, "lowered": down,
                    "cond1": up > 2 - a, "cond2": down < a})
        x += a
    return out


class BendSystem:
    """Bends ``f_1, f_2, ...`` built on demand from a schedule profile."""

    def __init__(self, profile="desk"):
        self.profile = relaxed_profile(profile) if isinstance(profile, str) else profile
        self._params = []
        self._bends = {}

    def params(self, n: int) -> StageParams:
        if len(self._params) < n:
            self._params = build_schedule(n, self.profile)
        return self._params[n - 1]

    def bend(self, n: int):
        if n not in self._bends:
            self._bends[n] = build_bend(n, self.params(n) if n > 3 else None)
        return self._bends[n]

    def strip_index(self, x) -> int:
        """``n`` with ``t_n <= x < t_{n-1}`` (``x = 1`` belongs to ``n = 1``)."""
        x = Fraction(x)
        if x <= HALF:
            raise MapError("F undefined on E")
        if x == 1:
            return 1
        n = 1
        while not (t(n) <= x < t(n - 1)):
            n += 1
        return n

    def F_maps(self, n: int) -> CompositeMap:
        """``f_{n+3} o ... o f_1``."""
        return CompositeMap([self.bend(k) for k in range(n + 3, 0, -1)], "F")

    def eval_F(self, p) -> Point:
        return self.F_maps(self.strip_index(p[0])).apply(p)

    def apply_F_polygon(self, poly) -> Polygon:
        xs = [Fraction(v[0]) for v in poly]
        n = self.strip_index(min(xs))
        if max(xs) > t(n - 1):
            raise MapError("polygon crosses a strip boundary of F")
        return self.F_maps(n).apply_polygon(poly)


def eval_F(p, system: BendSystem | None = None) -> Point:
    return (system or BendSystem()).eval_F(p)


def composite_H(straighteners: Sequence) -> CompositeMap:
    """``H_n = h_1 o ... o h_{n-1}`` from ``[h_1, ..., h_{n-1}]``."""
    return CompositeMap(list(straighteners), "H")


def lipschitz_bound(m) -> Fraction:
    return m.lipschitz_bound()


def straightener_lipschitz_bound(h: FiberedPLMap) -> Fraction:
    """Exact Lipschitz certificate of a straightener from one strip per translation class."""
    from .partition import representative_strips
    lines = h.family.lines
    best = Fraction(1)
    for i in representative_strips(lines):
        best = max(best, h.lipschitz_bound(*lines.strip_range(i)))
    return best


def derive_delta(n: int, L: Fraction, lip_H: Fraction, lip_FH: Fraction) -> Fraction:
    return min(L / 2 ** (n + 1) / lip_H, Fraction(1, 2 ** (n + 1)) / lip_FH)


def displacement_check(h, n: int, a_prev: Fraction, u_ranges=None) -> dict:
    """Even stages: largest fiber displacement must stay below ``2 a_{n-1}``."""
    if n % 2:
        raise MapError("displacement check is for even stages")
    ranges = u_ranges or [(None, None)]
    best, witness = Fraction(0), None
    for lo, hi in ranges:
        b, w = h.max_displacement(lo, hi)
        if b > best:
            best, witness = b, w
    return {"max": best, "bound": 2 * a_prev, "pass": best < 2 * a_prev, "witness": witness}
