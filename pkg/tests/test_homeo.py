import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from carpet_forge.geom import Point, Polygon, Rect, segments_meet, width
from carpet_forge.homeo import (BendSystem, CompositeMap, FiberedPLMap, IdentityMap, MapError,
                                bend_conditions, build_bend, build_straightener, composite_H,
                                derive_delta, displacement_check, eval_F,
                                straightener_lipschitz_bound)
from carpet_forge.partition import Hole, build_lines
from carpet_forge.schedule import (bend_lipschitz, build_schedule, straightener_lipschitz, t,
                                   tampered)

PS = build_schedule(5, "desk")


def straightener(n, holes=()):
    return build_straightener(build_lines(PS[n - 1], holes, PS[n - 2].a if n > 1 else None))


H1, H2, H3 = straightener(1), straightener(2), straightener(3)
BENDS = BendSystem("desk")


def rand_point(rng, bits=14):
    return Point(F(1, 2) + F(rng.randrange((1 << (bits - 1)) + 1), 1 << bits),
                 F(rng.randrange((1 << (bits + 1)) + 1), 1 << bits))


@pytest.mark.parametrize("h", [H1, H2, H3], ids=["h1", "h2", "h3"])
def test_round_trip_exact(h):
    rng = random.Random(7)
    for _ in range(1000):
        p = rand_point(rng)
        assert h.apply_inverse(h.apply(p)) == p


def test_identity_map_point():
    assert IdentityMap().apply((F(3, 4), 1)) == Point(F(3, 4), 1)


def test_outside_domain():
    with pytest.raises(MapError):
        H1.apply((F(1, 4), 1))


@pytest.mark.parametrize("h", [H1, H2, H3], ids=["h1", "h2", "h3"])
def test_fibers_strictly_increasing(h):
    lines = h.family.lines
    lo, hi = lines.strip_range(lines.strips)
    assert h.fibers_increasing(lo, hi)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_levels_go_to_lines(n):
    h = [H1, H2, H3][n - 1]
    lines = h.family.lines
    rng = random.Random(n)
    for _ in range(200):
        j = rng.randrange(-1, lines.m + 2)
        u = lines.u_lo + (lines.u_hi - lines.u_lo) * F(rng.randrange(4097), 4096)
        img = h.apply(lines.to_xy(u, lines.level(j)))
        assert img == lines.to_xy(u, lines.value(j, u))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_identity_left_of_t_next(n):
    h = [H1, H2, H3][n - 1]
    rng = random.Random(11)
    for _ in range(200):
        p = Point(F(1, 2) + (t(n + 1) - F(1, 2)) * F(rng.randrange(257), 256),
                  F(rng.randrange(513), 256))
        assert h.apply(p) == p


def test_point_on_E_fixed():
    for h in (H1, H2, H3):
        assert h.apply((F(1, 2), F(7, 5))) == Point(F(1, 2), F(7, 5))


@pytest.mark.parametrize("h", [H1, H3], ids=["h1", "h3"])
def test_odd_identity_near_horizontal_edges(h):
    eps = h.family.lines.params.a_prime / 128
    for x in (F(3, 4) + F(1, 1000), F(31, 32), F(1)):
        for y in (0, eps / 3, eps, 2 - eps, 2 - eps / 5, 2):
            assert h.apply((x, y)) == Point(x, y)


def test_even_identity_near_right_edge():
    eps = H2.family.lines.params.a_prime / 128
    for y in (F(0), F(1, 3), F(5, 4), F(2)):
        for x in (1 - eps, 1 - eps / 7, F(1)):
            assert H2.apply((x, y)) == Point(x, y)


def test_hole_boundary_preserved():
    hole = Rect(F(7, 8), 1, F(1, 2), F(5, 8))
    h = straightener(1, [Hole(hole, stage=0)])
    edge_pts = []
    for k in range(33):
        s = F(k, 32)
        edge_pts += [(hole.x_lo + s / 8, hole.y_lo), (hole.x_lo + s / 8, hole.y_hi),
                     (hole.x_lo, hole.y_lo + s / 8), (hole.x_hi, hole.y_lo + s / 8)]
    for p in edge_pts:
        q = h.apply(p)
        on_x = q[0] in (hole.x_lo, hole.x_hi) and hole.y_lo <= q[1] <= hole.y_hi
        on_y = q[1] in (hole.y_lo, hole.y_hi) and hole.x_lo <= q[0] <= hole.x_hi
        assert on_x or on_y
        assert h.apply_inverse(q) == p
    # the corners are fixed, so the image of each edge is the whole edge
    for c in hole.polygon():
        assert h.apply(c) == c


def test_unordered_chains_rejected():
    lines = build_lines(PS[0])
    lines._amp = {j: (lines.d * 2 if j == 3 else lines.c) for j in range(lines.m + 1)}
    with pytest.raises(MapError, match="not ordered"):
        build_straightener(lines)


def test_polygon_crossing_one_breakline():
    lines = H1.family.lines
    i = lines.strips
    peak = lines.strip_range(i)[0] + lines.w / 2
    y0 = lines.level(5) + lines.d / 3
    rect = Rect(peak - lines.w / 4, peak + lines.w / 4, y0, y0 + lines.d / 4)
    img = H1.apply_polygon(rect.polygon())
    # independent count: edges of the rectangle meeting Vert(peak) away from corners
    v_top, v_bot = Point(peak, 3), Point(peak, -1)
    verts = rect.polygon().vertices
    hits = sum(segments_meet(verts[k], verts[(k + 1) % 4], v_bot, v_top) for k in range(4))
    assert hits == 2
    assert len(img.vertices) == 4 + hits
    assert img.area == rect.area  # shears preserve area


def test_apply_polygon_vertices_on_map():
    rng = random.Random(3)
    for _ in range(20):
        x0 = F(3, 4) + F(rng.randrange(200), 1000)
        y0 = F(rng.randrange(1800), 1000)
        rect = Rect(x0, x0 + F(rng.randrange(1, 50), 1000), y0, y0 + F(rng.randrange(1, 150), 1000))
        img = H1.apply_polygon(rect.polygon())
        assert img.area == rect.area
        for v in img.vertices:
            assert H1.apply(H1.apply_inverse(v)) == v


# Lipschitz and delta

@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_lipschitz_analytic_dominates(n):
    h = straightener(n) if n <= 3 else build_straightener(build_lines(PS[3], (), PS[2].a))
    assert straightener_lipschitz_bound(h) <= straightener_lipschitz(PS[n - 1])


@pytest.mark.parametrize("n", [4, 5, 6])
def test_bend_lipschitz_exact(n):
    assert BENDS.bend(n).lipschitz_bound() == bend_lipschitz(BENDS.params(n).a)


def test_composite_submultiplicative():
    class Scaled:
        def __init__(self, k):
            self.k = k

        def lipschitz_bound(self):
            return F(self.k)

    assert CompositeMap([Scaled(2), Scaled(3)]).lipschitz_bound() == 6
    assert composite_H([]).lipschitz_bound() == 1


def test_delta_identity_composite():
    p = PS[0]
    assert derive_delta(1, p.L, F(1), F(1)) == p.L / 4
    assert p.delta == p.L / 4


@pytest.mark.parametrize("n", [2, 3])
def test_delta_certificate(n):
    Hn = composite_H([H1, H2][: n - 1])
    p = PS[n - 1]
    bound = (p.L / 2 ** (n + 1)) ** 2
    rng = random.Random(n)
    for _ in range(1000):
        a = rand_point(rng, 12)
        dx = p.delta * F(rng.randrange(-700, 701), 1000)
        dy = p.delta * F(rng.randrange(-700, 701), 1000)
        b = Point(min(max(a[0] + dx, F(1, 2)), 1), min(max(a[1] + dy, 0), 2))
        u, v = Hn.apply(a), Hn.apply(b)
        assert (u[0] - v[0]) ** 2 + (u[1] - v[1]) ** 2 < bound


# displacement

def test_displacement_identity():
    flat = build_straightener(build_lines(tampered(PS[1], c=F(0)), (), PS[0].a))
    assert all(flat.apply(q) == q for q in [(F(3, 4), F(1, 3)), (F(9, 10), F(7, 4))])
    rep = displacement_check(flat, 2, PS[0].a)
    assert rep["max"] == 0 and rep["pass"]


def test_displacement_stage_four():
    h4 = build_straightener(build_lines(PS[3], (), PS[2].a))
    lines = h4.family.lines
    ranges = [lines.strip_range(i) for i in (1, lines.strips // 2, lines.strips)]
    rep = displacement_check(h4, 4, PS[2].a, ranges)
    assert rep["pass"] and 0 < rep["max"] < rep["bound"]


def test_displacement_violation_has_witness():
    class Loud(FiberedPLMap):
        def max_displacement(self, lo=None, hi=None):
            return F(1), Point(F(3, 4), F(1))

    rep = displacement_check(Loud(H2.family), 2, PS[0].a)
    assert not rep["pass"] and rep["witness"] == Point(F(3, 4), 1)


def test_displacement_odd_rejected():
    with pytest.raises(MapError):
        displacement_check(H1, 1, F(1))


# bends and F

def test_first_bends_identity():
    for n in (1, 2, 3):
        assert isinstance(build_bend(n), IdentityMap)


def test_bend_period_must_divide():
    with pytest.raises(MapError):
        build_bend(4, F(3, 16))


@pytest.mark.parametrize("n", [4, 5, 6])
def test_bend_conditions_every_period(n):
    rows = bend_conditions(BENDS.bend(n))
    a = BENDS.params(n).a
    assert len(rows) == (t(n - 4) - t(n - 3)) / a
    assert all(r["cond1"] and r["cond2"] for r in rows)


def test_bend_peak_witness():
    f4 = BENDS.bend(4)
    a = BENDS.params(4).a
    assert f4.apply((t(1) + a / 4, a))[1] > 2 - a


def test_bend_identity_at_period_boundaries():
    f5 = BENDS.bend(5)
    a = BENDS.params(5).a
    for k in range(3):
        x = t(2) + k * a
        for y in (F(0), a, F(1), 2 - a / 3):
            assert f5.apply((x, y)) == Point(x, y)


def test_bend_identity_outside_strip():
    f5 = BENDS.bend(5)
    for x in (F(1, 2), t(2) - F(1, 1000), t(1) + F(1, 1000), F(1)):
        assert f5.apply((x, F(1, 7))) == Point(x, F(1, 7))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 6), st.fractions(0, 2))
def test_bend_periodic_and_vertical(k, y):
    f5 = BENDS.bend(5)
    a = BENDS.params(5).a
    periods = int((t(1) - t(2)) / a)
    x = t(2) + a * F(k % (10 ** 3 * (periods - 1)), 10 ** 3)
    p, q = f5.apply((x, y)), f5.apply((x + a, y))
    assert p[0] == x and q[0] == x + a and p[1] == q[1]


def test_F_top_strip_is_f4():
    p = Point(F(3, 4) + BENDS.params(4).a / 4, BENDS.params(4).a)
    assert BENDS.eval_F(p) == BENDS.bend(4).apply(p)


def test_F_undefined_on_E():
    with pytest.raises(MapError, match="F undefined on E"):
        eval_F((F(1, 2), 1))


def test_F_identity_zone():
    p = Point(F(7, 8), 0)
    assert eval_F(p, BENDS) == p


@pytest.mark.parametrize("n", [1, 2, 3])
def test_F_consistent_at_strip_boundaries(n):
    x = t(n)
    for y in (F(0), F(1, 9), F(1), F(2) - F(1, 1024)):
        left = BENDS.F_maps(n + 1).apply((x, y))
        right = BENDS.F_maps(n).apply((x, y))
        assert left == right


def test_F_width_preserved():
    rng = random.Random(5)
    for _ in range(100):
        n = rng.randrange(1, 3)
        lo, hi = t(n), t(n - 1)
        x0 = lo + (hi - lo) * F(rng.randrange(0, 900), 1000)
        x1 = min(hi, x0 + F(rng.randrange(1, 1001), 32000))
        y0 = F(rng.randrange(0, 1900), 1000)
        y1 = y0 + F(rng.randrange(1, 2000 - int(y0 * 1000)), 1000)
        poly = Polygon(((x0, y0), (x1, y0), ((x0 + x1) / 2, y1)))
        img = BENDS.apply_F_polygon(poly)
        assert width(img) == width(poly)


def test_F_polygon_across_strips_rejected():
    with pytest.raises(MapError):
        BENDS.apply_F_polygon(Rect(F(5, 8), F(7, 8), 0, 1).polygon())
