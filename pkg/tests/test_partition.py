from fractions import Fraction as F
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from carpet_forge.geom import Point, Rect, point_in_polygon, polygons_meet
from carpet_forge.partition import (D, RECT, TRANSITION, TYPE1, TYPE2, Division, Hole,
                                    PartitionError, build_cells, build_lines, cell_metrics,
                                    cell_pieces, next_division, ordinates, refine_division,
                                    representative_strips, verify_partition)
from carpet_forge.regionops import region_ops, union_all
from carpet_forge.schedule import build_schedule, t
from carpet_forge.star import star

PS = build_schedule(5, "desk")


def stage(n, holes=()):
    p = PS[n - 1]
    prev = PS[n - 2].a if n > 1 else None
    return build_cells(build_lines(p, holes, prev), holes)


S1 = stage(1)
S2 = stage(2)


def test_refine_vertical():
    r = refine_division(Division("vertical", F(1, 8)))
    assert r.mesh == F(1, 32) and r.count == 16


def test_refine_horizontal():
    r = refine_division(Division("horizontal", F(1, 4)))
    assert r.mesh == F(1, 16) and r.count == 32


def test_refine_non_integer():
    with pytest.raises(PartitionError):
        refine_division(Division("vertical", F(3, 8)))


def test_division_strips_tile():
    div = Division("vertical", F(1, 8))
    assert sum(r.area for r in div.strips) == D.area
    assert div.strip(1) == Rect(F(1, 2), F(5, 8), 0, 2)


def test_ordinates_plain():
    O = ordinates((), 1)
    assert O.values == (0, 2) and O.nxt(0) == 2
    with pytest.raises(PartitionError, match="no successor"):
        O.nxt(2)


def test_ordinates_one_hole():
    h = Rect(F(5, 8), F(3, 4), F(1, 2), F(5, 8))
    assert ordinates([h], 1).values == (0, F(1, 2), F(5, 8), 2)
    assert {t(2), F(5, 8), F(3, 4), 1} <= set(ordinates([h], 6).values)


def test_even_small_stage_uses_t_prime():
    f = S2.family
    assert 1 - PS[0].a / 2 in f.O.values


def test_odd_lines_m_and_extremes():
    f = S1.family
    assert f.m == 14
    assert f.value(-1, F(3, 4)) == 0 and f.value(15, F(7, 8)) == 2


@pytest.mark.parametrize("n", [1, 3, 5])
def test_odd_lines_straight_in_left_zone(n):
    f = stage(n).family
    for j in range(-1, min(f.m + 1, 60) + 1):
        for x in (F(1, 2), (F(1, 2) + t(n + 1)) / 2, t(n + 1)):
            assert f.value(j, x) == (j + 1) * f.d


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_lines_strictly_ordered(n):
    f = stage(n).family
    assert all(f.min_gap(j) > 0 for j in range(-1, f.m + 1))


def test_rectangular_cells():
    p = PS[0]
    for c in S1.cells():
        if c.kind == RECT:
            x0, x1, y0, y1 = c.polygon.bounds
            assert (x1 - x0, y1 - y0) == (p.a, p.d) and len(c.polygon.vertices) == 4
    assert S1.cell(1, 0).kind == RECT


def test_cell_count_grid():
    assert S1.count() == 4 * (S1.family.m + 2) == 64


def test_kinds_by_zone():
    kinds = {S1.cell(i, 3).kind for i in range(1, 5)}
    assert kinds == {RECT, TRANSITION, TYPE1}
    assert S1.cell(2, 3).kind == TRANSITION


def test_even_kinds_by_column():
    f = S2.family
    assert S2.cell(5, 0).kind == RECT
    j_comb = f.level_index(f.t_n) + 1
    assert S2.cell(5, j_comb).kind == TYPE1


def test_no_type2_without_holes():
    for n in (1, 2, 3):
        P = stage(n)
        f = P.family
        for i in representative_strips(f):
            assert all(P.kind(i, j) != TYPE2 for j in range(f.m + 2))


def test_hole_cell_excluded_and_type2():
    h = Hole(Rect(F(7, 8), 1, F(1, 2), F(5, 8)), stage=0)
    P = stage(1, [h])
    assert not P.exists(4, 4)
    assert P.count() == 63
    assert P.kind(3, 4) == TYPE2
    assert P.kind(3, 2) == TYPE1
    assert verify_partition(P)["pass"]


def test_typical_type1_metrics():
    p = PS[0]
    c = S1.cell(4, 5)
    m = cell_metrics(S1, c)
    assert m["width"] == p.a
    assert m["thickness"] == p.d < p.b
    assert set(m["point_heights"]) == {p.c + p.d}
    assert m["symmetric"]
    pieces = cell_pieces(S1, c)
    assert len(pieces) == p.k
    # each finger is (a - s)/k wide
    for left, right in pieces:
        assert right.bounds[1] - left.bounds[0] == (p.a - p.s) / p.k


def test_pieces_plus_middle_fill_cell():
    c = S1.cell(4, 5)
    parts = [q for pair in cell_pieces(S1, c) for q in pair]
    p = PS[0]
    u0 = S1.family.strip_range(4)[0] + (p.k // 2) * S1.family.w
    lv = S1.family.level(4)
    middle = Rect(u0, u0 + p.s, lv, lv + p.d)
    assert sum(q.area for q in parts) + middle.area == c.polygon.area


@pytest.mark.parametrize("n", [1, 2])
def test_verify_full(n):
    rep = verify_partition(stage(n))
    assert rep["pass"], rep


def test_stage_one_pairwise_disjoint_oracle():
    cells = list(S1.cells())
    for a, b in combinations(cells, 2):
        if polygons_meet(a.polygon, b.polygon):
            assert region_ops(a.polygon, b.polygon, "intersect").area == 0
    assert union_all(c.polygon for c in cells).area == D.area


def test_neighbors_match_exact_touching():
    cells = list(S1.cells())
    for c in cells[::5]:
        want = {d.key for d in cells if polygons_meet(c.polygon, d.polygon)}
        assert {d.key for d in S1.neighbors(c)} == want


def test_star_block():
    c = S1.cell(3, 7)
    assert len(star(c, S1, 2)) == 4 * 5


@settings(max_examples=60, deadline=None)
@given(st.fractions(F(1, 2), 1), st.fractions(0, 2))
def test_locate(x, y):
    for P in (S1, S2):
        found = P.locate(Point(x, y))
        assert found
        for c in found:
            assert point_in_polygon(Point(x, y), c.polygon) != "outside"


def test_next_division_odd():
    rects = [S1.straightened(i, j) for i in range(1, 5) for j in range(16)]
    div = next_division(rects, 1, PS[0].d)
    assert div.orientation == "horizontal" and div.mesh == F(1, 8) and div.count == 16
    assert refine_division(div).mesh == PS[1].a


def test_next_division_even():
    rects = [Rect(F(1, 2) + i * F(1, 16), F(1, 2) + (i + 1) * F(1, 16), 0, 2) for i in range(8)]
    div = next_division(rects, 2)
    assert div.orientation == "vertical" and div.mesh == F(1, 16)


def test_next_division_nonuniform():
    rects = [Rect(F(1, 2), 1, 0, F(1, 4)), Rect(F(1, 2), 1, F(1, 4), 2)]
    with pytest.raises(PartitionError):
        next_division(rects, 1)
