from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from carpet_forge.carpet import carpet_approx
from carpet_forge.geom import Point, Rect
from carpet_forge.quotient import (PINCH, R1, R2, UNIT, Patch, PatchworkMap, QuotientError,
                                   affine_embeds, boundary_agreement, collapse_preimage,
                                   conjugate, grid_monotone_open_check, identify_points,
                                   map_T, map_Tprime, nerve_quotient, theorem2_surrogate)

fracs = st.fractions(min_value=0, max_value=1, max_denominator=64)


@pytest.fixture(scope="module")
def thm2():
    return theorem2_surrogate(2)


def test_T_examples():
    assert map_T((1, F(3, 7))) == (1, F(3, 7))
    assert map_T((F(1, 2), 1)) == (F(1, 2), F(1, 2))
    assert map_Tprime((1, F(2, 5))) == (1, 0)


@given(fracs, fracs)
def test_T_keeps_vertical_lines(x, y):
    assert map_T((x, y)).x == x and map_Tprime((x, y)).x == x
    assert map_T((0, y)) == (0, 0)
    assert map_Tprime((0, y)) == (0, y)


def test_affine_embeds():
    h1, h2 = affine_embeds()
    assert h1((0, 0)) == (F(1, 6), F(5, 9))
    assert h1((1, 1)) == (F(2, 9), F(7, 9))
    assert h2((1, 0)) == (F(1, 6), F(5, 9))
    assert h1.rect(UNIT) == R1 and h2.rect(UNIT) == R2


@given(fracs, fracs)
def test_affine_inverse(x, y):
    for h in affine_embeds():
        assert h.inverse(h((x, y))) == (x, y)


def test_Tprime_right_edge_collapse():
    r = F(1, 16)
    pre = collapse_preimage(map_Tprime, (1, 0), UNIT, r)
    assert pre == [Point(1, k * r) for k in range(17)]
    # T fixes the right edge instead
    assert collapse_preimage(map_T, (1, 0), UNIT, r) == [Point(1, 0)]


def test_patchwork_default_branch(thm2):
    for p in [(F(1, 2), F(1, 10)), (F(9, 10), F(9, 10)), (F(1, 20), F(2, 3))]:
        assert thm2.patchwork(p) == p


def test_patchwork_shared_edge(thm2):
    pw = thm2.patchwork
    for k in range(9):
        p = Point(F(1, 6), F(5, 9) + F(2, 9) * F(k, 8))
        vals = {b.fn(p) for b in pw.branches(p)}
        assert len(pw.branches(p)) == 2 and vals == {PINCH}


def test_boundary_agreement(thm2):
    rep = boundary_agreement(thm2.patchwork, thm2.source)
    assert rep["pass"] and rep["checked"] == 72


def test_boundary_agreement_detects_swap(thm2):
    h1, h2 = affine_embeds()
    bad = PatchworkMap([Patch(R1, conjugate(h1, map_Tprime), "swap1"),
                        Patch(R2, conjugate(h2, map_T), "swap2")])
    rep = boundary_agreement(bad, thm2.source)
    assert not rep["pass"]


def test_patches_must_not_overlap():
    with pytest.raises(QuotientError, match="overlap"):
        PatchworkMap([Patch(UNIT, map_T, "a"), Patch(Rect(0, F(1, 2), 0, F(1, 2)), map_T, "b")])


def test_rectangles_bounded_by_holes(thm2):
    # top and bottom edges of the patches are hole edges of the outer carpet
    rects = carpet_approx(3).hole_rects
    assert Rect(F(1, 9), F(2, 9), F(7, 9), F(8, 9)) in rects
    assert Rect(F(1, 9), F(2, 9), F(4, 9), F(5, 9)) in rects


def test_B_pinch(thm2):
    ident = thm2.identification
    assert len(ident.classes) == 1 and ident.lobes == (2,)
    assert {p for _, p in ident.classes[0]} == {PINCH}
    assert PINCH in R1.polygon().vertices and PINCH in R2.polygon().vertices


def test_source_is_valid_region(thm2):
    assert thm2.source.check_invariants() == []
    # the carpet copies carry their own centre holes
    assert len(thm2.source.holes) == len(carpet_approx(3).holes) + 2


def test_depth_bound():
    with pytest.raises(QuotientError):
        theorem2_surrogate(9)


def test_identify_points():
    c = carpet_approx(2)
    hole = c.hole_rects[0]
    two = identify_points(c.region, [((hole.x_lo, hole.y_lo), (hole.x_hi, hole.y_hi))])
    assert two.lobes == (2,)
    four = identify_points(c.region, [hole.polygon().vertices])
    assert four.lobes == (4,)
    same = identify_points(c.region, [((hole.x_lo, hole.y_lo), (hole.x_lo, hole.y_lo))])
    assert same.classes == ()
    with pytest.raises(QuotientError, match="hole boundary"):
        identify_points(c.region, [((0, 0), (hole.x_lo, hole.y_lo))])


def test_nerve_single_cell():
    nq = nerve_quotient([UNIT])
    assert nq.vertices == 1 and nq.edges == set()
    assert nq((F(1, 3), F(1, 5))) == nq((1, 1)) == 0


def test_nerve_grid():
    cells = [Rect(i, i + 1, j, j + 1) for j in range(3) for i in range(3)]
    nq = nerve_quotient(cells)
    assert nq.vertices == 9
    brute = {(a, b) for a in range(9) for b in range(a + 1, 9)
             if max(abs(a % 3 - b % 3), abs(a // 3 - b // 3)) == 1}
    assert nq.edges == brute and len(brute) == 20
    assert all(len(f.regions) == 1 for f in nq.fibers)
    with pytest.raises(QuotientError):
        nq((5, 5))


@pytest.mark.parametrize("r", [F(1, 9), F(1, 27)])
def test_identity_monotone_open(thm2, r):
    for dom in (UNIT, carpet_approx(2).region):
        g = grid_monotone_open_check(lambda p: p, dom, r)
        assert g.monotone and g.open and g.fibers == g.cells


def test_T_grid_negative_control():
    g = grid_monotone_open_check(map_T, UNIT, F(1, 27))
    assert g.monotone
    assert g.cells == 27 * 27
    # the left column collapses into image row 0, so fibers are fewer than cells
    assert g.fibers < g.cells
    assert not g.open
    col0 = {c for c in g.open_violations if c[0] == 0}
    assert {(0, j) for j in range(9)} <= col0 and len(col0) > 20


def test_theorem2_grid_monotone(thm2):
    pw = thm2.patchwork
    g = grid_monotone_open_check(pw, thm2.source, F(1, 54), pw.breaks())
    assert g.monotone and g.cells > 2000


def test_resolution_must_align(thm2):
    pw = thm2.patchwork
    with pytest.raises(QuotientError, match="straddles"):
        grid_monotone_open_check(pw, thm2.source, F(1, 50), pw.breaks())
