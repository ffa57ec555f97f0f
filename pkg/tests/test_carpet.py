from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from carpet_forge.carpet import (BrSignature, PinchedSpec, b_chain, b_frame, carpet_approx,
                                 on_hole_boundary, pinched_space, whyburn_report)
from carpet_forge.geom import GeometryError, Point, Rect, Region
from carpet_forge.regionops import contains


def test_depth_one_is_square():
    c = carpet_approx(1)
    assert c.region.holes == () and c.region.area == 1


def test_depth_two_center_hole():
    c = carpet_approx(2)
    assert c.hole_rects == [Rect(F(1, 3), F(2, 3), F(1, 3), F(2, 3))]
    assert c.region.area == F(8, 9)


def test_depth_three_counts():
    c = carpet_approx(3)
    assert len(c.holes) == 9
    assert c.region.area == F(64, 81)
    # independent area sum over the hole list
    assert 1 - sum(r.area for r in c.hole_rects) == F(64, 81)


def test_depth_zero_rejected():
    with pytest.raises(GeometryError):
        carpet_approx(0)


@pytest.mark.parametrize("i", [1, 2, 3, 4, 5])
def test_hole_count_and_area(i):
    frame = Rect(F(1, 2), 1, 0, 2)
    c = carpet_approx(i, frame)
    assert len(c.holes) == (8 ** (i - 1) - 1) // 7
    assert c.region.area == frame.area * F(8, 9) ** (i - 1)


@pytest.mark.parametrize("i", [1, 2, 3, 4])
def test_nested(i):
    a, b = carpet_approx(i), carpet_approx(i + 1)
    # holes of S_i survive in S_{i+1}, so S_{i+1} is a subset
    assert set(a.hole_rects) <= set(b.hole_rects)
    if i <= 2:
        assert contains(a.region, b.region)


def test_generation_order_row_major():
    gen = carpet_approx(3).generations[1]
    keys = [(r.y_lo, r.x_lo) for r in gen]
    assert keys == sorted(keys)


def test_depth_three_region_valid():
    assert carpet_approx(3).region.check_invariants() == []


# B chain

def test_b_frames():
    assert b_frame(0) == Rect(0, 1, 0, 1)
    assert b_frame(1) == Rect(1, F(4, 3), 0, F(1, 3))
    assert b_frame(2) == Rect(F(4, 3), F(13, 9), 0, F(1, 9))


def test_b_frames_accumulate():
    ch = b_chain(12)
    assert ch.accumulation == Point(F(3, 2), 0)
    assert F(3, 2) - ch.frames[-1].x_hi == F(1, 2) * F(1, 3) ** 12
    for n, fr in enumerate(ch.frames):
        assert fr.width == fr.height == F(1, 3) ** n


def test_b_frames_meet_in_segment():
    # the displayed formula makes consecutive frames share part of an edge
    ch = b_chain(3)
    assert ch.contact(0) == (Point(1, 0), Point(1, F(1, 3)))
    assert ch.contact(1) == (Point(F(4, 3), 0), Point(F(4, 3), F(1, 9)))


def test_b_stage_lobes():
    ch = b_chain(4)
    assert ch.stages[0] is None
    assert [s.lobes for s in ch.stages[1:]] == [2, 3, 4, 5]


# pinched spaces

def test_two_lobes():
    ps = pinched_space(PinchedSpec(2))
    assert len(ps.identifications) == 1 and len(ps.center) == 2
    assert all(on_hole_boundary(p, ps.region) for p in ps.center)


def test_three_lobes():
    ps = pinched_space(PinchedSpec(3))
    assert [len(c) for c in ps.identifications] == [3]


def test_pinched_lobe():
    ps = pinched_space(PinchedSpec(2, (False, True)))
    assert [len(c) for c in ps.identifications] == [2, 2]
    lobe = ps.lobe_classes[0]
    assert not set(lobe) & set(ps.center)
    assert all(on_hole_boundary(p, ps.region) for p in lobe)


def test_identification_off_boundary():
    with pytest.raises(GeometryError, match="not on a hole boundary"):
        pinched_space(PinchedSpec(2), extra=[((F(1, 2), F(1, 2)), (0, 0))])


def test_missing_hole():
    with pytest.raises(GeometryError):
        pinched_space(PinchedSpec(2), depth=1)


# B^r

def test_br_from_rational():
    assert BrSignature.from_rational(F(5, 8), 4).r_bits == (1, 0, 1, 0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=8),
       st.lists(st.integers(0, 1), min_size=1, max_size=8))
def test_br_distinct(r, s):
    if len(r) != len(s):
        return
    a, b = BrSignature(tuple(r)), BrSignature(tuple(s))
    assert (a.bookkeeping() == b.bookkeeping()) == (r == s)


def test_br_bit_one_pinches():
    ch = BrSignature((1, 0, 1)).chain()
    assert [s.pinch_flags[0] for s in ch.stages[1:]] == [True, False, True]


# Whyburn proxies

def test_whyburn_depth_three():
    c = carpet_approx(3)
    rep = whyburn_report(c.region, 3, generations=c.generations)
    assert rep["pass"]
    assert rep["hole_diameters2"]["values"] == [F(2, 9), F(2, 81)]


def test_whyburn_plain_rectangle_fails_density():
    rep = whyburn_report(Rect(0, 1, 0, 1).region(), eps=F(1, 9))
    assert not rep["density"]["pass"]


def test_whyburn_touching_holes_fail():
    r = Region(Rect(0, 3, 0, 3).polygon(),
               (Rect(F(1, 2), 1, F(1, 2), 1).polygon(), Rect(1, 2, 1, 2).polygon()))
    rep = whyburn_report(r, eps=F(1, 2))
    assert not rep["simple_disjoint"]["pass"]
