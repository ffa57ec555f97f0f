import json
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from carpet_forge.schedule import (ScheduleError, build_schedule, divides, dyadic_below,
                                   relaxed_profile, report_json, report_ok, t, tampered,
                                   validate_schedule)

A1 = F(1, 2 ** 33)


def test_t_sequence():
    assert t(0) == 1
    assert [t(n) for n in range(1, 4)] == [F(3, 4), F(5, 8), F(9, 16)]


def test_paper_stage_one_items_1_to_5():
    p = build_schedule(1, "paper")[0]
    assert p.t == F(3, 4)
    assert p.a == A1
    assert p.c == F(1, 2 ** 25)
    assert p.L == A1 / 24
    assert p.K == A1 / 6


def test_paper_stage_one_item_8d_bound():
    p = build_schedule(1, "paper")[0]
    assert p.b_bounds["8d"] == F(1, 2 ** 40)


def test_paper_stage_one_derived_chain():
    # by hand: delta = L/4 since H_1 = Id; min bound is a/1024 = 2^-43
    p = build_schedule(1, "paper")[0]
    assert p.delta == A1 / 96
    assert p.b == F(1, 2 ** 44)
    assert p.d == F(1, 2 ** 45)
    assert p.a_prime == F(1, 2 ** 47) and p.s == F(1, 2 ** 46)
    assert p.k == 2 ** 14 + 4


def test_seed_constants():
    prof = relaxed_profile("paper")
    assert (prof.a1, prof.c1, prof.L0, prof.k0) == (A1, F(1, 2 ** 25), F(1, 128), 512)


def test_paper_all_pass_six_stages():
    rows = validate_schedule(build_schedule(6, "paper"), "paper")
    bad = [r for r in rows if r["status"] not in ("pass", "info")]
    assert bad == []


def test_mesh_chaining():
    ps = build_schedule(6, "paper")
    for p, nxt in zip(ps, ps[1:]):
        assert nxt.a == p.d / 4 == p.a_prime


def test_desk_profile():
    prof = relaxed_profile("desk")
    assert prof.k_floor == 8 and prof.mode == "relaxed"
    ps = build_schedule(5, prof)
    assert [p.a for p in ps] == [F(1, 8), F(1, 32), F(1, 128), F(1, 512), F(1, 2048)]
    assert all(p.k == 8 for p in ps)


def test_relaxed_k_warning():
    rows = validate_schedule(build_schedule(1, "desk"), "desk")
    w = [r for r in rows if r["item"] == "12a"]
    assert w[0]["status"] == "warn" and "512" in w[0]["note"]
    assert report_ok(rows)


def test_tampered_s_fails_item_11():
    ps = build_schedule(2, "desk")
    ps[1] = tampered(ps[1], s=ps[1].d)
    rows = validate_schedule(ps, "desk")
    assert any(r["item"] == "11b" and r["status"] == "fail" for r in rows)
    assert not report_ok(rows)


def test_unknown_profile():
    with pytest.raises(ScheduleError):
        relaxed_profile("nope")


def test_env_profile(monkeypatch):
    monkeypatch.setenv("CARPET_FORGE_PROFILE", "paper")
    assert relaxed_profile().name == "paper"


def test_report_json_rationals():
    rows = json.loads(report_json(validate_schedule(build_schedule(1, "paper"), "paper")))
    assert {"stage", "item", "status", "lhs", "rhs"} <= set(rows[0])
    assert all("/" in r["lhs"] for r in rows if r["item"] == "2")


def test_bend_period_divides_strip():
    for p in build_schedule(6, "paper")[4:]:
        assert divides(p.a, t(p.n - 4) - t(p.n - 3))


@given(st.fractions(min_value=F(1, 10 ** 9), max_value=10 ** 6))
def test_dyadic_below(x):
    d = dyadic_below(x)
    assert d < x <= 2 * d
    assert (d.numerator == 1 and d.denominator & (d.denominator - 1) == 0) or \
        (d.denominator == 1 and d.numerator & (d.numerator - 1) == 0)
