"""Stage parameter schedule: derivation in construction order and exhaustive validation.

Two modes share one code path.  ``paper`` uses the published seeds and
bounds.  ``relaxed`` keeps every equality but swaps the smallness bounds for
desk-scale ones; paper-bound violations are then reported as warnings.
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

HALF = Fraction(1, 2)


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class Profile:
    name: str
    mode: str                 # "paper" | "relaxed"
    a1: Fraction
    c1: Fraction
    L0: Fraction
    k0: int
    k_floor: int
    # relaxed smallness: b_n < b_factor * a_n, d_n | 2^-(n + d_shift)
    b_factor: Fraction = Fraction(0)
    d_shift: int = 9


PROFILES = {
    "paper": Profile("paper", "paper", Fraction(1, 2 ** 33), Fraction(1, 2 ** 25),
                     Fraction(1, 128), 512, 512),
    "desk": Profile("desk", "relaxed", Fraction(1, 8), Fraction(1, 32), Fraction(1, 8), 8, 8,
                    b_factor=Fraction(4), d_shift=2),
}


def relaxed_profile(name: str | None = None) -> Profile:
    """Seed constants for a named profile (default from ``CARPET_FORGE_PROFILE``)."""
    name = name or os.environ.get("CARPET_FORGE_PROFILE", "desk")
    try:
        return PROFILES[name]
    except KeyError:
        raise ScheduleError(f"unknown profile {name!r}") from None


def t(n: int) -> Fraction:
    """Zone abscissa ``1/2 + 2^-(n+1)``; ``t(0) = 1``."""
    return HALF + Fraction(1, 2 ** (n + 1))


def divides(x: Fraction, y: Fraction) -> bool:
    """``y / x`` is an integer."""
    return x != 0 and (Fraction(y) / Fraction(x)).denominator == 1


def dyadic_below(x: Fraction) -> Fraction:
    """Largest ``2^-m`` (``m`` any integer) strictly below ``x > 0``."""
    if x <= 0:
        raise ScheduleError("no positive dyadic below a nonpositive bound")
    x = Fraction(x)
    e = x.numerator.bit_length() - x.denominator.bit_length()
    # 2^e is within a factor 2 of x
    p = Fraction(2) ** (e + 1)
    while p >= x:
        p /= 2
    return p


# Lipschitz bounds of the stage maps, in closed form from the parameters.
# Each is an upper bound on the per-triangle operator norm 1 + |shear| + |scale|.

def tooth_width(p) -> Fraction:
    return (p.a - p.s) / p.k


def straightener_lipschitz(p) -> Fraction:
    # the band next to the identity breakline at a'/128 stretches most
    return 1 + 2 * p.c / tooth_width(p) + (p.d + p.c) / (p.d - p.a_prime / 128)


def bend_lipschitz(a: Fraction) -> Fraction:
    return 1 + 4 * (2 - 3 * a / 2) / a + (2 - a / 2) / a


@dataclass(frozen=True)
class StageParams:
    n: int
    mode: str
    t: Fraction
    a: Fraction
    c: Fraction
    L: Fraction
    K: Fraction
    delta: Fraction
    b: Fraction
    d: Fraction
    a_prime: Fraction
    s: Fraction
    k: int
    m: int
    lip_H: Fraction = Fraction(1)
    lip_FH: Fraction = Fraction(1)
    b_bounds: dict = field(default_factory=dict, compare=False)
    d_divides: tuple = field(default=(), compare=False)

    @property
    def odd(self) -> bool:
        return self.n % 2 == 1

    def to_json(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            if isinstance(v, Fraction):
                out[k] = f"{v.numerator}/{v.denominator}"
            elif isinstance(v, dict):
                out[k] = {kk: f"{vv.numerator}/{vv.denominator}" for kk, vv in v.items()}
            elif isinstance(v, tuple):
                out[k] = [f"{x.numerator}/{x.denominator}" for x in v]
            else:
                out[k] = v
        return out


def d_targets(n: int, prev: StageParams | None, profile: Profile) -> tuple:
    """Numbers that ``d_n`` must divide."""
    out = [Fraction(1, 2 ** (n + profile.d_shift))]
    if prev is not None:
        out.append(prev.a / 2)
    if n % 2 == 0:
        if n > 4:
            out += [1 - t(n - 4), t(n - 4) - t(n), t(n) - HALF]
        else:
            tp = 1 - prev.a / 2
            out += [tp - t(n), t(n) - HALF]
    return tuple(out)


def derive_params(prev: StageParams | None, profile: Profile,
                  history: Sequence[StageParams] = ()) -> StageParams:
    """Parameters of stage ``prev.n + 1`` (or stage 1) in construction order."""
    n = 1 if prev is None else prev.n + 1
    # items 1-5
    tn = t(n)
    a = profile.a1 if prev is None else prev.a_prime
    c = profile.c1 if prev is None else prev.a / 9
    L = a / 24
    K = 4 * L
    # item 7: delta from the Lipschitz bounds of H_n and f_n o ... o f_1 o H_n
    lip_H = Fraction(1)
    for h in history:
        lip_H *= straightener_lipschitz(h)
    lip_F = Fraction(1)
    for i in range(4, n + 1):
        lip_F *= bend_lipschitz(a if i == n else history[i - 1].a)
    lip_FH = lip_F * lip_H
    delta = min(L / 2 ** (n + 1) / lip_H, Fraction(1, 2 ** (n + 1)) / lip_FH)
    # item 8
    k_prev = profile.k0 if prev is None else prev.k
    bounds = {"8a": delta / 4, "8b": a / (2 * k_prev), "8d": a / 2 ** (n + 6)}
    if prev is not None:
        bounds["8c"] = prev.b * (prev.a - prev.s) / (4 * prev.k * (prev.c + prev.b))
    if profile.mode == "paper":
        b = dyadic_below(min(bounds.values()))
    else:
        b = dyadic_below(profile.b_factor * a)
    # item 9: largest dyadic d < b dividing every target
    targets = d_targets(n, prev, profile)
    d = dyadic_below(b)
    for _ in range(400):
        if all(divides(d, y) for y in targets) and d < 2 * a:
            break
        d /= 2
    else:
        raise ScheduleError(f"schedule infeasible at stage {n}: item 9")
    # item 11
    a_prime = d / 4
    s = d / 2
    # item 12
    k = max(profile.k_floor, int(a / a_prime) + 1)
    k += (-k) % 4
    m = int((2 if n % 2 else HALF) / d) - 2
    for name, v in (("a", a), ("c", c), ("delta", delta), ("b", b), ("d", d)):
        if v <= 0:
            raise ScheduleError(f"schedule infeasible at stage {n}: {name} nonpositive")
    return StageParams(n, profile.mode, tn, a, c, L, K, delta, b, d, a_prime, s, k, m,
                       lip_H, lip_FH, bounds, targets)


def build_schedule(stages: int, profile: Profile | str = "desk") -> list:
    if isinstance(profile, str):
        profile = relaxed_profile(profile)
    out = []
    prev = None
    for _ in range(stages):
        prev = derive_params(prev, profile, out)
        out.append(prev)
    return out


# validation

def _fmt(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return f"{v}/1"
    return str(v)


def validate_schedule(params: Sequence[StageParams], profile: Profile | str = "desk") -> list:
    """Check every item for every stage; returns report rows.

    Each row is ``{stage, item, status, lhs, rhs}`` with status ``pass``,
    ``fail`` or ``warn`` (paper bound violated in relaxed mode).
    """
    if isinstance(profile, str):
        profile = relaxed_profile(profile)
    if not params:
        raise ScheduleError("nothing to validate")
    paper = profile.mode == "paper"
    rows = []

    def add(n, item, ok, lhs, rhs, paper_bound=False, note=""):
        status = "pass" if ok else ("warn" if paper_bound and not paper else "fail")
        row = {"stage": n, "item": item, "status": status, "lhs": _fmt(lhs), "rhs": _fmt(rhs)}
        if note and not ok:
            row["note"] = note
        rows.append(row)

    history = []
    for idx, p in enumerate(params):
        n = p.n
        prev = params[idx - 1] if idx else None
        add(n, "1", p.t == t(n), p.t, t(n))
        if n == 1:
            add(n, "1.t0", t(0) == 1, t(0), 1)
            add(n, "2", p.a == profile.a1, p.a, profile.a1)
            add(n, "3", p.c == profile.c1, p.c, profile.c1)
        else:
            add(n, "2", p.a == prev.a_prime, p.a, prev.a_prime)
            add(n, "3", p.c == prev.a / 9, p.c, prev.a / 9)
        add(n, "4", p.L == p.a / 24, p.L, p.a / 24)
        add(n, "5", p.K == 4 * p.L, p.K, 4 * p.L)
        # item 6: the bend period tiles its strip
        if n >= 4:
            w = t(n - 4) - t(n - 3)
            add(n, "6", divides(p.a, w), w / p.a, "integer")
        # item 7, witnessed through Lipschitz products
        lip_H = Fraction(1)
        for h in history:
            lip_H *= straightener_lipschitz(h)
        lip_F = Fraction(1)
        for i in range(4, n + 1):
            lip_F *= bend_lipschitz(params[i - 1].a)
        add(n, "7a", p.delta * lip_H <= p.L / 2 ** (n + 1), p.delta * lip_H, p.L / 2 ** (n + 1))
        add(n, "7b", p.delta * lip_F * lip_H <= Fraction(1, 2 ** (n + 1)),
            p.delta * lip_F * lip_H, Fraction(1, 2 ** (n + 1)))
        add(n, "7.pos", p.delta > 0, p.delta, 0)
        # item 8
        k_prev = profile.k0 if prev is None else prev.k
        add(n, "8a", p.b < p.delta / 4, p.b, p.delta / 4, True)
        add(n, "8b", p.b < p.a / (2 * k_prev), p.b, p.a / (2 * k_prev), True)
        if prev is not None:
            rhs = prev.b * (prev.a - prev.s) / (4 * prev.k * (prev.c + prev.b))
            add(n, "8c", p.b < rhs, p.b, rhs, True)
        add(n, "8d", p.b < p.a / 2 ** (n + 6), p.b, p.a / 2 ** (n + 6), True)
        add(n, "8.pos", p.b > 0, p.b, 0)
        if not paper:
            add(n, "8.relaxed", p.b < profile.b_factor * p.a, p.b, profile.b_factor * p.a)
        # item 9
        add(n, "9a", divides(p.d, Fraction(1, 2 ** (n + 9))), p.d, Fraction(1, 2 ** (n + 9)), True)
        if not paper:
            y = Fraction(1, 2 ** (n + profile.d_shift))
            add(n, "9a.relaxed", divides(p.d, y), p.d, y)
        if prev is not None:
            add(n, "9a'", divides(p.d, prev.a / 2), p.d, prev.a / 2)
        if n % 2 == 0:
            extra = ([1 - t(n - 4), t(n - 4) - t(n)] if n > 4
                     else [1 - prev.a / 2 - t(n)]) + [t(n) - HALF]
            for j, y in enumerate(extra):
                add(n, f"9.even{j}", divides(p.d, y), p.d, y)
        add(n, "9.d<b", p.d < p.b, p.d, p.b)
        span = 2 if n % 2 else HALF
        add(n, "9.m", p.m == span / p.d - 2, p.m, span / p.d - 2)
        # item 11
        add(n, "11a", p.a_prime == p.d / 4, p.a_prime, p.d / 4)
        add(n, "11b", p.s == 2 * p.a_prime and p.s == p.d / 2, p.s, p.d / 2)
        add(n, "11.s<a", p.s < p.a, p.s, p.a)
        # item 12
        add(n, "12a", p.k >= 512, p.k, 512, True, "k_n >= 512 violated")
        if not paper:
            add(n, "12a.relaxed", p.k >= profile.k_floor, p.k, profile.k_floor)
        add(n, "12b", p.k % 4 == 0, p.k % 4, 0)
        add(n, "12c", p.k > p.a / p.a_prime, p.k, p.a / p.a_prime)
        # consistency of the division meshes
        if prev is not None:
            add(n, "mesh", p.a == prev.d / 4, p.a, prev.d / 4)
        if n > 4:
            add(n, "bend.div", divides(p.a, t(n - 4) - t(n - 3)), (t(n - 4) - t(n - 3)) / p.a,
                "integer")
        # margin of the neighbourhood bound, reported only
        if True:
            lhs = 12 * p.L + 3 * p.K
            rows.append({"stage": n, "item": "eq1.margin", "status": "info",
                         "lhs": _fmt(lhs), "rhs": _fmt(p.a)})
        history.append(p)
    return rows


def report_ok(rows) -> bool:
    return all(r["status"] != "fail" for r in rows)


def report_json(rows) -> str:
    return json.dumps(rows, indent=2, sort_keys=True)


def tampered(p: StageParams, **changes) -> StageParams:
    return replace(p, **changes)
