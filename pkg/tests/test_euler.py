import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import rational_grid, unit_lift_value
from torstk.cones import fan_validate
from torstk.euler import (
    ConFun,
    Covering,
    NotFiberFinite,
    Periods,
    SheafSymbol,
    UnsupportedPeriodic,
    canonical,
    confun_combine,
    confun_convolve,
    confun_equal,
    confun_pushforward,
    evaluate,
    nerve_coefficients,
    region_chi,
    standard_periods,
    unit_chi,
    unit_chi_lift,
)
from torstk.lattice import LatticeMap
from torstk.polyhedra import LCRegion

h = Fraction(1, 2)
P1 = fan_validate([[(1,)], [(-1,)]], 1)
A1 = fan_validate([[(1,)]], 1)
P1xP1 = fan_validate([[(a, 0), (0, b)] for a in (1, -1) for b in (1, -1)], 2)
TO_POINT1 = LatticeMap.zero(1, 0)


def chi_c(region):
    """Compactly supported Euler characteristic as a plain integer."""
    out = confun_pushforward(ConFun.indicator(region), LatticeMap.zero(region.ambient_rank, 0))
    return out.value_at(())


@pytest.mark.parametrize(
    "closed_low, closed_high, expected",
    [(True, True, 1), (True, False, 0), (False, True, 0), (False, False, -1)],
)
def test_chi_of_intervals(closed_low, closed_high, expected):
    assert chi_c(LCRegion.box([0], [1], closed_low, closed_high)) == expected


def test_chi_of_square_is_multiplicative():
    sq = LCRegion.box([0, 0], [1, 1], False, False)
    assert chi_c(sq) == 1
    assert chi_c(LCRegion.box([0, 0], [1, 1], True, False)) == 0


def test_unbounded_pushforward_fails():
    ray = LCRegion(1, nonstrict=(((1,), 0),))
    with pytest.raises(NotFiberFinite):
        confun_pushforward(ConFun.indicator(ray), TO_POINT1)


def test_region_chi_costandard_open_interval():
    u = LCRegion.box([0], [1], False, False)
    f = region_chi(SheafSymbol("costandard", u))
    assert f.value_at((h,)) == -1


def test_region_chi_costandard_closed_is_verdier_dual():
    z = LCRegion.box([0], [1], True, True)
    f = region_chi(SheafSymbol("costandard", z))
    # dualizing function of a closed segment: 0 at the ends, -1 inside
    assert evaluate(f, (0,)) == 0 and evaluate(f, (h,)) == -1
    g = region_chi(SheafSymbol("standard", z, shift=1))
    assert evaluate(g, (h,)) == -1


def test_combine_ops():
    a = ConFun.delta((0,))
    b = ConFun.delta((1,))
    assert confun_equal(confun_combine("cofib", a, b), b - a)
    assert confun_equal(confun_combine("fib", a, b), a - b)
    assert confun_equal(confun_combine("shift", a, 3), a.scale(-1))


def test_circle_pushforward():
    seg = ConFun.indicator(LCRegion.box([0], [1]))
    on_circle = confun_pushforward(seg, Covering(standard_periods(1)))
    assert evaluate(on_circle, (Fraction(7, 3),)) == 1


def test_covering_needs_fiber_finiteness():
    ray = ConFun.indicator(LCRegion(1, strict=(((1,), 0),)))
    with pytest.raises(NotFiberFinite):
        confun_pushforward(ray, Covering(standard_periods(1)))


def test_partially_periodic_unbounded_support_is_unsupported():
    per = Periods.of(2, [(1, 0)])
    strip = ConFun(2, ((1, LCRegion.box([0, 0], [1, 1]).with_constraints()),), per)
    assert evaluate(strip, (h, h)) == 1
    # the diagonal is fiber finite over the circle factor but unbounded along it
    diagonal = ConFun(2, ((1, LCRegion(2, equalities=(((1, -1), 0),))),), per)
    with pytest.raises(UnsupportedPeriodic):
        canonical(diagonal)
    ray = ConFun(2, ((1, LCRegion(2, nonstrict=(((1, 0), 0),), equalities=(((0, 1), 0),))),), per)
    with pytest.raises(NotFiberFinite):
        canonical(ray)


def test_plain_convolution_of_intervals():
    a = ConFun.indicator(LCRegion.box([0], [1], True, True))
    b = ConFun.indicator(LCRegion.box([0], [1], True, True))
    c = confun_convolve(a, b)
    # closed + closed: chi of the fiber is 1 on [0, 2]
    assert evaluate(c, (0,)) == 1 and evaluate(c, (1,)) == 1 and evaluate(c, (3,)) == 0


def test_nerve_coefficients_p1():
    coeff = nerve_coefficients(P1)
    assert coeff[()] == -1
    assert coeff[((1,),)] == 1


@pytest.mark.parametrize("fan", [P1, P1xP1, A1], ids=["p1", "p1xp1", "a1"])
def test_unit_lift_matches_chain_oracle(fan):
    lift = unit_chi_lift(fan)
    cones = [c.rays for c in fan.cones]
    for y in rational_grid(fan.ambient_rank, 2, 2):
        assert evaluate(lift, y) == unit_lift_value(cones, y)


def test_unit_chi_a1_not_fiber_finite():
    with pytest.raises(NotFiberFinite):
        unit_chi(A1)


@pytest.mark.parametrize("fan", [P1, P1xP1], ids=["p1", "p1xp1"])
def test_unit_chi_is_delta(fan):
    n = fan.ambient_rank
    per = standard_periods(n)
    assert confun_equal(unit_chi(fan), ConFun.delta((0,) * n, per))


def box_constraints(draw_ints, n):
    """Random bounded locally closed region: a box cut by one extra half-space."""
    lows = [Fraction(draw_ints(-4, 2), 2) for _ in range(n)]
    highs = [lo + Fraction(draw_ints(0, 4), 2) for lo in lows]
    r = LCRegion.box(lows, highs, draw_ints(0, 1) == 1, draw_ints(0, 1) == 1)
    a = tuple(draw_ints(-2, 2) for _ in range(n))
    c = Fraction(draw_ints(-3, 3), 2)
    if draw_ints(0, 1):
        return r.with_constraints(nonstrict=[(a, c)])
    return r.with_constraints(strict=[(a, c)])


@settings(max_examples=100)
@given(st.integers(0, 10**9))
def test_chi_additive_on_splits(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 2)
    region = box_constraints(rng.randint, n)
    a = tuple(rng.randint(-2, 2) for _ in range(n))
    c = Fraction(rng.randint(-3, 3), 2)
    parts = [
        region.with_constraints(strict=[(a, c)]),
        region.with_constraints(equalities=[(a, c)]),
        region.with_constraints(strict=[(tuple(-x for x in a), -c)]),
    ]
    whole = ConFun.indicator(region)
    split = ConFun(n, tuple((1, p) for p in parts))
    assert confun_equal(whole, split)
    assert chi_c(region) == sum(chi_c(p) for p in parts)
