import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fans import random_fan, random_morphism
from torstk.cones import cone_from_rays, fan_morphism, fan_validate, is_proper, stellar_subdivision
from torstk.io import load_fixture
from torstk.lattice import LatticeMap
from torstk.skeleton import (
    CovectorPoint,
    PrerequisiteFailed,
    adj_hypothesis_check,
    decide_left_functorial,
    decide_right_functorial,
    fltz_skeleton,
    full_cotangent,
    pushforward_skeleton,
    skeleton_member,
    skeleton_subset,
    subset_witness,
)

A1 = fan_validate([[(1,)]], 1)
P1 = fan_validate([[(1,)], [(-1,)]], 1)
PT = fan_validate([], 0)
A2 = fan_validate([[(1, 0), (0, 1)]], 2)
BLOWUP = fan_validate([[(1, 0), (1, 1)], [(1, 1), (0, 1)]], 2)
h = Fraction(1, 2)


def pt(x, xi):
    return CovectorPoint(tuple(Fraction(t) for t in x), tuple(Fraction(t) for t in xi))


@pytest.mark.parametrize(
    "x, xi, expected",
    [
        ((0,), (0,), True),
        ((h,), (0,), True),
        ((0,), (-1,), True),
        ((0,), (1,), True),
        ((h,), (1,), False),
        ((3,), (-2,), True),
    ],
)
def test_p1_membership(x, xi, expected):
    assert skeleton_member(fltz_skeleton(P1), pt(x, xi)) == expected


def test_a1_misses_positive_covectors():
    assert not skeleton_member(fltz_skeleton(A1), pt((0,), (1,)))


def test_a2_in_blowup():
    assert skeleton_subset(fltz_skeleton(A2), fltz_skeleton(BLOWUP))


def test_blowup_not_in_a2_with_witness():
    w = subset_witness(fltz_skeleton(BLOWUP), fltz_skeleton(A2))
    assert w is not None
    assert skeleton_member(fltz_skeleton(BLOWUP), w)
    assert not skeleton_member(fltz_skeleton(A2), w)


def test_left_functorial_examples():
    v = decide_left_functorial(fan_morphism(LatticeMap.zero(1, 0), A1, PT))
    assert not v.verdict
    assert v.witness.covector == (-1,)
    assert decide_left_functorial(fan_morphism(LatticeMap.zero(1, 0), P1, PT)).verdict


def test_right_functorial_fails_condition_two_for_doubling():
    v = decide_right_functorial(fan_morphism(LatticeMap.from_rows([[2]]), A1, A1))
    assert (v.verdict, v.failing_condition) == (False, 2)
    assert v.failing_cone.rays == ((1,),)


def test_right_functorial_fails_condition_one():
    v = decide_right_functorial(fan_morphism(LatticeMap.identity(2), BLOWUP, A2))
    assert (v.verdict, v.failing_condition) == (False, 1)


def test_right_functorial_doubled_line():
    assert decide_right_functorial(load_fixture("doubled-line-to-a1").value).verdict


def test_pushforward_over_stacky_source():
    phi = load_fixture("a2-mod-z2-morphism").value
    sk = pushforward_skeleton(phi, fltz_skeleton(phi.target))
    assert len(sk.pieces) == 4
    assert sk.base is not None


def test_adjoint_hypothesis():
    phi = fan_morphism(LatticeMap.zero(1, 0), A1, PT)
    assert adj_hypothesis_check(phi, full_cotangent(1), full_cotangent(0))
    assert not adj_hypothesis_check(phi, fltz_skeleton(A1), fltz_skeleton(PT))
    with pytest.raises(PrerequisiteFailed):
        adj_hypothesis_check(phi, fltz_skeleton(fan_validate([], 1)), fltz_skeleton(PT))


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        skeleton_member(fltz_skeleton(P1), pt((0, 0), (0, 0)))


@settings(max_examples=40)
@given(st.integers(0, 10**6))
def test_refinement_contains_coarse_skeleton(seed):
    rng = random.Random(seed)
    fan = random_fan(rng, 2)
    cones = [c for c in fan.cones if c.dim == 2]
    if not cones:
        return
    c = rng.choice(cones)
    v = tuple(sum(x) for x in zip(*c.rays))
    fine = stellar_subdivision(fan, cone_from_rays(2, [v]).rays[0])
    assert skeleton_subset(fltz_skeleton(fan), fltz_skeleton(fine))


@settings(max_examples=40)
@given(st.integers(0, 10**6))
def test_subfan_skeleton_is_smaller(seed):
    rng = random.Random(seed)
    fan = random_fan(rng, 2)
    keep = [c for c in fan.maximal_cones() if rng.random() < 0.6]
    sub = fan_validate(keep, 2)
    assert skeleton_subset(fltz_skeleton(sub), fltz_skeleton(fan))


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_properness_matches_inclusion(seed):
    fm = random_morphism(random.Random(seed))
    pushed = pushforward_skeleton(fm, fltz_skeleton(fm.target))
    assert is_proper(fm) == skeleton_subset(pushed, fltz_skeleton(fm.source))
