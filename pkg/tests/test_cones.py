from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, strategies as st

from oracles import in_cone_2d, rational_grid
from torstk.cones import (
    NotAFanMorphism,
    NotStronglyConvex,
    OverlappingCones,
    complete_fan,
    cone_from_rays,
    dual_cone,
    fan_morphism,
    fan_relate,
    fan_validate,
    is_complete,
    is_proper,
    properness_witness,
    smooth_refine,
    star_quotient,
    stellar_subdivision,
)
from torstk.lattice import LatticeMap

A2 = fan_validate([[(1, 0), (0, 1)]], 2)
BLOWUP = fan_validate([[(1, 0), (1, 1)], [(1, 1), (0, 1)]], 2)
P1 = fan_validate([[(1,)], [(-1,)]], 1)

vec2 = st.tuples(st.integers(-4, 4), st.integers(-4, 4)).filter(any)


def test_cone_normalizes_rays():
    c = cone_from_rays(2, [(2, 0), (0, 3), (1, 1)])
    assert c.rays == ((0, 1), (1, 0))
    assert c.dim == 2
    assert c.facet_normals == ((0, 1), (1, 0))


def test_not_strongly_convex():
    with pytest.raises(NotStronglyConvex):
        cone_from_rays(1, [(1,), (-1,)])


def test_multiplicity():
    c = cone_from_rays(2, [(1, 0), (1, 2)])
    assert c.multiplicity() == 2
    assert not c.is_smooth()
    assert cone_from_rays(2, [(1, 0), (1, 1)]).is_smooth()


def test_faces_of_quadrant():
    c = A2.cone([(1, 0), (0, 1)])
    assert [f.rays for f in c.faces()] == [(), ((0, 1),), ((1, 0),), ((0, 1), (1, 0))]


def test_dual_of_ray_is_half_space():
    d = dual_cone(cone_from_rays(2, [(1, 0)]))
    assert d.contains((0, 5)) and not d.contains((-1, 0))


def test_overlapping_cones_rejected():
    with pytest.raises(OverlappingCones):
        fan_validate([[(1, 0), (0, 1)], [(1, 0), (1, 1)]], 2)


def test_fan_relations():
    assert fan_relate(BLOWUP, A2).kind == "refinement" and fan_relate(BLOWUP, A2).forward
    assert fan_relate(A2, BLOWUP).kind == "refinement" and not fan_relate(A2, BLOWUP).forward
    sub = fan_validate([[(1, 0)]], 2)
    assert fan_relate(sub, A2).kind == "subfan"
    assert fan_relate(A2, A2).kind == "equal"
    assert fan_relate(P1, A2).kind == "unrelated"


def test_fan_morphism_rejects_bad_map():
    with pytest.raises(NotAFanMorphism):
        fan_morphism(LatticeMap.from_rows([[-1]]), fan_validate([[(1,)]], 1), fan_validate([[(1,)]], 1))


def test_properness_examples():
    to_pt = LatticeMap.zero(1, 0)
    pt = fan_validate([], 0)
    assert not is_proper(fan_morphism(to_pt, fan_validate([[(1,)]], 1), pt))
    assert properness_witness(fan_morphism(to_pt, fan_validate([[(1,)]], 1), pt))[0] < 0
    assert is_proper(fan_morphism(to_pt, P1, pt))
    assert is_proper(fan_morphism(LatticeMap.identity(2), BLOWUP, A2))


def test_stellar_subdivision_of_quadrant():
    f = stellar_subdivision(A2, (1, 1))
    assert f.same_cones(BLOWUP)


def test_smooth_refine_a2_quotient():
    f = fan_validate([[(1, 0), (1, 2)]], 2)
    r = smooth_refine(f)
    assert r.is_smooth()
    assert fan_relate(r, f).kind == "refinement"
    assert (1, 1) in r.rays()


def test_smooth_refine_leaves_smooth_fans():
    assert smooth_refine(BLOWUP).same_cones(BLOWUP)


def test_complete_rank2():
    f, refined = complete_fan(A2)
    assert not refined
    assert is_complete(f)
    assert all(c in f for c in A2.cones)


def test_complete_rank3_refines():
    f3 = fan_validate([[(1, 0, 0), (0, 1, 0), (1, 1, 1)]], 3)
    f, refined = complete_fan(f3)
    assert is_complete(f)
    assert refined or all(c in f for c in f3.cones)


def test_star_quotient_of_p2_ray():
    p2 = fan_validate([[(1, 0), (0, 1)], [(0, 1), (-1, -1)], [(-1, -1), (1, 0)]], 2)
    sq = star_quotient(p2, p2.cone([(1, 0)]))
    assert len(sq.star) == 3
    assert sq.quotient_fan.ambient_rank == 1
    assert len(sq.quotient_fan.maximal_cones()) == 2
    assert is_complete(sq.quotient_fan)


@given(st.lists(vec2, min_size=1, max_size=2))
def test_membership_matches_oracle(rays):
    try:
        c = cone_from_rays(2, rays)
    except NotStronglyConvex:
        return
    raw = [tuple(r) for r in c.rays]
    for x in rational_grid(2, 2, 2):
        assert c.contains(x) == in_cone_2d(raw, x)


@given(st.lists(vec2, min_size=2, max_size=3))
def test_dual_cone_involution(rays):
    try:
        c = cone_from_rays(2, rays)
    except NotStronglyConvex:
        return
    if c.dim < 2:
        return
    dd = dual_cone(dual_cone(c))
    assert dd.rays == c.rays
    # pairing is nonnegative between a cone and its dual
    d = dual_cone(c)
    assert all(sum(a * b for a, b in zip(m, r)) >= 0 for m in d.rays for r in c.rays)


@given(st.lists(vec2, min_size=2, max_size=4))
def test_facets_match_brute_force(rays):
    try:
        c = cone_from_rays(2, rays)
    except NotStronglyConvex:
        return
    if c.dim < 2:
        return
    # brute force: primitive normals m with <m,r> >= 0 on all rays and zero on one
    found = set()
    for m in [(a, b) for a in range(-4, 5) for b in range(-4, 5) if (a, b) != (0, 0)]:
        if gcd(*m) != 1:
            continue
        vals = [m[0] * r[0] + m[1] * r[1] for r in c.rays]
        if all(v >= 0 for v in vals) and any(v == 0 for v in vals):
            found.add(m)
    assert set(c.facet_normals) == found


def grid_proper(f, src, tgt):
    """Grid oracle: no rational point maps into the target support outside the source."""
    for x in rational_grid(f.source_rank, 3, 2):
        y = f(x)
        if tgt.contains_point(y) and not src.contains_point(x):
            return False
    return True


@pytest.mark.parametrize(
    "rows, src, tgt",
    [
        ([[1, 0], [0, 1]], BLOWUP, A2),
        ([[1, 0], [0, 1]], A2, BLOWUP),
        ([[1, 1]], A2, fan_validate([[(1,)]], 1)),
        ([[1, 0]], BLOWUP, fan_validate([[(1,)]], 1)),
    ],
)
def test_properness_matches_grid_oracle(rows, src, tgt):
    f = LatticeMap.from_rows(rows, 2)
    try:
        fm = fan_morphism(f, src, tgt)
    except NotAFanMorphism:
        return
    assert is_proper(fm) == grid_proper(f, src, tgt)


def test_grid_oracle_sees_fractional_points():
    assert in_cone_2d([(1, 0), (0, 1)], (Fraction(1, 2), 0))
