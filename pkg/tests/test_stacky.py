import pytest

from torstk.cones import fan_morphism, fan_validate, is_complete
from torstk.io import load_fixture
from torstk.lattice import FinAbGroup, LatticeMap, saturation_index
from torstk.stacky import (
    GSPresentation,
    IncompatibleBeta,
    IncompatibleMorphism,
    NotConvertible,
    SourceNotSmoothComplete,
    abc_factorization,
    classify,
    compose,
    factor_group_change,
    gs_convert,
    identity_morphism,
    stacky_morphism,
    torus_data,
    validate_stacky,
)

A1 = fan_validate([[(1,)]], 1)
P1 = fan_validate([[(1,)], [(-1,)]], 1)


def fixture(name):
    return load_fixture(name).value


def test_beta_shape_checked():
    with pytest.raises(IncompatibleBeta):
        validate_stacky(A1, FinAbGroup(1, ()), [[1, 2]])


def test_beta_reduced_mod_torsion():
    X = fixture("a2-mod-z2")
    assert X.beta.matrix == ((1, 1),)


def test_plain_fan_is_scheme_and_variety():
    c = classify(fixture("a2"))
    assert c.is_scheme and c.is_variety


def test_doubled_line_classification():
    c = classify(fixture("doubled-line"))
    assert (c.is_scheme, c.is_variety) == (True, False)
    assert c.K_rank == 1


def test_a1_mod_z2_not_a_scheme():
    X = validate_stacky(A1, FinAbGroup(0, (2,)), [[1]])
    assert not classify(X).is_scheme


def test_zero_fan_with_finite_group():
    X = validate_stacky(fan_validate([], 1), FinAbGroup(0, (2,)), [[1]])
    c = classify(X)
    assert c.is_scheme and c.is_variety and c.K_rank == 1


def test_torus_of_a2_mod_z2():
    t = torus_data(fixture("a2-mod-z2"))
    assert t.n_components == 1
    assert t.compact_rank == 2
    assert saturation_index(t.deck_lattice, 2) == 2


def test_torus_of_doubled_line():
    t = torus_data(fixture("doubled-line"))
    assert (t.compact_rank, t.vector_rank) == (1, 1)


def test_morphism_compatibility_checked():
    X = fixture("a2-mod-z2")
    with pytest.raises(IncompatibleMorphism):
        stacky_morphism(X, fixture("a2"), [[1, 0], [0, 1]], [[]])


def test_identity_and_compose():
    phi = load_fixture("a2-mod-z2-morphism").value
    idt = identity_morphism(phi.target)
    comp = compose(idt, phi)
    assert comp.phi_N.matrix == phi.phi_N.matrix


def test_factor_group_change():
    phi = load_fixture("a2-mod-z2-morphism").value
    p1, p2 = factor_group_change(phi)
    assert p1.group_map.matrix == LatticeMap.identity(phi.source.L.ngens).matrix
    assert p2.phi_N.matrix == LatticeMap.identity(phi.target.N_rank).matrix
    assert compose(p2, p1).phi_N.matrix == phi.phi_N.matrix


def test_gs_round_trip_free():
    X = fixture("doubled-line")
    gs = gs_convert("to_gs", X)
    Y = gs_convert("from_gs", gs)
    assert classify(Y).is_scheme == classify(X).is_scheme
    assert torus_data(Y).compact_rank == torus_data(X).compact_rank


def test_gs_from_finite_cokernel():
    gs = GSPresentation(fan_validate([[(1, 0), (0, 1)]], 2), LatticeMap.from_rows([[1, 1], [0, 2]]))
    X = gs_convert("from_gs", gs)
    assert X.L.order == 2


def test_gs_rejects_infinite_cokernel():
    gs = GSPresentation(A1, LatticeMap.from_rows([[1], [0]]))
    with pytest.raises(NotConvertible):
        gs_convert("from_gs", gs)


def test_abc_on_p1_double():
    phi = fan_morphism(LatticeMap.from_rows([[2]]), P1, P1)
    abc = abc_factorization(phi)
    assert (abc.c.map @ abc.b.map @ abc.a.map).matrix == ((2,),)
    assert abc.smooth_fan.is_smooth()
    assert is_complete(abc.smooth_fan)
    assert all(g in abc.smooth_fan for g in abc.graph_cones)


def test_abc_requires_smooth_complete_source():
    with pytest.raises(SourceNotSmoothComplete):
        abc_factorization(fan_morphism(LatticeMap.from_rows([[1]]), A1, A1))
