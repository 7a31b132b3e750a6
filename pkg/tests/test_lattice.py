from hypothesis import given, strategies as st

from oracles import det, invariant_factors as oracle_factors, matmul
from torstk.lattice import (
    FinAbGroup,
    LatticeMap,
    cokernel_group,
    complete_basis,
    is_saturated,
    kernel_basis,
    saturate,
    saturation_index,
    smith_normal_form,
)

small = st.integers(-6, 6)


def matrices(max_rows=3, max_cols=3):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


def test_snf_known_matrix():
    s = smith_normal_form(LatticeMap.from_rows([[2, 4], [6, 8]]))
    assert s.invariants == (2, 4)
    assert s.rank == 2


def test_cokernel_is_cyclic_of_order_six():
    g, _ = cokernel_group(LatticeMap.from_rows([[2, 0], [0, 3]]))
    assert g.order == 6
    assert g.invariant_factors == (6,)
    assert g.free_rank == 0


def test_cokernel_free_part():
    g, proj = cokernel_group(LatticeMap.from_rows([[1], [1]]))
    assert g.free_rank == 1 and g.invariant_factors == ()
    assert proj.free_part((1, 1)) == (0,)
    assert proj.free_part((1, -1)) != (0,)


def test_kernel_basis_of_row():
    ker = kernel_basis(LatticeMap.from_rows([[1, 2, 3]]))
    assert len(ker) == 2
    for v in ker:
        assert v[0] + 2 * v[1] + 3 * v[2] == 0


def test_saturation():
    assert saturate([[2, 4]], 2) == ((1, 2),)
    assert not is_saturated([[2, 0], [0, 1]], 2)
    assert saturation_index([[2, 0], [0, 1]], 2) == 2
    assert is_saturated([[1, 1], [0, 1]], 2)


def test_finabgroup_reduce():
    g = FinAbGroup(1, (2,))
    assert g.ngens == 2
    assert g.order is None
    assert FinAbGroup(0, ()).order == 1


@given(matrices())
def test_snf_matches_determinantal_divisors(rows):
    s = smith_normal_form(LatticeMap.from_rows(rows, len(rows[0])))
    assert [d for d in s.invariants if d] == oracle_factors(rows)


@given(matrices())
def test_snf_transforms_are_unimodular(rows):
    f = LatticeMap.from_rows(rows, len(rows[0]))
    s = smith_normal_form(f)
    left, right = s.left_unimodular.matrix, s.right_unimodular.matrix
    assert abs(det([list(r) for r in left])) == 1
    assert abs(det([list(r) for r in right])) == 1
    d = matmul(matmul(left, rows), right)
    assert [list(r) for r in d] == [list(r) for r in s.diagonal.matrix]
    # invariants divide each other
    inv = [d for d in s.invariants if d]
    assert all(inv[i + 1] % inv[i] == 0 for i in range(len(inv) - 1))


@given(matrices())
def test_cokernel_order_matches_determinant(rows):
    n = len(rows)
    f = LatticeMap.from_rows(rows, len(rows[0]))
    g, _ = cokernel_group(f)
    if len(rows[0]) == n:
        d = det(rows)
        if d:
            assert g.order == abs(d)
        else:
            assert g.order is None


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=1, max_size=2))
def test_saturate_idempotent(gens):
    s = saturate(gens, 3)
    again = saturate(s, 3)
    assert len(again) == len(s)
    # same lattice: each basis lies in the integer span of the other
    assert saturation_index(list(s) + list(again), 3) == 1
    if s:
        assert is_saturated(s, 3)
        assert len(saturate(list(s) + list(again), 3)) == len(s)


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=1, max_size=3))
def test_kernel_vectors_are_killed(rows):
    f = LatticeMap.from_rows(rows, 3)
    for v in kernel_basis(f):
        assert all(x == 0 for x in f(v))


def test_complete_basis_is_unimodular():
    b, b_inv = complete_basis([[1, 2, 3]], 3)
    assert abs(det([list(r) for r in b.matrix])) == 1
    assert (b_inv @ b).matrix == LatticeMap.identity(3).matrix
