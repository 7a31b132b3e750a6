"""Exact integer linear algebra for lattices and finitely generated abelian groups.

Matrices act on column vectors: a map ``Z^n -> Z^m`` is stored as ``m`` rows of
``n`` integers.  Everything here is pure Python integer / ``Fraction``
arithmetic, so there is no overflow and no rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

Vector = tuple  # tuple[int, ...] or tuple[Fraction, ...]


def _as_rows(matrix: Iterable[Iterable[int]]) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(x) for x in row) for row in matrix)


@dataclass(frozen=True)
class LatticeMap:
    """A homomorphism ``Z^source_rank -> Z^target_rank``."""

    source_rank: int
    target_rank: int
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.source_rank < 0 or self.target_rank < 0:
            raise ValueError("ranks must be nonnegative")
        rows = _as_rows(self.matrix)
        if len(rows) != self.target_rank or any(len(r) != self.source_rank for r in rows):
            raise ValueError(
                f"matrix shape does not match ranks {self.target_rank}x{self.source_rank}"
            )
        object.__setattr__(self, "matrix", rows)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], source_rank: int | None = None) -> LatticeMap:
        rows = _as_rows(rows)
        if source_rank is None:
            if not rows:
                raise ValueError("source_rank required for a map into the zero lattice")
            source_rank = len(rows[0])
        return cls(source_rank, len(rows), rows)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], target_rank: int) -> LatticeMap:
        cols = _as_rows(columns)
        rows = tuple(tuple(c[i] for c in cols) for i in range(target_rank))
        return cls(len(cols), target_rank, rows)

    @classmethod
    def identity(cls, n: int) -> LatticeMap:
        return cls(n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def zero(cls, source_rank: int, target_rank: int) -> LatticeMap:
        return cls(source_rank, target_rank, tuple((0,) * source_rank for _ in range(target_rank)))

    @property
    def columns(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(r[j] for r in self.matrix) for j in range(self.source_rank))

    def __call__(self, v: Sequence) -> tuple:
        if len(v) != self.source_rank:
            raise ValueError("vector length does not match source rank")
        return tuple(sum((a * x for a, x in zip(row, v)), 0) for row in self.matrix)

    def __matmul__(self, other: LatticeMap) -> LatticeMap:
        """Composition ``self o other``."""
        if other.target_rank != self.source_rank:
            raise ValueError("ranks do not agree for composition")
        return LatticeMap(other.source_rank, self.target_rank, matmul(self.matrix, other.matrix, other.source_rank))

    def transpose(self) -> LatticeMap:
        return LatticeMap(self.target_rank, self.source_rank, self.columns)

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.matrix for x in row)


def matmul(a, b, ncols_b: int | None = None) -> tuple[tuple, ...]:
    if ncols_b is None:
        ncols_b = len(b[0]) if b else 0
    return tuple(
        tuple(sum((row[k] * b[k][j] for k in range(len(row))), 0) for j in range(ncols_b))
        for row in a
    )


def dual_map(f: LatticeMap) -> LatticeMap:
    """The induced map on ``Hom(-, Z)``; in coordinates, the transpose."""
    return f.transpose()


@dataclass(frozen=True)
class FinAbGroup:
    """``Z^free_rank (+) Z/d_1 (+) ... (+) Z/d_k`` with ``d_i | d_{i+1}`` and ``d_i >= 2``.

    Elements are coordinate vectors: free coordinates first, then torsion
    coordinates reduced into ``range(d_i)``.
    """

    free_rank: int = 0
    invariant_factors: tuple[int, ...] = ()

    def __post_init__(self):
        factors = tuple(int(d) for d in self.invariant_factors)
        if self.free_rank < 0:
            raise ValueError("free rank must be nonnegative")
        if any(d < 2 for d in factors):
            raise ValueError("invariant factors must be at least 2")
        if any(b % a for a, b in zip(factors, factors[1:])):
            raise ValueError("invariant factors must form a divisibility chain")
        object.__setattr__(self, "invariant_factors", factors)

    @property
    def ngens(self) -> int:
        return self.free_rank + len(self.invariant_factors)

    @property
    def order(self) -> int | None:
        """Cardinality, or None when infinite."""
        if self.free_rank:
            return None
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    def is_trivial(self) -> bool:
        return self.ngens == 0

    def reduce(self, v: Sequence[int]) -> tuple[int, ...]:
        v = tuple(int(x) for x in v)
        r = self.free_rank
        return v[:r] + tuple(x % d for x, d in zip(v[r:], self.invariant_factors))

    def reduce_matrix(self, rows: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
        """Reduce the rows of a matrix with values in this group."""
        rows = _as_rows(rows)
        r = self.free_rank
        return rows[:r] + tuple(
            tuple(x % d for x in row) for row, d in zip(rows[r:], self.invariant_factors)
        )

    def relations(self) -> LatticeMap:
        """The map ``Z^k -> Z^ngens`` whose cokernel is this group."""
        k = len(self.invariant_factors)
        n = self.ngens
        rows = [[0] * k for _ in range(n)]
        for i, d in enumerate(self.invariant_factors):
            rows[self.free_rank + i][i] = d
        return LatticeMap(k, n, _as_rows(rows))

    def is_surjective(self, f: LatticeMap) -> bool:
        """Whether ``f: Z^s -> Z^ngens`` is onto this group."""
        group, _ = cokernel_group(hstack(f, self.relations()))
        return group.is_trivial()

    def __str__(self) -> str:
        parts = ["Z"] * min(self.free_rank, 1)
        if self.free_rank > 1:
            parts = [f"Z^{self.free_rank}"]
        parts += [f"Z/{d}" for d in self.invariant_factors]
        return " + ".join(parts) if parts else "0"


def hstack(*maps: LatticeMap) -> LatticeMap:
    """Block row ``[f_1 | f_2 | ...]`` out of a direct sum of sources."""
    m = maps[0].target_rank
    if any(f.target_rank != m for f in maps):
        raise ValueError("target ranks differ")
    rows = tuple(sum((f.matrix[i] for f in maps), ()) for i in range(m))
    return LatticeMap(sum(f.source_rank for f in maps), m, rows)


@dataclass(frozen=True)
class SmithDecomposition:
    """``left_unimodular . original . right_unimodular = diagonal``."""

    left_unimodular: LatticeMap
    diagonal: LatticeMap
    right_unimodular: LatticeMap
    left_inverse: LatticeMap
    right_inverse: LatticeMap

    @property
    def invariants(self) -> tuple[int, ...]:
        d = self.diagonal.matrix
        return tuple(d[i][i] for i in range(min(self.diagonal.source_rank, self.diagonal.target_rank)))

    @property
    def rank(self) -> int:
        return sum(1 for x in self.invariants if x)


def smith_normal_form(f: LatticeMap) -> SmithDecomposition:
    """Smith normal form with unimodular transforms and their inverses.

    Pivot rule: the nonzero entry of smallest absolute value in the remaining
    block, ties broken by lowest (row, column).
    """
    m, n = f.target_rank, f.source_rank
    a = [list(r) for r in f.matrix]
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    ui = [[int(i == j) for j in range(m)] for i in range(m)]
    v = [[int(i == j) for j in range(n)] for i in range(n)]
    vi = [[int(i == j) for j in range(n)] for i in range(n)]

    def row_add(dst, src, q):
        # row_dst += q * row_src
        if q == 0:
            return
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]
        for row in ui:
            row[src] -= q * row[dst]

    def row_swap(i, j):
        if i == j:
            return
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]
        for row in ui:
            row[i], row[j] = row[j], row[i]

    def col_add(dst, src, q):
        # col_dst += q * col_src
        if q == 0:
            return
        for row in a:
            row[dst] += q * row[src]
        for row in v:
            row[dst] += q * row[src]
        vi[src] = [x - q * y for x, y in zip(vi[src], vi[dst])]

    def col_swap(i, j):
        if i == j:
            return
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]
        vi[i], vi[j] = vi[j], vi[i]

    for t in range(min(m, n)):
        while True:
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    x = a[i][j]
                    if x and (best is None or abs(x) < best[0]):
                        best = (abs(x), i, j)
            if best is None:
                break
            _, i, j = best
            row_swap(t, i)
            col_swap(t, j)
            p = a[t][t]
            dirty = False
            for i in range(t + 1, m):
                row_add(i, t, -(a[i][t] // p))
                dirty = dirty or a[i][t] != 0
            for j in range(t + 1, n):
                col_add(j, t, -(a[t][j] // p))
                dirty = dirty or a[t][j] != 0
            if dirty:
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if a[i][j] % p),
                None,
            )
            if bad is None:
                break
            row_add(t, bad, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
            for row in ui:
                row[t] = -row[t]
        if a[t][t] == 0:
            break

    return SmithDecomposition(
        LatticeMap(m, m, _as_rows(u)),
        LatticeMap(n, m, _as_rows(a)),
        LatticeMap(n, n, _as_rows(v)),
        LatticeMap(m, m, _as_rows(ui)),
        LatticeMap(n, n, _as_rows(vi)),
    )


def invariant_factors(f: LatticeMap) -> tuple[int, ...]:
    """Nonzero diagonal entries of the Smith form."""
    return tuple(x for x in smith_normal_form(f).invariants if x)


@dataclass(frozen=True)
class CokernelProjection:
    """The quotient map ``Z^n -> coker`` in the coordinates of ``group``.

    ``free_part`` is the induced map onto the torsion-free quotient.
    """

    group: FinAbGroup
    matrix: tuple[tuple[int, ...], ...]
    source_rank: int

    def __call__(self, v: Sequence[int]) -> tuple[int, ...]:
        return self.group.reduce(tuple(sum(a * x for a, x in zip(row, v)) for row in self.matrix))

    @property
    def free_part(self) -> LatticeMap:
        rows = self.matrix[: self.group.free_rank]
        return LatticeMap(self.source_rank, len(rows), rows)


def cokernel_group(f: LatticeMap) -> tuple[FinAbGroup, CokernelProjection]:
    """``coker(f)`` as a :class:`FinAbGroup` together with the projection onto it."""
    snf = smith_normal_form(f)
    d = snf.invariants
    m = f.target_rank
    torsion_rows, torsion = [], []
    free_rows = []
    for i in range(m):
        di = d[i] if i < len(d) else 0
        if di == 0:
            free_rows.append(snf.left_unimodular.matrix[i])
        elif di > 1:
            torsion_rows.append(snf.left_unimodular.matrix[i])
            torsion.append(di)
    group = FinAbGroup(len(free_rows), tuple(torsion))
    return group, CokernelProjection(group, tuple(free_rows) + tuple(torsion_rows), m)


def torsion_free_quotient(f: LatticeMap) -> LatticeMap:
    """The map ``Z^m -> coker(f)/torsion``."""
    return cokernel_group(f)[1].free_part


def kernel_basis(f: LatticeMap) -> tuple[tuple[int, ...], ...]:
    """A basis of ``ker f`` (always a saturated sublattice)."""
    snf = smith_normal_form(f)
    r = snf.rank
    return snf.right_unimodular.columns[r:]


def lattice_basis(generators: Sequence[Sequence[int]], rank: int) -> tuple[tuple[int, ...], ...]:
    """A basis of the subgroup of ``Z^rank`` spanned by ``generators``."""
    gens = _as_rows(generators)
    if not gens:
        return ()
    g = LatticeMap.from_columns(gens, rank)
    snf = smith_normal_form(g)
    cols = snf.left_inverse.columns
    return tuple(tuple(d * x for x in cols[i]) for i, d in enumerate(snf.invariants) if d)


def saturate(generators: Sequence[Sequence[int]], rank: int) -> tuple[tuple[int, ...], ...]:
    """A basis of ``Z^rank`` intersected with the real span of ``generators``."""
    gens = _as_rows(generators)
    if not gens:
        return ()
    snf = smith_normal_form(LatticeMap.from_columns(gens, rank))
    return snf.left_inverse.columns[: snf.rank]


def is_saturated(generators: Sequence[Sequence[int]], rank: int) -> bool:
    gens = _as_rows(generators)
    if not gens:
        return True
    return all(d in (0, 1) for d in smith_normal_form(LatticeMap.from_columns(gens, rank)).invariants)


def saturation_index(generators: Sequence[Sequence[int]], rank: int) -> int:
    """Index of the span of ``generators`` inside its saturation."""
    gens = _as_rows(generators)
    out = 1
    if gens:
        for d in invariant_factors(LatticeMap.from_columns(gens, rank)):
            out *= d
    return out


def complete_basis(basis: Sequence[Sequence[int]], rank: int) -> tuple[LatticeMap, LatticeMap]:
    """Extend a basis of a saturated sublattice to a basis of ``Z^rank``.

    Returns ``(B, B_inv)``; the first ``len(basis)`` columns of ``B`` span the
    same sublattice as ``basis``.
    """
    basis = _as_rows(basis)
    if not basis:
        ident = LatticeMap.identity(rank)
        return ident, ident
    snf = smith_normal_form(LatticeMap.from_columns(basis, rank))
    if any(d != 1 for d in snf.invariants):
        raise ValueError("sublattice is not saturated or basis is dependent")
    return snf.left_inverse, snf.left_unimodular


def determinant(rows: Sequence[Sequence]) -> Fraction | int:
    """Exact determinant by Gaussian elimination over the rationals."""
    n = len(rows)
    a = [[Fraction(x) for x in r] for r in rows]
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            return 0
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            q = a[r][c] / a[c][c]
            if q:
                a[r] = [x - q * y for x, y in zip(a[r], a[c])]
    if det.denominator == 1:
        return int(det)
    return det


# ---------------------------------------------------------------------------
# rational linear algebra

def rref(rows: Sequence[Sequence], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q; returns (nonzero rows, pivot columns)."""
    a = [[Fraction(x) for x in r] for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        pv = a[r][c]
        a[r] = [x / pv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                q = a[i][c]
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def rank_of(rows: Sequence[Sequence], ncols: int) -> int:
    if not rows:
        return 0
    return len(rref(rows, ncols)[1])


def primitive(v: Sequence) -> tuple[int, ...]:
    """Scale a nonzero rational vector to a primitive integer vector (same direction)."""
    fr = [Fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return tuple(x // g for x in ints)


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[tuple[int, ...]]:
    """Integer (primitive) vectors spanning the rational kernel of ``rows``."""
    red, pivots = rref(rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    out = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for row, pc in zip(red, pivots):
            vec[pc] = -row[fc]
        out.append(primitive(vec))
    return out


def in_span(v: Sequence, basis: Sequence[Sequence], ncols: int) -> bool:
    return rank_of(list(basis) + [list(v)], ncols) == rank_of(basis, ncols)


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), 0)
