"""Integer-valued constructible functions and Euler calculus on ``M_R`` and
its quotients ``M_R / Lambda``.

A ``ConFun`` is a finite sum ``sum c_i 1_{R_i}`` of indicators of locally
closed convex polyhedra.  With ``periods`` set it stands for the sum over all
translates by the lattice ``Lambda`` spanned by the periods, i.e. a function
on ``M_R / Lambda``.

Euler integration uses ``chi_c(relatively open d-cell) = (-1)^d``.  With it
``1_A * 1_B = (-1)^(dA + dB - d(A+B)) 1_{A+B}`` for relatively open cells, and
pushing a relatively open cell ``C`` forward along a linear map gives
``(-1)^(dim C - dim f(C)) 1_{f(C)}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import ceil, floor
from typing import Iterable, Sequence

from .cones import Fan
from .lattice import LatticeMap, nullspace, rank_of
from .polyhedra import LCRegion, arrangement_cells
from .stacky import StackyFan, beta_kernel


class NotFiberFinite(ValueError):
    pass


class UnsupportedPeriodic(NotImplementedError):
    pass


Vec = tuple


def _fvec(v) -> tuple[Fraction, ...]:
    return tuple(Fraction(x) for x in v)


def _inverse(rows: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(rows)
    a = [list(map(Fraction, r)) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for col in range(n):
        piv = next(i for i in range(col, n) if a[i][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for i in range(n):
            if i != col and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    return [r[n:] for r in a]


@dataclass(frozen=True)
class Periods:
    """A lattice ``Lambda`` in ``Q^n`` with a basis completed to one of ``Q^n``.

    ``coords(x)`` gives the coordinates of ``x`` in the completed basis; the
    first ``rank`` of them are the deck coordinates.  The fundamental domain
    is ``0 <= coords_j < 1`` for the deck coordinates, lexicographic in the
    sense that each boundary is kept on its lower side.
    """

    n: int
    basis: tuple[tuple[Fraction, ...], ...]
    completed_inverse: tuple[tuple[Fraction, ...], ...] = field(compare=False)

    @classmethod
    def of(cls, n: int, basis: Iterable[Sequence]) -> Periods:
        basis = [_fvec(b) for b in basis]
        if basis and rank_of(basis, n) != len(basis):
            raise ValueError("period vectors are linearly dependent")
        full = list(basis)
        for i in range(n):
            e = tuple(Fraction(int(i == j)) for j in range(n))
            if rank_of(full + [e], n) > len(full):
                full.append(e)
        # columns of the completed basis matrix are the vectors in ``full``
        cols = [[full[j][i] for j in range(n)] for i in range(n)]
        inv = _inverse(cols) if n else []
        return cls(n, tuple(basis), tuple(tuple(r) for r in inv))

    @property
    def rank(self) -> int:
        return len(self.basis)

    def deck_forms(self) -> list[tuple[Fraction, ...]]:
        return [self.completed_inverse[j] for j in range(self.rank)]

    def coords(self, x) -> list[Fraction]:
        return [sum(a * Fraction(b) for a, b in zip(row, x)) for row in self.completed_inverse]

    def vector(self, k: Sequence[int]) -> tuple[Fraction, ...]:
        return tuple(sum(Fraction(c) * b[i] for c, b in zip(k, self.basis)) for i in range(self.n))

    def domain(self) -> LCRegion:
        ns, st = [], []
        for w in self.deck_forms():
            ns.append((w, 0))
            st.append((tuple(-x for x in w), -1))
        return LCRegion(self.n, tuple(ns), tuple(st))

    def reduce(self, x) -> tuple[Fraction, ...]:
        u = self.coords(x)
        k = [floor(u[j]) for j in range(self.rank)]
        shift = self.vector(k)
        return tuple(Fraction(a) - b for a, b in zip(x, shift))

    def contains_vector(self, v) -> bool:
        u = self.coords(v)
        return all(x == 0 for x in u[self.rank :]) and all(x.denominator == 1 for x in u[: self.rank])

    def same_lattice(self, other: Periods) -> bool:
        return (
            self.n == other.n
            and self.rank == other.rank
            and all(other.contains_vector(b) for b in self.basis)
            and all(self.contains_vector(b) for b in other.basis)
        )

    def span_region(self) -> LCRegion:
        """The real span of the periods, as a homogeneous region."""
        ann = nullspace(list(self.basis), self.n) if self.basis else [
            tuple(int(i == j) for j in range(self.n)) for i in range(self.n)
        ]
        return LCRegion(self.n, equalities=tuple((w, 0) for w in ann))


def standard_periods(n: int) -> Periods:
    return Periods.of(n, [tuple(int(i == j) for j in range(n)) for i in range(n)])


@dataclass(frozen=True)
class ConFun:
    rank: int
    terms: tuple[tuple[int, LCRegion], ...] = ()
    periods: Periods | None = None

    def __post_init__(self):
        terms = tuple((int(c), r) for c, r in self.terms if c)
        if any(r.ambient_rank != self.rank for _, r in terms):
            raise ValueError("term lives in the wrong ambient space")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def indicator(cls, region: LCRegion, coeff: int = 1, periods: Periods | None = None) -> ConFun:
        return cls(region.ambient_rank, ((coeff, region),), periods)

    @classmethod
    def delta(cls, point: Sequence, periods: Periods | None = None) -> ConFun:
        return cls.indicator(LCRegion.point(point), 1, periods)

    @classmethod
    def zero(cls, n: int, periods: Periods | None = None) -> ConFun:
        return cls(n, (), periods)

    def _check(self, other: ConFun):
        if self.rank != other.rank:
            raise ValueError("constructible functions on different spaces")
        if (self.periods is None) != (other.periods is None) or (
            self.periods is not None and not self.periods.same_lattice(other.periods)
        ):
            raise ValueError("constructible functions with different periodicity")

    def __add__(self, other: ConFun) -> ConFun:
        self._check(other)
        return ConFun(self.rank, self.terms + other.terms, self.periods)

    def __neg__(self) -> ConFun:
        return self.scale(-1)

    def __sub__(self, other: ConFun) -> ConFun:
        return self + (-other)

    def scale(self, k: int) -> ConFun:
        return ConFun(self.rank, tuple((k * c, r) for c, r in self.terms), self.periods)

    def hyperplanes(self) -> list:
        return [h for _, r in self.terms for h in r.hyperplanes()]

    def value_at(self, x: Sequence) -> int:
        """Value of the listed terms, ignoring periodicity."""
        return sum(c for c, r in self.terms if r.contains(x))


def _fold(f: ConFun) -> ConFun:
    """A non-periodic lift of ``f`` supported in the fundamental domain."""
    per = f.periods
    dom = per.domain()
    forms = per.deck_forms()
    terms = []
    for c, r in f.terms:
        if r.is_empty():
            continue
        ranges = []
        for w in forms:
            lo, hi = r.functional_bounds(w)
            if lo is None or hi is None:
                if r.recession().intersect(per.span_region()).is_cone_nonzero():
                    raise NotFiberFinite("support recedes along a deck direction")
                raise UnsupportedPeriodic("support is unbounded along a deck coordinate")
            ranges.append(range(floor(-hi), ceil(1 - lo) + 1))
        for k in product(*ranges):
            piece = r.translate(per.vector(k)).intersect(dom)
            if not piece.is_empty():
                terms.append((c, piece))
    return ConFun(f.rank, tuple(terms), None)


def canonical(f: ConFun) -> ConFun:
    """Relatively open cells carrying the nonzero values of ``f``.

    Periodic functions are folded into the fundamental domain first; the
    result keeps the periods.
    """
    if f.periods is not None:
        g = _fold(f)
        base = f.periods.domain()
    else:
        g = f
        base = LCRegion.whole(f.rank)
    terms = []
    for cell in arrangement_cells(base, g.hyperplanes() + base.hyperplanes()):
        v = g.value_at(cell.point)
        if v:
            terms.append((v, cell.region))
    return ConFun(f.rank, tuple(terms), f.periods)


def evaluate(f: ConFun, x: Sequence) -> int:
    if f.periods is None:
        return f.value_at(x)
    return _fold(f).value_at(f.periods.reduce(x))


def confun_equal(f: ConFun, g: ConFun) -> bool:
    f._check(g)
    return not canonical(f - g).terms


# ---------------------------------------------------------------------------
# sheaf symbols

@dataclass(frozen=True)
class SheafSymbol:
    """``k_Z[shift]`` (kind ``"standard"``) or ``omega_U[shift]`` (kind ``"costandard"``)."""

    kind: str
    region: LCRegion
    shift: int = 0

    def __post_init__(self):
        if self.kind not in ("standard", "costandard"):
            raise ValueError("kind must be 'standard' or 'costandard'")


def _closure(r: LCRegion) -> LCRegion:
    return LCRegion(r.ambient_rank, r.nonstrict + r.strict, (), r.equalities)


def dual(f: ConFun) -> ConFun:
    """Verdier duality on constructible functions: ``1_C -> (-1)^dim C 1_{closure C}``
    on relatively open cells."""
    if f.periods is not None:
        raise UnsupportedPeriodic("duality is computed on M_R only")
    terms = []
    for c, r in f.terms:
        for cell in r.relatively_open_cells():
            terms.append(((-1) ** cell.dimension() * c, _closure(cell)))
    return ConFun(f.rank, tuple(terms))


def region_chi(s: SheafSymbol) -> ConFun:
    """``chi(k_Z[s]) = (-1)^s 1_Z`` and ``chi(omega_U) = D(1_U)``.

    For ``U`` relatively open of dimension ``d`` the latter is ``(-1)^d 1_U``.
    """
    sign = (-1) ** s.shift
    base = ConFun.indicator(s.region)
    if s.kind == "costandard":
        d = s.region.dimension()
        if d >= 0 and not s.region.nonstrict:
            base = base.scale((-1) ** d)
        else:
            base = dual(base)
    return base.scale(sign)


def confun_combine(op: str, *args) -> ConFun:
    """``cofib[A -> B] = B - A``, ``fib[A -> B] = A - B``, ``shift(F, s) = (-1)^s F``."""
    if op == "cofib":
        a, b = args
        return b - a
    if op == "fib":
        a, b = args
        return a - b
    if op == "shift":
        f, s = args
        return f.scale((-1) ** s)
    if op == "sum":
        out = args[0]
        for g in args[1:]:
            out = out + g
        return out
    raise ValueError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# pushforward and convolution

@dataclass(frozen=True)
class Covering:
    """The projection ``M_R -> M_R / Lambda``."""

    periods: Periods


def _kernel_region(matrix: Sequence[Sequence], n: int) -> LCRegion:
    return LCRegion(n, equalities=tuple((tuple(row), 0) for row in matrix))


def _push_cells(cells, n: int, matrix: Sequence[Sequence], target_rank: int, offset=None) -> ConFun:
    """Push ``sum c 1_cell`` forward, each cell being relatively open."""
    ker = _kernel_region(matrix, n) if target_rank else LCRegion.whole(n)
    terms = []
    for c, cell in cells:
        if cell.recession().intersect(ker).is_cone_nonzero():
            raise NotFiberFinite("support meets a fiber in a non-compact set")
        img = cell.image(matrix) if target_rank else LCRegion(0)
        if offset is not None:
            img = img.translate(offset)
        terms.append(((-1) ** (cell.dimension() - img.dimension()) * c, img))
    return ConFun(target_rank, tuple(terms))


def confun_pushforward(f: ConFun, target, offset: Sequence | None = None) -> ConFun:
    """Euler pushforward along an affine lattice map or a covering projection."""
    if isinstance(target, Covering):
        per = target.periods
        if per.n != f.rank:
            raise ValueError("covering of the wrong space")
        if f.periods is not None:
            if not all(per.contains_vector(b) for b in f.periods.basis):
                raise ValueError("periods of f do not lie in the covering lattice")
            f = _fold(f)
        span = per.span_region()

        def recedes(terms):
            return any(r.recession().intersect(span).is_cone_nonzero() for _, r in terms)

        # terms may cancel, so only trust a failure after canonicalizing
        if recedes(f.terms) and recedes(canonical(f).terms):
            raise NotFiberFinite("infinitely many translates of the support meet a fiber")
        return ConFun(f.rank, f.terms, per)
    if not isinstance(target, LatticeMap):
        raise TypeError("target must be a LatticeMap or a Covering")
    if f.periods is not None:
        raise UnsupportedPeriodic("linear pushforward of a periodic function")
    if target.source_rank != f.rank:
        raise ValueError("map does not start at the support space")
    # pushforward is linear, so each term may be split into its own open cells
    cells = [(c, cell) for c, r in f.terms for cell in r.relatively_open_cells()]
    return _push_cells(cells, f.rank, target.matrix, target.target_rank, offset)


def _convolve_plain(f: ConFun, g: ConFun) -> ConFun:
    n = f.rank
    add = [[int(i == j) for j in range(n)] + [int(i == j) for j in range(n)] for i in range(n)]
    fc, gc = canonical(f).terms, canonical(g).terms
    cells, direct = [], []
    for a, A in fc:
        pa = A.sample() if A.dimension() == 0 else None
        for b, B in gc:
            if pa is not None:
                direct.append((a * b, B.translate(pa)))
            elif B.dimension() == 0:
                direct.append((a * b, A.translate(B.sample())))
            else:
                cells.append((a * b, A.product(B)))
    out = _push_cells(cells, 2 * n, add, n)
    return ConFun(n, out.terms + tuple(direct))


def confun_convolve(f: ConFun, g: ConFun) -> ConFun:
    """``m_!(f (x) g)`` for the addition map of ``M_R`` or of ``M_R / Lambda``."""
    f._check(g)
    if f.periods is None:
        return _convolve_plain(f, g)
    lifted = _convolve_plain(_fold(f), _fold(g))
    return confun_pushforward(lifted, Covering(f.periods))


# ---------------------------------------------------------------------------
# the unit object at the level of Euler characteristics

def cone_unit_chi(c) -> ConFun:
    """``chi(omega_{Int sigma^vee})`` for a cone ``sigma``."""
    n = c.ambient_rank
    region = LCRegion(n, strict=tuple((r, 0) for r in c.rays))
    return region_chi(SheafSymbol("costandard", region))


def nerve_coefficients(fan: Fan) -> dict:
    """``sum over chains sigma_0 > ... > sigma_k = sigma of (-1)^k``, per cone."""
    cones = sorted(fan.cones, key=lambda c: -c.dim)
    coeff = {}
    for c in cones:
        above = [t for t in cones if t.dim > c.dim and t.contains_cone(c)]
        coeff[c.rays] = 1 - sum(coeff[t.rays] for t in above)
    return coeff


def unit_chi_lift(fan: Fan) -> ConFun:
    """The alternating nerve sum on ``M_R``, before pushing to the torus."""
    coeff = nerve_coefficients(fan)
    out = ConFun.zero(fan.ambient_rank)
    for c in fan.cones:
        out = out + cone_unit_chi(c).scale(coeff[c.rays])
    return canonical(out)


def unit_chi(X) -> ConFun:
    """``chi`` of the unit object on the identity component of the (stacky) torus."""
    if isinstance(X, StackyFan):
        fan = X.fan
        per = Periods.of(fan.ambient_rank, beta_kernel(X))
    else:
        fan = X
        per = standard_periods(fan.ambient_rank)
    return confun_pushforward(unit_chi_lift(fan), Covering(per))
