"""Locally closed rational polyhedra and hyperplane-arrangement cells.

Feasibility, sample points and projections use Fourier-Motzkin elimination
with strict inequalities tracked exactly.  Sizes in this package are tiny
(ambient rank at most about six), so the doubly exponential worst case of
elimination never matters in practice.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Iterable, Sequence

from .lattice import dot, nullspace, primitive, rank_of

GE, GT, EQ = ">=", ">", "="

DEFAULT_MAX_CELLS = 200_000


class ArrangementTooLarge(RuntimeError):
    """Raised when a cell decomposition exceeds ``CCC_MAX_CELLS``."""


def max_cells() -> int:
    raw = os.environ.get("CCC_MAX_CELLS")
    if not raw:
        return DEFAULT_MAX_CELLS
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"CCC_MAX_CELLS must be an integer, got {raw!r}") from None


def _frac_vec(v: Iterable) -> tuple[Fraction, ...]:
    return tuple(Fraction(x) for x in v)


def _normalize(a: tuple, c, kind: str):
    """Scale a constraint to a primitive integer normal (leading entry positive
    for equalities); the constant becomes an int or Fraction.

    Returns None for trivially true constraints and raises _Infeasible for
    trivially false ones.
    """
    den = 1
    for x in a:
        d = x.denominator
        if d != 1:
            den = den * d // gcd(den, d)
    ai = [x.numerator * (den // x.denominator) for x in a]
    g = 0
    for x in ai:
        g = gcd(g, x)
    if g == 0:
        ok = {GE: 0 >= c, GT: 0 > c, EQ: c == 0}[kind]
        if not ok:
            raise _Infeasible
        return None
    if kind == EQ and next(x for x in ai if x) < 0:
        g = -g
    c = Fraction(c) * den / g
    if c.denominator == 1:
        c = c.numerator
    return tuple(x // g for x in ai), c, kind


class _Infeasible(Exception):
    pass


def _clean(cons):
    """Normalize and deduplicate, keeping the tightest copy of each inequality."""
    ineq: dict = {}
    eqs: dict = {}
    for a, c, kind in cons:
        n = _normalize(a, c, kind)
        if n is None:
            continue
        a, c, kind = n
        if kind == EQ:
            if a in eqs and eqs[a] != c:
                raise _Infeasible
            eqs[a] = c
            continue
        old = ineq.get(a)
        if old is None or c > old[0] or (c == old[0] and kind == GT):
            ineq[a] = (c, kind)
    out = [(a, c, EQ) for a, c in eqs.items()]
    out += [(a, c, k) for a, (c, k) in ineq.items()]
    return out


def _substitute(cons, eq, j):
    """Eliminate ``x_j`` from ``cons`` using the equality ``eq``, in integers."""
    a, c, _ = eq
    if a[j] < 0:
        a, c = tuple(-x for x in a), -c
    out = []
    for b, d, kind in cons:
        if (b, d, kind) == eq:
            continue
        # a_j * b - b_j * a keeps the direction of b since a_j > 0
        p, q = a[j], b[j]
        out.append((tuple(p * b[i] - q * a[i] for i in range(j)), p * d - q * c, kind))
    return out


def _solve(cons, n):
    """Return a feasible point (tuple of Fractions) or raise _Infeasible."""
    cons = _clean(cons)
    if n == 0:
        return ()
    j = n - 1
    eq = next((con for con in cons if con[2] == EQ and con[0][j] != 0), None)
    if eq is not None:
        a, c, _ = eq
        # x_j = (c - sum_{i<j} a_i x_i) / a_j
        pt = _solve(_substitute(cons, eq, j), j)
        xj = Fraction(c - sum(a[i] * pt[i] for i in range(j))) / a[j]
        return pt + (xj,)
    lower, upper, rest = [], [], []
    for a, c, kind in cons:
        if a[j] > 0:
            lower.append((a, c, kind))
        elif a[j] < 0:
            upper.append((a, c, kind))
        else:
            rest.append((a[:j], c, kind))
    for la, lc, lk in lower:
        for ua, uc, uk in upper:
            p, q = -ua[j], la[j]
            comb = tuple(p * la[i] + q * ua[i] for i in range(j))
            kind = GT if GT in (lk, uk) else GE
            rest.append((comb, p * lc + q * uc, kind))
    pt = _solve(rest, j)
    lo = hi = None
    for a, c, kind in lower:
        v = Fraction(c - sum(a[i] * pt[i] for i in range(j))) / a[j]
        if lo is None or v > lo[0] or (v == lo[0] and kind == GT):
            lo = (v, kind == GT)
    for a, c, kind in upper:
        v = Fraction(c - sum(a[i] * pt[i] for i in range(j))) / a[j]
        if hi is None or v < hi[0] or (v == hi[0] and kind == GT):
            hi = (v, kind == GT)
    if lo and hi:
        xj = lo[0] if lo[0] == hi[0] else (lo[0] + hi[0]) / 2
    elif lo:
        xj = lo[0] + (1 if lo[1] else 0)
    elif hi:
        xj = hi[0] - (1 if hi[1] else 0)
    else:
        xj = Fraction(0)
    return pt + (xj,)


def _eliminate(cons, n, k):
    """Project the system onto the first ``k`` coordinates (exact FM)."""
    cons = _clean(cons)
    for j in range(n - 1, k - 1, -1):
        eq = next((con for con in cons if con[2] == EQ and con[0][j] != 0), None)
        new = []
        if eq is not None:
            new = _substitute(cons, eq, j)
        else:
            lower = [x for x in cons if x[0][j] > 0]
            upper = [x for x in cons if x[0][j] < 0]
            new = [(a[:j], c, kind) for a, c, kind in cons if a[j] == 0]
            for la, lc, lk in lower:
                for ua, uc, uk in upper:
                    p, q = -ua[j], la[j]
                    comb = tuple(p * la[i] + q * ua[i] for i in range(j))
                    new.append((comb, p * lc + q * uc, GT if GT in (lk, uk) else GE))
        cons = _clean(new)
    return cons


@dataclass(frozen=True)
class LCRegion:
    """``{x : <a,x> >= c (nonstrict), <a,x> > c (strict), <a,x> = c (equalities)}``.

    Always convex and locally closed.  Coefficients are stored as Fractions.
    """

    ambient_rank: int
    nonstrict: tuple = ()
    strict: tuple = ()
    equalities: tuple = ()

    def __post_init__(self):
        for name in ("nonstrict", "strict", "equalities"):
            items = getattr(self, name)
            if not all(type(c) is Fraction and all(type(x) is Fraction for x in a) for a, c in items):
                items = tuple((_frac_vec(a), Fraction(c)) for a, c in items)
            else:
                items = tuple(items)
            if any(len(a) != self.ambient_rank for a, _ in items):
                raise ValueError("constraint length does not match ambient rank")
            object.__setattr__(self, name, items)

    @classmethod
    def whole(cls, n: int) -> LCRegion:
        return cls(n)

    @classmethod
    def point(cls, p: Sequence) -> LCRegion:
        n = len(p)
        eqs = tuple((tuple(int(i == j) for j in range(n)), p[i]) for i in range(n))
        return cls(n, equalities=eqs)

    @classmethod
    def box(cls, lows: Sequence, highs: Sequence, closed_low=True, closed_high=False) -> LCRegion:
        """Product of intervals; default half-open ``[lo, hi)``."""
        n = len(lows)
        ns, st = [], []
        for i in range(n):
            e = tuple(int(i == j) for j in range(n))
            ne = tuple(-x for x in e)
            (ns if closed_low else st).append((e, lows[i]))
            (ns if closed_high else st).append((ne, -Fraction(highs[i])))
        return cls(n, tuple(ns), tuple(st))

    def constraints(self) -> list:
        return (
            [(a, c, GE) for a, c in self.nonstrict]
            + [(a, c, GT) for a, c in self.strict]
            + [(a, c, EQ) for a, c in self.equalities]
        )

    def with_constraints(self, nonstrict=(), strict=(), equalities=()) -> LCRegion:
        return LCRegion(
            self.ambient_rank,
            self.nonstrict + tuple(nonstrict),
            self.strict + tuple(strict),
            self.equalities + tuple(equalities),
        )

    def intersect(self, other: LCRegion) -> LCRegion:
        if other.ambient_rank != self.ambient_rank:
            raise ValueError("ambient ranks differ")
        return self.with_constraints(other.nonstrict, other.strict, other.equalities)

    def sample(self) -> tuple[Fraction, ...] | None:
        """An exact point of the region, or None if it is empty."""
        try:
            return _solve(self.constraints(), self.ambient_rank)
        except _Infeasible:
            return None

    def is_empty(self) -> bool:
        return self.sample() is None

    def contains(self, x: Sequence) -> bool:
        x = _frac_vec(x)
        return (
            all(dot(a, x) >= c for a, c in self.nonstrict)
            and all(dot(a, x) > c for a, c in self.strict)
            and all(dot(a, x) == c for a, c in self.equalities)
        )

    def hyperplanes(self) -> list:
        return [(a, c) for a, c in self.nonstrict + self.strict + self.equalities]

    def is_subset(self, other: LCRegion) -> bool:
        """Exact containment ``self <= other`` for convex regions."""
        for a, c in other.nonstrict:
            if not self.with_constraints(strict=[(tuple(-x for x in a), -c)]).is_empty():
                return False
        for a, c in other.strict:
            if not self.with_constraints(nonstrict=[(tuple(-x for x in a), -c)]).is_empty():
                return False
        for a, c in other.equalities:
            if not self.with_constraints(strict=[(a, c)]).is_empty():
                return False
            if not self.with_constraints(strict=[(tuple(-x for x in a), -c)]).is_empty():
                return False
        return True

    def equals(self, other: LCRegion) -> bool:
        return self.is_subset(other) and other.is_subset(self)

    def implicit_equalities(self) -> list:
        """Normals of all hyperplanes the (nonempty) region lies in."""
        eqs = [a for a, _ in self.equalities]
        for a, c in self.nonstrict:
            if self.with_constraints(strict=[(a, c)]).is_empty():
                eqs.append(a)
        return eqs

    def dimension(self) -> int:
        """Dimension of the affine hull; -1 when empty."""
        if self.is_empty():
            return -1
        return self.ambient_rank - rank_of(self.implicit_equalities(), self.ambient_rank)

    def recession(self) -> LCRegion:
        """Recession cone of the closure."""
        z = Fraction(0)
        return LCRegion(
            self.ambient_rank,
            tuple((a, z) for a, _ in self.nonstrict + self.strict),
            (),
            tuple((a, z) for a, _ in self.equalities),
        )

    def is_cone_nonzero(self) -> bool:
        """For a homogeneous region (a cone): does it contain a nonzero point?"""
        n = self.ambient_rank
        for i in range(n):
            for s in (1, -1):
                e = tuple(s if j == i else 0 for j in range(n))
                if not self.with_constraints(nonstrict=[(e, 1)]).is_empty():
                    return True
        return False

    def functional_bounds(self, w: Sequence) -> tuple:
        """(inf, sup) of ``<w, x>`` over the region; None marks an unbounded side."""
        n = self.ambient_rank
        cons = self.constraints()
        # new variable t = <w,x> placed first, x after it
        lifted = [((Fraction(0),) + a, c, k) for a, c, k in cons]
        lifted.append(((Fraction(-1),) + _frac_vec(w), Fraction(0), EQ))
        try:
            proj = _eliminate(lifted, n + 1, 1)
        except _Infeasible:
            raise ValueError("empty region has no bounds") from None
        lo = hi = None
        for (a,), c, kind in proj:
            v = Fraction(c) / a
            if kind == EQ:
                return v, v
            if a > 0:
                lo = v if lo is None else max(lo, v)
            else:
                hi = v if hi is None else min(hi, v)
        return lo, hi

    def image(self, matrix: Sequence[Sequence[int]]) -> LCRegion:
        """Image under the linear map ``x -> matrix . x`` (exact projection)."""
        n = self.ambient_rank
        k = len(matrix)
        lifted = [(tuple([Fraction(0)] * k) + a, c, kind) for a, c, kind in self.constraints()]
        for i, row in enumerate(matrix):
            e = tuple(Fraction(int(i == j)) for j in range(k))
            lifted.append((e + tuple(-Fraction(x) for x in row), Fraction(0), EQ))
        try:
            proj = _eliminate(lifted, n + k, k)
        except _Infeasible:
            return LCRegion(k, strict=[(tuple([0] * k), 0)]) if k else LCRegion(0, strict=[((), 0)])
        return _from_constraints(k, proj)

    def preimage(self, matrix: Sequence[Sequence[int]], source_rank: int) -> LCRegion:
        """Preimage under ``x -> matrix . x`` with ``x`` of length ``source_rank``."""

        def pull(a):
            return tuple(sum((a[i] * matrix[i][j] for i in range(len(matrix))), Fraction(0)) for j in range(source_rank))

        return LCRegion(
            source_rank,
            tuple((pull(a), c) for a, c in self.nonstrict),
            tuple((pull(a), c) for a, c in self.strict),
            tuple((pull(a), c) for a, c in self.equalities),
        )

    def translate(self, t: Sequence) -> LCRegion:
        """The region shifted by ``t``."""
        t = _frac_vec(t)
        return LCRegion(
            self.ambient_rank,
            tuple((a, c + dot(a, t)) for a, c in self.nonstrict),
            tuple((a, c + dot(a, t)) for a, c in self.strict),
            tuple((a, c + dot(a, t)) for a, c in self.equalities),
        )

    def product(self, other: LCRegion) -> LCRegion:
        n, m = self.ambient_rank, other.ambient_rank
        z1, z2 = (Fraction(0),) * m, (Fraction(0),) * n
        return LCRegion(
            n + m,
            tuple((a + z1, c) for a, c in self.nonstrict) + tuple((z2 + a, c) for a, c in other.nonstrict),
            tuple((a + z1, c) for a, c in self.strict) + tuple((z2 + a, c) for a, c in other.strict),
            tuple((a + z1, c) for a, c in self.equalities) + tuple((z2 + a, c) for a, c in other.equalities),
        )

    def simplified(self) -> LCRegion:
        """Same set with normalized, deduplicated and non-redundant constraints."""
        try:
            cons = _clean(self.constraints())
        except _Infeasible:
            return LCRegion(self.ambient_rank, strict=[((0,) * self.ambient_rank, 0)])
        keep = list(cons)
        for con in sorted(cons, key=lambda t: (t[2] == EQ, t)):
            if con[2] == EQ:
                continue
            rest = [k for k in keep if k is not con]
            a, c, kind = con
            flipped = (tuple(-x for x in a), -c, GE if kind == GT else GT)
            try:
                _solve(rest + [flipped], self.ambient_rank)
            except _Infeasible:
                keep = rest
        return _from_constraints(self.ambient_rank, sorted(keep, key=lambda t: (t[2], t[0], t[1])))

    def relatively_open_cells(self) -> list[LCRegion]:
        """Partition into relatively open convex pieces.

        Each nonstrict constraint is split into its strict part and its
        boundary; empty combinations are dropped.
        """
        out = []
        ns = self.nonstrict
        for r in range(len(ns) + 1):
            for tight in combinations(range(len(ns)), r):
                eqs = self.equalities + tuple(ns[i] for i in tight)
                st = self.strict + tuple(ns[i] for i in range(len(ns)) if i not in tight)
                cell = LCRegion(self.ambient_rank, (), st, eqs)
                if not cell.is_empty():
                    out.append(cell)
        return out


def _from_constraints(n, cons) -> LCRegion:
    ns, st, eq = [], [], []
    for a, c, kind in cons:
        {GE: ns, GT: st, EQ: eq}[kind].append((a, c))
    return LCRegion(n, tuple(ns), tuple(st), tuple(eq))


def normalize_hyperplane(a: Sequence, c=0) -> tuple[tuple[int, ...], Fraction] | None:
    """Canonical integer form of ``<a,x> = c``; None for a degenerate hyperplane."""
    a = _frac_vec(a)
    if all(x == 0 for x in a):
        return None
    c = Fraction(c)
    full = primitive(a + (c,))
    if next(x for x in full[:-1] if x != 0) < 0:
        full = tuple(-x for x in full)
    return full[:-1], Fraction(full[-1])


@dataclass(frozen=True)
class Cell:
    region: LCRegion
    point: tuple[Fraction, ...]
    signs: tuple[int, ...]


def _step_past(region: LCRegion, pt, q):
    """A point of ``region`` on the ray from ``pt`` through ``q``, beyond ``q``."""
    d = tuple(b - a for a, b in zip(pt, q))
    eps = Fraction(1)
    for _ in range(12):
        cand = tuple(b + eps * x for b, x in zip(q, d))
        if region.contains(cand):
            return cand
        eps /= 4
    return None


def arrangement_cells(base: LCRegion, hyperplanes: Iterable[tuple]) -> list[Cell]:
    """Cells of the arrangement restricted to ``base``, one exact sample each.

    ``hyperplanes`` are ``(a, c)`` pairs for ``<a,x> = c``.  Every cell is a
    convex, relatively open piece on which each hyperplane has constant sign.
    """
    planes = []
    seen = set()
    for a, c in hyperplanes:
        h = normalize_hyperplane(a, c)
        if h is not None and h not in seen:
            seen.add(h)
            planes.append(h)
    planes.sort()
    limit = max_cells()
    start = base.sample()
    if start is None:
        return []
    cells = [(base, start, ())]
    for a, c in planes:
        new = []
        for region, pt, signs in cells:
            v = dot(a, pt)
            here = (v > c) - (v < c)
            on = region.with_constraints(equalities=[(a, c)])
            q = pt if here == 0 else on.sample()
            for s in (1, 0, -1):
                if s == 0:
                    r, p = on, q
                else:
                    r = region.with_constraints(strict=[(a, c)] if s > 0 else [(tuple(-x for x in a), -c)])
                    if s == here:
                        p = pt
                    elif q is None:
                        # convexity: the far side is reachable only through the hyperplane
                        p = None
                    else:
                        p = _step_past(r, pt, q) if here else None
                        if p is None:
                            p = r.sample()
                if p is not None:
                    new.append((r, p, signs + (s,)))
        cells = new
        if len(cells) > limit:
            raise ArrangementTooLarge(
                f"arrangement has more than {limit} cells (raise CCC_MAX_CELLS to allow more)"
            )
    return [Cell(r, p, s) for r, p, s in cells]


def covered_by(region: LCRegion, pieces: Sequence[LCRegion]) -> tuple[bool, tuple | None]:
    """Whether ``region`` lies in the union of convex ``pieces``; returns a witness if not."""
    planes = [h for p in pieces for h in p.hyperplanes()]
    bad = [c.point for c in arrangement_cells(region, planes) if not any(p.contains(c.point) for p in pieces)]
    if bad:
        return False, min(bad)
    return True, None


def cone_rays_from_inequalities(n: int, nonstrict: Sequence, equalities: Sequence = ()) -> list[tuple[int, ...]]:
    """Extreme rays of a pointed cone ``{<a,x> >= 0, <e,x> = 0}``.

    Brute force over subsets of inequalities made tight; fine for small input.
    """
    ineq = [tuple(Fraction(x) for x in a) for a in nonstrict]
    eqs = [tuple(Fraction(x) for x in e) for e in equalities]
    r = rank_of(eqs, n) if eqs else 0
    k = n - r - 1
    rays = set()
    if k < 0:
        return []
    for sub in combinations(range(len(ineq)), k):
        rows = eqs + [ineq[i] for i in sub]
        ns = nullspace(rows, n) if rows else [tuple(int(i == j) for j in range(n)) for i in range(n)]
        if len(ns) != 1:
            continue
        v = ns[0]
        for cand in (v, tuple(-x for x in v)):
            if all(dot(a, cand) >= 0 for a in ineq):
                rays.add(cand)
                break
    return sorted(rays)
