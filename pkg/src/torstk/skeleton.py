"""FLTZ skeletons ``Lambda_Sigma = U (sigma^perp / M) x (-sigma)`` and the
combinatorial functoriality tests built on them.

Points of the cotangent bundle of ``M_R/M`` are pairs ``(x, xi)`` with ``x`` in
``M_R`` (taken modulo ``M``) and ``xi`` in ``N_R``.  A piece is a rational
subspace ``V`` of ``M_R`` together with a convex fiber region ``C`` of
``N_R``; it stands for ``(V + M)/M x C``.  On a stacky torus the skeleton is
the preimage of the one on ``M_R/M``, so membership only looks at ``x mod M``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import NamedTuple, Sequence

from .cones import Cone, Fan, FanMorphism, NotStronglyConvex, image_cone, properness_witness
from .lattice import LatticeMap, is_saturated, nullspace, rank_of, saturate
from .polyhedra import LCRegion, arrangement_cells
from .stacky import StackyFan, StackyMorphism, TorusCoverData, torus_data


class InternalInconsistency(RuntimeError):
    pass


class PrerequisiteFailed(ValueError):
    pass


def _neg_matrix(n: int) -> list[list[int]]:
    return [[-int(i == j) for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class SkeletonPiece:
    perp_basis: tuple[tuple, ...]  # spans V inside M_R
    fiber: LCRegion  # region of N_R
    cone: Cone | None = None  # sigma when the fiber is -sigma
    negated: bool = True

    @property
    def rank(self) -> int:
        return self.fiber.ambient_rank

    def equations(self) -> tuple[tuple[int, ...], ...]:
        """Integer rows ``W`` with ``V = ker W`` and ``W`` onto ``Z^k``."""
        n = self.rank
        if not self.perp_basis:
            return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
        ann = nullspace(self.perp_basis, n)
        return tuple(saturate(ann, n)) if ann else ()

    def base_contains(self, x: Sequence) -> bool:
        """Whether ``x`` lies in ``V + M``."""
        for w in self.equations():
            if Fraction(sum(Fraction(a) * b for a, b in zip(x, w))).denominator != 1:
                return False
        return True

    def subspace_contains(self, other_basis: Sequence) -> bool:
        """Whether the span of ``other_basis`` lies in ``V``."""
        eqs = self.equations()
        return all(sum(Fraction(a) * b for a, b in zip(v, w)) == 0 for v in other_basis for w in eqs)

    def contains(self, x: Sequence, xi: Sequence) -> bool:
        return self.fiber.contains(xi) and self.base_contains(x)


@dataclass(frozen=True)
class Skeleton:
    rank: int
    pieces: tuple[SkeletonPiece, ...]
    base: TorusCoverData | None = None  # None for the plain torus M_R/M


@dataclass(frozen=True)
class CovectorPoint:
    base_point: tuple
    covector: tuple
    label: tuple | None = None  # component of T_beta, ignored for membership


def fltz_piece(c: Cone) -> SkeletonPiece:
    n = c.ambient_rank
    return SkeletonPiece(tuple(c.perp), c.region().image(_neg_matrix(n)), c, True)


def fltz_skeleton(X: StackyFan | Fan) -> Skeleton:
    if isinstance(X, StackyFan):
        return Skeleton(X.N_rank, tuple(fltz_piece(c) for c in X.fan.cones), torus_data(X))
    return Skeleton(X.ambient_rank, tuple(fltz_piece(c) for c in X.cones))


def full_cotangent(n: int, base: TorusCoverData | None = None) -> Skeleton:
    basis = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    return Skeleton(n, (SkeletonPiece(basis, LCRegion.whole(n), None, False),), base)


def skeleton_member(sk: Skeleton, pt: CovectorPoint) -> bool:
    if len(pt.base_point) != sk.rank or len(pt.covector) != sk.rank:
        raise ValueError("point dimension does not match the skeleton")
    return any(p.contains(pt.base_point, pt.covector) for p in sk.pieces)


def _fan_map(phi) -> FanMorphism:
    return phi.fan_morphism if isinstance(phi, StackyMorphism) else phi


def pushforward_skeleton(phi: StackyMorphism | FanMorphism, sk: Skeleton) -> Skeleton:
    """Image pieces ``phi_M(V') x phi_N^{-1}(C')`` on the source torus.

    For an FLTZ piece this is ``phi_M(sigma^perp) x (-phi_N^{-1} sigma)``.  The
    fiber may contain lines.
    """
    fm = _fan_map(phi)
    f = fm.map
    n = f.source_rank
    if sk.rank != f.target_rank:
        raise ValueError("skeleton lives over the wrong torus")
    phi_M = f.transpose()
    pieces = []
    for p in sk.pieces:
        imgs = [phi_M(v) for v in p.perp_basis]
        r = rank_of(imgs, n) if imgs else 0
        basis = tuple(saturate(imgs, n)[:r]) if r else ()
        pieces.append(SkeletonPiece(basis, p.fiber.preimage(f.matrix, n), None, False))
    base = torus_data(phi.source) if isinstance(phi, StackyMorphism) else None
    return Skeleton(n, tuple(pieces), base)


def _generic_points(basis: Sequence, n: int):
    """Rational points of ``span(basis)`` in a fixed order, skipping 0."""
    if not basis:
        return
    for den in (2, 3, 5, 7, 11, 13):
        for coeffs in product(range(-1, 2), repeat=len(basis)):
            if not any(coeffs):
                continue
            yield tuple(
                sum(Fraction(c, den) * Fraction(v[i]) for c, v in zip(coeffs, basis)) for i in range(n)
            )
    for k in range(1, 40):
        coeffs = [Fraction(1, 2 + k * (i + 1)) for i in range(len(basis))]
        yield tuple(sum(c * Fraction(v[i]) for c, v in zip(coeffs, basis)) for i in range(n))


def subset_witness(A: Skeleton, B: Skeleton) -> CovectorPoint | None:
    """A point of ``A`` outside ``B``, or None when ``A`` is contained in ``B``.

    Each fiber of ``A`` is cut by every hyperplane of ``B``'s fibers; on a cell
    the set of ``B`` fibers containing it is constant.  A subspace ``V`` lies in
    a finite union of ``V_j + M`` only if it lies in one ``V_j``.
    """
    if A.rank != B.rank:
        raise ValueError("skeletons live over different tori")
    n = A.rank
    planes = [h for q in B.pieces for h in q.fiber.hyperplanes()]
    for p in A.pieces:
        for cell in arrangement_cells(p.fiber, planes):
            xi = cell.point
            over = [q for q in B.pieces if q.fiber.contains(xi)]
            if any(q.subspace_contains(p.perp_basis) for q in over):
                continue
            x = (Fraction(0),) * n
            if over:
                # 0 lies in every piece; look for a base point missing all of them
                x = None
                for cand in _generic_points(p.perp_basis, n):
                    if not any(q.base_contains(cand) for q in over):
                        x = cand
                        break
            return CovectorPoint(x, tuple(xi))
    return None


def skeleton_subset(A: Skeleton, B: Skeleton) -> bool:
    return subset_witness(A, B) is None


class LeftVerdict(NamedTuple):
    verdict: bool
    witness: CovectorPoint | None


class RightVerdict(NamedTuple):
    verdict: bool
    failing_cone: Cone | None
    failing_condition: int | None


def decide_left_functorial(phi: StackyMorphism | FanMorphism) -> LeftVerdict:
    """Properness of the underlying fan morphism, cross-checked against the
    inclusion of the pushed-forward target skeleton in the source skeleton.

    The witness covector is a point of ``phi^{-1}|Sigma'|`` outside ``|Sigma|``.
    """
    fm = _fan_map(phi)
    w = properness_witness(fm)
    verdict = w is None
    pushed = pushforward_skeleton(fm, fltz_skeleton(fm.target))
    inclusion = skeleton_subset(pushed, fltz_skeleton(fm.source))
    if inclusion != verdict:
        raise InternalInconsistency(
            f"properness says {verdict} but skeleton inclusion says {inclusion} for {fm.map.matrix}"
        )
    if verdict:
        return LeftVerdict(True, None)
    n = fm.map.source_rank
    return LeftVerdict(False, CovectorPoint((Fraction(0),) * n, tuple(Fraction(x) for x in w)))


def _saturated_sum(c: Cone, phi_M: LatticeMap) -> bool:
    n = c.ambient_rank
    gens = list(c.perp) + [tuple(col) for col in phi_M.columns]
    gens = [g for g in gens if any(g)]
    if not gens:
        return True
    return is_saturated(gens, n)


def decide_right_functorial(phi: StackyMorphism | FanMorphism) -> RightVerdict:
    """Every ``phi(sigma)`` is a cone of the target fan (condition 1) and
    ``(sigma^perp cap M) + phi_M(M')`` is saturated in ``M`` (condition 2)."""
    fm = _fan_map(phi)
    f = fm.map
    phi_M = f.transpose()
    for c in fm.source.cones:
        try:
            img = image_cone(f, c)
        except NotStronglyConvex:
            return RightVerdict(False, c, 1)
        if img not in fm.target:
            return RightVerdict(False, c, 1)
        if not _saturated_sum(c, phi_M):
            return RightVerdict(False, c, 2)
    return RightVerdict(True, None, None)


def adj_hypothesis_check(phi: StackyMorphism | FanMorphism, Pi: Skeleton, Pi_t: Skeleton) -> bool:
    """Whether the pushforward of ``Pi_t`` lies in ``Pi``, for skeletons
    ``Pi`` over the source and ``Pi_t`` over the target containing the FLTZ ones."""
    fm = _fan_map(phi)
    if not skeleton_subset(fltz_skeleton(fm.source), Pi):
        raise PrerequisiteFailed("source skeleton is not contained in Pi")
    if not skeleton_subset(fltz_skeleton(fm.target), Pi_t):
        raise PrerequisiteFailed("target skeleton is not contained in Pi'")
    return skeleton_subset(pushforward_skeleton(fm, Pi_t), Pi)
