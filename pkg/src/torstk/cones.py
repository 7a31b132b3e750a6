"""Rational polyhedral cones and fans.

A :class:`Cone` always carries both descriptions: its primitive rays and its
inward facet normals.  For a cone that is not full dimensional the normals are
taken inside the real span of the cone (so they are unique up to scaling) and
the span itself is cut out by the equations in ``perp``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cmp_to_key, lru_cache
from itertools import combinations, product
from typing import Iterable, Sequence

from .lattice import (
    LatticeMap,
    complete_basis,
    dot,
    invariant_factors,
    kernel_basis,
    nullspace,
    primitive,
    rank_of,
    rref,
    saturate,
    smith_normal_form,
)
from .polyhedra import (
    LCRegion,
    arrangement_cells,
    cone_rays_from_inequalities,
    covered_by,
)


class NotStronglyConvex(ValueError):
    """The generated cone contains a line."""


class OverlappingCones(ValueError):
    """Two cones meet in a set that is not a common face."""


class ConeNotInFan(ValueError):
    pass


class NotAFanMorphism(ValueError):
    pass


@dataclass(frozen=True)
class Cone:
    ambient_rank: int
    rays: tuple[tuple[int, ...], ...]
    facet_normals: tuple[tuple[int, ...], ...]
    dim: int
    perp: tuple[tuple[int, ...], ...]

    def __repr__(self):
        return f"Cone({list(self.rays)})"

    @property
    def key(self) -> tuple:
        return self.rays

    def region(self) -> LCRegion:
        return LCRegion(
            self.ambient_rank,
            nonstrict=tuple((m, 0) for m in self.facet_normals),
            equalities=tuple((p, 0) for p in self.perp),
        )

    def contains(self, x: Sequence) -> bool:
        return all(dot(p, x) == 0 for p in self.perp) and all(dot(m, x) >= 0 for m in self.facet_normals)

    def contains_cone(self, other: Cone) -> bool:
        return all(self.contains(r) for r in other.rays)

    def relative_interior_contains(self, x: Sequence) -> bool:
        return all(dot(p, x) == 0 for p in self.perp) and all(dot(m, x) > 0 for m in self.facet_normals)

    def faces(self) -> tuple[Cone, ...]:
        return _faces(self)

    def is_face_of(self, other: Cone) -> bool:
        return any(f.rays == self.rays for f in other.faces())

    def is_simplicial(self) -> bool:
        return len(self.rays) == self.dim

    def multiplicity(self) -> int:
        """Index of the ray lattice in ``Z sigma`` (simplicial cones only)."""
        if not self.is_simplicial():
            raise ValueError("multiplicity is defined here for simplicial cones only")
        out = 1
        if self.rays:
            for d in invariant_factors(LatticeMap.from_columns(self.rays, self.ambient_rank)):
                out *= d
        return out

    def is_smooth(self) -> bool:
        return self.is_simplicial() and self.multiplicity() == 1

    def interior_point(self) -> tuple[int, ...]:
        n = self.ambient_rank
        return tuple(sum(r[i] for r in self.rays) for i in range(n))


def _strongly_convex(rays, n) -> bool:
    """No nontrivial nonnegative combination of the rays vanishes."""
    k = len(rays)
    if k == 0:
        return True
    eqs = [(tuple(r[i] for r in rays), 0) for i in range(n)]
    eqs.append(((1,) * k, 1))
    nonneg = [(tuple(int(i == j) for j in range(k)), 0) for i in range(k)]
    return LCRegion(k, nonstrict=tuple(nonneg), equalities=tuple(eqs)).is_empty()


def cone_from_rays(ambient_rank: int, rays: Iterable[Sequence[int]]) -> Cone:
    """The canonical :class:`Cone` generated by ``rays``; zero vectors are ignored."""
    n = ambient_rank
    prim = set()
    for r in rays:
        r = tuple(r)
        if len(r) != n:
            raise ValueError("ray length does not match ambient rank")
        if any(r):
            prim.add(primitive(r))
    return _cone(n, tuple(sorted(prim)))


@lru_cache(maxsize=65536)
def _cone(n: int, gens: tuple) -> Cone:
    if not _strongly_convex(gens, n):
        raise NotStronglyConvex(f"cone generated by {gens} contains a line")
    dim = rank_of(gens, n)
    perp = tuple(kernel_basis(LatticeMap(n, len(gens), tuple(gens)))) if gens else tuple(
        tuple(int(i == j) for j in range(n)) for i in range(n)
    )
    # perp is a basis of sigma^perp in M; as plain vectors it is also the
    # orthogonal complement of span(sigma) for the standard pairing
    normals = set()
    if dim:
        for sub in combinations(gens, dim - 1):
            rows = list(sub) + list(perp)
            ns = nullspace(rows, n)
            if len(ns) != 1:
                continue
            m = ns[0]
            vals = [dot(m, r) for r in gens]
            if all(v >= 0 for v in vals):
                normals.add(m)
            elif all(v <= 0 for v in vals):
                normals.add(tuple(-x for x in m))
    extreme = [r for r in gens if not _in_cone_of(r, [s for s in gens if s != r], n)]
    return Cone(n, tuple(extreme), tuple(sorted(normals)), dim, tuple(sorted(perp)))


def _in_cone_of(v, gens, n) -> bool:
    if not gens:
        return not any(v)
    k = len(gens)
    eqs = tuple((tuple(g[i] for g in gens), v[i]) for i in range(n))
    nonneg = tuple((tuple(int(i == j) for j in range(k)), 0) for i in range(k))
    return not LCRegion(k, nonstrict=nonneg, equalities=eqs).is_empty()


def cone_from_region(region: LCRegion) -> Cone:
    """The cone cut out by a homogeneous, pointed region."""
    n = region.ambient_rank
    if any(c != 0 for _, c in region.hyperplanes()) or region.strict:
        raise ValueError("region is not a closed homogeneous cone")
    rays = cone_rays_from_inequalities(n, [a for a, _ in region.nonstrict], [a for a, _ in region.equalities])
    return cone_from_rays(n, rays)


@lru_cache(maxsize=65536)
def _faces(c: Cone) -> tuple[Cone, ...]:
    seen = {c.rays: c}
    stack = [c]
    while stack:
        cur = stack.pop()
        for m in cur.facet_normals:
            sub = [r for r in cur.rays if dot(m, r) == 0]
            key = tuple(sub)
            if key not in seen:
                f = cone_from_rays(c.ambient_rank, sub)
                seen[key] = f
                stack.append(f)
    return tuple(sorted(seen.values(), key=lambda f: (f.dim, f.rays)))


@dataclass(frozen=True)
class ConeAnalysis:
    dual: Cone | LCRegion
    perp_basis: tuple[tuple[int, ...], ...]
    faces: tuple[Cone, ...]
    smooth: bool
    span_basis: tuple[tuple[int, ...], ...]


def dual_cone(c: Cone) -> Cone | LCRegion:
    """``sigma^vee``; a :class:`Cone` when ``sigma`` is full dimensional, otherwise
    the (non-pointed) region ``{m : <m, r> >= 0 for every ray r}``."""
    if c.dim == c.ambient_rank:
        return cone_from_rays(c.ambient_rank, c.facet_normals)
    return LCRegion(c.ambient_rank, nonstrict=tuple((r, 0) for r in c.rays))


def cone_analyze(c: Cone) -> ConeAnalysis:
    return ConeAnalysis(
        dual=dual_cone(c),
        perp_basis=c.perp,
        faces=c.faces(),
        smooth=c.is_smooth(),
        span_basis=saturate(c.rays, c.ambient_rank),
    )


def image_cone(f: LatticeMap, c: Cone) -> Cone:
    """``f_R(sigma)``; raises NotStronglyConvex if the image contains a line."""
    return cone_from_rays(f.target_rank, [f(r) for r in c.rays])


# ---------------------------------------------------------------------------
# fans

@dataclass(frozen=True)
class Fan:
    ambient_rank: int
    cones: tuple[Cone, ...]
    _index: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {c.rays: c for c in self.cones})

    def __repr__(self):
        return f"Fan(rank={self.ambient_rank}, maximal={[list(c.rays) for c in self.maximal_cones()]})"

    def __contains__(self, c: Cone) -> bool:
        return c.rays in self._index

    def __len__(self):
        return len(self.cones)

    def cone(self, rays) -> Cone:
        key = tuple(sorted(primitive(r) for r in rays))
        try:
            return self._index[key]
        except KeyError:
            raise ConeNotInFan(f"no cone with rays {list(key)}") from None

    def maximal_cones(self) -> tuple[Cone, ...]:
        return tuple(
            c for c in self.cones if not any(d is not c and len(d.rays) > len(c.rays) and d.contains_cone(c) for d in self.cones)
        )

    def rays(self) -> tuple[tuple[int, ...], ...]:
        return tuple(c.rays[0] for c in self.cones if c.dim == 1)

    def regions(self) -> list[LCRegion]:
        return [c.region() for c in self.maximal_cones()]

    def contains_point(self, x) -> bool:
        return any(c.contains(x) for c in self.maximal_cones())

    def is_smooth(self) -> bool:
        return all(c.is_smooth() for c in self.cones)

    def same_cones(self, other: Fan) -> bool:
        return self.ambient_rank == other.ambient_rank and set(self._index) == set(other._index)


def zero_fan(n: int) -> Fan:
    return Fan(n, (cone_from_rays(n, []),))


def _face_closure(cones: Sequence[Cone], n: int) -> Fan:
    closed: dict = {}
    for c in list(cones) + [cone_from_rays(n, [])]:
        for f in c.faces():
            closed.setdefault(f.rays, f)
    return Fan(n, tuple(sorted(closed.values(), key=lambda c: (c.dim, c.rays))))


def fan_validate(cones: Iterable[Cone | Sequence[Sequence[int]]], ambient_rank: int) -> Fan:
    """Face-close ``cones`` and check that they meet along common faces."""
    n = ambient_rank
    given = []
    for c in cones:
        if not isinstance(c, Cone):
            c = cone_from_rays(n, c)
        if c.ambient_rank != n:
            raise ValueError("cone ambient rank does not match fan")
        given.append(c)
    fan = _face_closure(given, n)
    closed = fan._index
    maxc = fan.maximal_cones()
    face_keys = {c.rays: {f.rays for f in c.faces()} for c in maxc}
    for a, b in combinations(maxc, 2):
        # a cap b is a common face iff it is the cone on the shared rays
        shared = tuple(sorted(set(a.rays) & set(b.rays)))
        meet = a.region().intersect(b.region())
        if shared not in face_keys[a.rays] or shared not in face_keys[b.rays]:
            ok = False
        else:
            ok = _separated(a, b, shared) or meet.is_subset(closed[shared].region())
        if not ok:
            inter = cone_from_region(meet)
            raise OverlappingCones(f"{a} and {b} meet in {inter}, which is not a common face")
    return fan


def _separated(a: Cone, b: Cone, shared: tuple) -> bool:
    """Cheap sufficient test that ``a cap b`` is the cone on ``shared``: a
    functional that is >= 0 on ``a``, <= 0 on ``b`` and vanishes on exactly
    the shared rays of each."""
    sa = [m for m in a.facet_normals if all(dot(m, r) == 0 for r in shared)]
    sb = [m for m in b.facet_normals if all(dot(m, r) == 0 for r in shared)]
    n = a.ambient_rank
    cands = list(a.facet_normals) + [tuple(-x for x in m) for m in b.facet_normals]
    cands.append(tuple(sum(m[i] for m in sa) - sum(m[i] for m in sb) for i in range(n)))
    for m in cands:
        va = [dot(m, r) for r in a.rays]
        vb = [dot(m, r) for r in b.rays]
        if all(v >= 0 for v in va) and all(v <= 0 for v in vb):
            if tuple(r for r, v in zip(a.rays, va) if v == 0) == shared and tuple(
                r for r, v in zip(b.rays, vb) if v == 0
            ) == shared:
                return True
    return False


def support_equal(f1: Fan, f2: Fan) -> bool:
    return all(covered_by(r, f2.regions())[0] for r in f1.regions()) and all(
        covered_by(r, f1.regions())[0] for r in f2.regions()
    )


@dataclass(frozen=True)
class FanRelation:
    """``kind`` in {equal, subfan, refinement, unrelated}.

    ``forward`` is True when the first fan is the subfan (resp. the
    refinement) of the second.
    """

    kind: str
    forward: bool = True


def fan_relate(f1: Fan, f2: Fan) -> FanRelation:
    if f1.ambient_rank != f2.ambient_rank:
        return FanRelation("unrelated")
    k1, k2 = set(f1._index), set(f2._index)
    if k1 == k2:
        return FanRelation("equal")
    if k1 <= k2:
        return FanRelation("subfan", True)
    if k2 <= k1:
        return FanRelation("subfan", False)
    if support_equal(f1, f2):
        if all(any(d.contains_cone(c) for d in f2.maximal_cones()) for c in f1.maximal_cones()):
            return FanRelation("refinement", True)
        if all(any(d.contains_cone(c) for d in f1.maximal_cones()) for c in f2.maximal_cones()):
            return FanRelation("refinement", False)
    return FanRelation("unrelated")


def is_complete(fan: Fan) -> bool:
    """A fan is complete iff it is pure of full dimension and every wall
    (codimension-one cone) is a face of exactly two maximal cones."""
    n = fan.ambient_rank
    maxc = fan.maximal_cones()
    if any(c.dim != n for c in maxc):
        return False
    if n == 0:
        return True
    for w in fan.cones:
        if w.dim == n - 1 and sum(c.contains_cone(w) for c in maxc) != 2:
            return False
    return True


@dataclass(frozen=True)
class FanMorphism:
    map: LatticeMap
    source: Fan
    target: Fan


def fan_morphism(f: LatticeMap, source: Fan, target: Fan) -> FanMorphism:
    if f.source_rank != source.ambient_rank or f.target_rank != target.ambient_rank:
        raise ValueError("lattice map ranks do not match the fans")
    tmax = target.maximal_cones()
    for c in source.maximal_cones():
        imgs = [f(r) for r in c.rays]
        if not any(all(t.contains(v) for v in imgs) for t in tmax):
            raise NotAFanMorphism(f"image of {c} lies in no cone of the target")
    return FanMorphism(f, source, target)


def properness_witness(phi: FanMorphism) -> tuple | None:
    """Lex-smallest cell sample of ``phi^{-1}|target| \\ |source|``, or None."""
    src = phi.source.regions()
    bad = []
    for t in phi.target.maximal_cones():
        pre = t.region().preimage(phi.map.matrix, phi.map.source_rank)
        ok, w = covered_by(pre, src)
        if not ok:
            bad.append(w)
    return min(bad) if bad else None


def is_proper(phi: FanMorphism) -> bool:
    return properness_witness(phi) is None


# ---------------------------------------------------------------------------
# refinements

def stellar_subdivision(fan: Fan, v: Sequence[int]) -> Fan:
    """Star subdivision of ``fan`` at the primitive vector ``v``."""
    n = fan.ambient_rank
    new = []
    for c in fan.cones:
        if not c.contains(v):
            new.append(c)
            continue
        for t in c.faces():
            if not t.contains(v):
                new.append(cone_from_rays(n, list(t.rays) + [tuple(v)]))
    return fan_validate(new, n)


def _parallelepiped_points(c: Cone):
    """Yield ``(point, lambdas)`` for nonzero lattice points ``sum l_i r_i`` with ``0 <= l_i < 1``."""
    n, k = c.ambient_rank, len(c.rays)
    basis = saturate(c.rays, n)
    b_inv = complete_basis(basis, n)[1]
    coords = [b_inv(r)[:k] for r in c.rays]  # rays in basis of Z sigma
    rmat = LatticeMap.from_columns(coords, k)
    snf = smith_normal_form(rmat)
    ds = snf.invariants
    def lambdas(g):
        aug = [list(rmat.matrix[i]) + [g[i]] for i in range(k)]
        red, _ = rref(aug, k + 1)
        return [row[k] for row in red]

    ranges = [range(d) for d in ds]
    for y in product(*ranges):
        if not any(y):
            continue
        g = snf.left_inverse(y)
        lam = [x - (x.numerator // x.denominator) for x in lambdas(g)]
        pt = tuple(sum(l * r[i] for l, r in zip(lam, c.rays)) for i in range(n))
        yield tuple(int(x) for x in pt), lam


def _best_stellar_ray(c: Cone) -> tuple[int, ...]:
    mult = c.multiplicity()
    best = None
    for pt, lam in _parallelepiped_points(c):
        try:
            if primitive(pt) != pt:
                continue
        except ValueError:
            continue
        worst = max(mult * l for l in lam if l > 0)
        key = (worst, pt)
        if best is None or key < best:
            best = key
    if best is None:
        raise AssertionError(f"no subdivision candidate in non-smooth cone {c}")
    return best[1]


def smooth_refine(fan: Fan) -> Fan:
    """Resolve singularities by stellar subdivisions; smooth cones are never touched."""
    while True:
        nonsimp = [c for c in fan.cones if not c.is_simplicial()]
        if nonsimp:
            c = min(nonsimp, key=lambda c: (c.dim, c.rays))
            fan = stellar_subdivision(fan, primitive(c.interior_point()))
            continue
        bad = [c for c in fan.cones if c.multiplicity() > 1]
        if not bad:
            return fan
        c = min(bad, key=lambda c: (-c.multiplicity(), c.dim, c.rays))
        fan = stellar_subdivision(fan, _best_stellar_ray(c))


def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _half(v):
    # 0 for angles in [0, pi), 1 for [pi, 2pi)
    return 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1


def _circular_sort(rays):
    def cmp(a, b):
        ha, hb = _half(a), _half(b)
        if ha != hb:
            return ha - hb
        x = _cross(a, b)
        return -1 if x > 0 else (1 if x < 0 else 0)

    return sorted(rays, key=cmp_to_key(cmp))


def _complete_rank2(fan: Fan) -> Fan:
    rays = list(fan.rays())
    if not rays:
        rays = [(1, 0)]
    twocones = {c.rays for c in fan.cones if c.dim == 2}
    while True:
        order = _circular_sort(rays)
        added = False
        for i, a in enumerate(order):
            b = order[(i + 1) % len(order)]
            x = _cross(a, b)
            if len(order) == 1 or x < 0 or (x == 0 and dot(a, b) < 0):
                rays.append((-a[1], a[0]))
                added = True
                break
        if not added:
            break
    order = _circular_sort(rays)
    cones = list(fan.cones)
    cones += [cone_from_rays(2, [r]) for r in rays]
    for i, a in enumerate(order):
        b = order[(i + 1) % len(order)]
        key = tuple(sorted([a, b]))
        if key not in twocones:
            cones.append(cone_from_rays(2, [a, b]))
    return fan_validate(cones, 2)


def arrangement_fan(fan: Fan) -> Fan:
    """Complete fan of closed chambers cut out by every facet and span hyperplane
    of ``fan`` together with the coordinate hyperplanes."""
    n = fan.ambient_rank
    planes = [(tuple(int(i == j) for j in range(n)), 0) for i in range(n)]
    for c in fan.cones:
        planes += [(m, 0) for m in c.facet_normals] + [(p, 0) for p in c.perp]
    cones = []
    for cell in arrangement_cells(LCRegion.whole(n), planes):
        if 0 in cell.signs:
            continue
        closed = LCRegion(n, nonstrict=cell.region.strict)
        cones.append(cone_from_region(closed))
    # closed chambers of a central arrangement always form a fan
    return _face_closure(cones, n)


def complete_fan(fan: Fan) -> tuple[Fan, bool]:
    """A complete fan containing ``fan`` (second value False) or a refinement of it (True)."""
    n = fan.ambient_rank
    if is_complete(fan):
        return fan, False
    if n == 1:
        return fan_validate([[(1,)], [(-1,)]] + list(fan.cones), 1), False
    if n == 2:
        return _complete_rank2(fan), False
    return arrangement_fan(fan), True


def common_refinement(regions: Sequence[LCRegion], fan: Fan) -> Fan:
    """Fan of all ``R cap sigma`` for closed homogeneous regions ``R`` and cones of ``fan``.

    The regions may contain lines; each intersection is pointed because the
    cones of ``fan`` are.
    """
    n = fan.ambient_rank
    cones = []
    for r in regions:
        for c in fan.maximal_cones():
            cones.append(cone_from_region(r.intersect(c.region())))
    return fan_validate(cones, n)


def product_fan(f1: Fan, f2: Fan) -> Fan:
    n1, n2 = f1.ambient_rank, f2.ambient_rank
    cones = []
    for a in f1.maximal_cones():
        for b in f2.maximal_cones():
            rays = [tuple(r) + (0,) * n2 for r in a.rays] + [(0,) * n1 + tuple(r) for r in b.rays]
            cones.append(cone_from_rays(n1 + n2, rays))
    return fan_validate(cones, n1 + n2)


def map_fan(f: LatticeMap, fan: Fan) -> Fan:
    """Image of every cone under an invertible-over-Q lattice map."""
    return fan_validate([image_cone(f, c) for c in fan.maximal_cones()], f.target_rank)


# ---------------------------------------------------------------------------
# stars and orbit closures

@dataclass(frozen=True)
class StarQuotient:
    star: tuple[Cone, ...]
    closed_star: Fan
    boundary_star: Fan
    quotient_fan: Fan
    projection: LatticeMap
    correspondence: dict = field(compare=False, repr=False)


def star_quotient(fan: Fan, tau: Cone) -> StarQuotient:
    if tau not in fan:
        raise ConeNotInFan(f"{tau} is not a cone of the fan")
    n = fan.ambient_rank
    star = tuple(c for c in fan.cones if c.contains_cone(tau))
    closed = fan_validate(star, n)
    boundary = Fan(n, tuple(c for c in closed.cones if not c.contains_cone(tau)))
    basis = saturate(tau.rays, n)
    _, b_inv = complete_basis(basis, n)
    k = len(basis)
    p = LatticeMap(n, n - k, b_inv.matrix[k:])
    images = {}
    for c in star:
        images[c.rays] = image_cone(p, c)
    quotient = fan_validate(list(images.values()), n - k)
    return StarQuotient(star, closed, boundary, quotient, p, images)
