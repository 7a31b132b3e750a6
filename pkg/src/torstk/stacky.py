"""Stacky fans ``(N, Sigma, L, beta)``, their morphisms and classification.

``L`` is a presented group ``Z^r (+) Z/d_1 (+) ...`` and ``beta: M -> L`` is an
integer matrix with one row per generator of ``L`` (torsion rows reduced).
Group maps of morphisms go ``L' -> L``, opposite to the map of stacks.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .cones import (
    Cone,
    Fan,
    FanMorphism,
    NotStronglyConvex,
    OverlappingCones,
    common_refinement,
    cone_from_rays,
    fan_morphism,
    fan_validate,
    image_cone,
    is_complete,
    map_fan,
    product_fan,
    smooth_refine,
)
from .lattice import (
    FinAbGroup,
    LatticeMap,
    cokernel_group,
    hstack,
    kernel_basis,
    lattice_basis,
)


class IncompatibleBeta(ValueError):
    pass


class IncompatibleMorphism(ValueError):
    pass


class NotConvertible(ValueError):
    pass


class SourceNotSmoothComplete(ValueError):
    pass


@dataclass(frozen=True)
class StackyFan:
    fan: Fan
    L: FinAbGroup
    beta: LatticeMap  # M -> Z^{L.ngens}
    name: str | None = None

    @property
    def N_rank(self) -> int:
        return self.fan.ambient_rank

    def beta_with_relations(self) -> LatticeMap:
        """``[beta | relations]``: its cokernel is ``coker beta``."""
        return hstack(self.beta, self.L.relations())

    def scheme_part(self) -> StackyFan:
        n = self.N_rank
        return StackyFan(self.fan, FinAbGroup(), LatticeMap.zero(n, 0))


def validate_stacky(fan: Fan, L: FinAbGroup, beta, name: str | None = None) -> StackyFan:
    """Check shapes and reduce ``beta`` modulo the torsion of ``L``."""
    n = fan.ambient_rank
    if not isinstance(beta, LatticeMap):
        rows = [list(r) for r in beta]
        try:
            beta = LatticeMap(n, len(rows), rows)
        except ValueError:
            beta = None
    if beta is None or beta.source_rank != n or beta.target_rank != L.ngens:
        raise IncompatibleBeta(
            f"beta must be a {L.ngens}x{n} matrix (one row per generator of L, one column per basis vector of M)"
        )
    beta = LatticeMap(n, L.ngens, L.reduce_matrix(beta.matrix))
    return StackyFan(fan, L, beta, name)


def group_map_equal(L: FinAbGroup, f: LatticeMap, g: LatticeMap) -> bool:
    """Whether two maps into the presented group ``L`` agree."""
    return L.reduce_matrix(f.matrix) == L.reduce_matrix(g.matrix)


def check_group_hom(src: FinAbGroup, dst: FinAbGroup, f: LatticeMap) -> None:
    """Raise unless ``f`` (on generators) defines a homomorphism ``src -> dst``."""
    if f.source_rank != src.ngens or f.target_rank != dst.ngens:
        raise IncompatibleMorphism("group map has the wrong shape")
    for i, d in enumerate(src.invariant_factors):
        col = f.columns[src.free_rank + i]
        if any(x for x in dst.reduce(tuple(d * x for x in col))):
            raise IncompatibleMorphism(f"torsion generator of order {d} is not sent to a {d}-torsion element")


@dataclass(frozen=True)
class StackyMorphism:
    """``phi: X -> X'`` with fan morphism ``N -> N'`` and group map ``L' -> L``."""

    source: StackyFan
    target: StackyFan
    fan_morphism: FanMorphism
    group_map: LatticeMap

    @property
    def phi_N(self) -> LatticeMap:
        return self.fan_morphism.map

    @property
    def phi_M(self) -> LatticeMap:
        return self.fan_morphism.map.transpose()


def stacky_morphism(source: StackyFan, target: StackyFan, phi_N, phi_L) -> StackyMorphism:
    if not isinstance(phi_N, LatticeMap):
        phi_N = LatticeMap(source.N_rank, target.N_rank, phi_N)
    if not isinstance(phi_L, LatticeMap):
        phi_L = LatticeMap(target.L.ngens, source.L.ngens, phi_L)
    fm = fan_morphism(phi_N, source.fan, target.fan)
    check_group_hom(target.L, source.L, phi_L)
    lhs = source.beta @ phi_N.transpose()
    rhs = phi_L @ target.beta
    if not group_map_equal(source.L, lhs, rhs):
        raise IncompatibleMorphism("beta o phi_M differs from phi_L o beta'")
    phi_L = LatticeMap(phi_L.source_rank, phi_L.target_rank, source.L.reduce_matrix(phi_L.matrix))
    return StackyMorphism(source, target, fm, phi_L)


def compose(second: StackyMorphism, first: StackyMorphism) -> StackyMorphism:
    """``second o first``."""
    return stacky_morphism(
        first.source,
        second.target,
        second.phi_N @ first.phi_N,
        first.group_map @ second.group_map,
    )


def identity_morphism(X: StackyFan) -> StackyMorphism:
    return stacky_morphism(X, X, LatticeMap.identity(X.N_rank), LatticeMap.identity(X.L.ngens))


# ---------------------------------------------------------------------------
# classification

def perp_lattice(c: Cone) -> tuple[tuple[int, ...], ...]:
    """Basis of ``sigma^perp cap M``."""
    return c.perp


@dataclass(frozen=True)
class Classification:
    is_scheme: bool
    is_variety: bool
    K_rank: int | None = None
    Phi: LatticeMap | None = None
    image_cones: dict | None = None
    fan: Fan | None = None
    failing_cone: Cone | None = None


def _restricted_beta(X: StackyFan, c: Cone) -> LatticeMap:
    basis = perp_lattice(c)
    n = X.N_rank
    return X.beta @ LatticeMap.from_columns(basis, n) if basis else LatticeMap.zero(0, X.L.ngens)


def classify(X: StackyFan) -> Classification:
    """Decide whether the stack is a scheme and whether it is a toric variety."""
    for c in X.fan.maximal_cones():
        if not X.L.is_surjective(_restricted_beta(X, c)):
            return Classification(False, False, failing_cone=c)
    n = X.N_rank
    r = X.L.free_rank
    # L^vee -> N is the transpose of the free rows of beta
    beta_free = LatticeMap(n, r, X.beta.matrix[:r])
    _, proj = cokernel_group(beta_free.transpose())
    Phi = proj.free_part
    k = Phi.target_rank
    images = {}
    try:
        for c in X.fan.cones:
            images[c.rays] = image_cone(Phi, c)
    except NotStronglyConvex:
        return Classification(True, False, k, Phi)
    cones = X.fan.cones
    injective = len({v.rays for v in images.values()}) == len(cones)
    order_ok = injective and all(
        a.contains_cone(b) == images[a.rays].contains_cone(images[b.rays]) for a in cones for b in cones
    )
    if not order_ok:
        return Classification(True, False, k, Phi, images)
    try:
        fan = fan_validate(list(images.values()), k)
    except OverlappingCones:
        return Classification(True, False, k, Phi, images)
    return Classification(True, True, k, Phi, images, fan)


# ---------------------------------------------------------------------------
# stacky torus

@dataclass(frozen=True)
class TorusCoverData:
    """``T_beta = (M_R x L)/M``: components ``coker beta``, each ``M_R / ker beta``."""

    M_rank: int
    component_group: FinAbGroup
    deck_lattice: tuple[tuple[int, ...], ...]

    @property
    def compact_rank(self) -> int:
        return len(self.deck_lattice)

    @property
    def vector_rank(self) -> int:
        return self.M_rank - self.compact_rank

    @property
    def n_components(self) -> int | None:
        return self.component_group.order


def beta_kernel(X: StackyFan) -> tuple[tuple[int, ...], ...]:
    """A basis of ``ker beta`` inside ``M``."""
    n = X.N_rank
    ext = X.beta_with_relations()
    gens = [col[:n] for col in kernel_basis(ext)]
    return lattice_basis(gens, n)


def torus_data(X: StackyFan) -> TorusCoverData:
    group, _ = cokernel_group(X.beta_with_relations())
    return TorusCoverData(X.N_rank, group, beta_kernel(X))


# ---------------------------------------------------------------------------
# GS presentations

@dataclass(frozen=True)
class GSPresentation:
    """``(L, Sigma, N, phi)``: a fan on the lattice ``L`` and ``phi: L -> N``."""

    fan: Fan
    phi: LatticeMap

    @property
    def N_rank(self) -> int:
        return self.phi.target_rank


def gs_to_stacky(gs: GSPresentation) -> StackyFan:
    """Group of characters ``coker(phi^vee)`` with ``beta`` the projection onto it.

    When ``phi`` is surjective this is ``(ker phi)^vee`` with ``beta`` dual to
    the inclusion ``ker phi -> L``; in general it also keeps the finite part
    coming from ``coker phi``.
    """
    phi = gs.phi
    if phi.source_rank != gs.fan.ambient_rank:
        raise NotConvertible("phi must start at the lattice carrying the fan")
    _, proj = cokernel_group(phi)
    if proj.group.free_rank:
        raise NotConvertible("coker phi is not finite")
    group, proj = cokernel_group(phi.transpose())
    beta = LatticeMap(phi.source_rank, group.ngens, proj.matrix)
    return validate_stacky(gs.fan, group, beta)


def stacky_to_gs(X: StackyFan) -> GSPresentation:
    """``N -> (ker beta)^vee``, dual to the inclusion ``ker beta -> M``.

    For free ``L`` this is the projection ``N -> coker(beta^vee)``.
    """
    if not X.L.is_surjective(X.beta):
        raise NotConvertible("beta is not surjective")
    n = X.N_rank
    ker = beta_kernel(X)
    inc = LatticeMap.from_columns(ker, n) if ker else LatticeMap.zero(0, n)
    return GSPresentation(X.fan, inc.transpose())


def gs_convert(direction: str, data):
    if direction == "from_gs":
        return gs_to_stacky(data)
    if direction == "to_gs":
        return stacky_to_gs(data)
    raise ValueError("direction must be 'from_gs' or 'to_gs'")


# ---------------------------------------------------------------------------
# factorizations

def factor_group_change(phi: StackyMorphism) -> tuple[StackyMorphism, StackyMorphism]:
    """``phi = phi2 o phi1`` with ``phi1`` over the fixed group ``L`` and ``phi2``
    a pure change of group over the identity of ``N'``."""
    X, Y = phi.source, phi.target
    mid_beta = X.beta @ phi.phi_M
    mid = validate_stacky(Y.fan, X.L, mid_beta)
    phi1 = stacky_morphism(X, mid, phi.phi_N, LatticeMap.identity(X.L.ngens))
    phi2 = stacky_morphism(mid, Y, LatticeMap.identity(Y.N_rank), phi.group_map)
    return phi1, phi2


@dataclass(frozen=True)
class ABCFactorization:
    a: FanMorphism
    b: FanMorphism
    c: FanMorphism
    smooth_fan: Fan
    graph_cones: tuple[Cone, ...]


def _orthant_fan(n: int) -> Fan:
    cones = []
    for signs in product((1, -1), repeat=n):
        cones.append(cone_from_rays(n, [tuple(s if i == j else 0 for j in range(n)) for i, s in enumerate(signs)]))
    if n == 0:
        cones = [cone_from_rays(0, [])]
    return fan_validate(cones, n)


def abc_factorization(phi: FanMorphism) -> ABCFactorization:
    """``phi = c . b . a`` through ``N (+) N'`` for a smooth complete source fan.

    ``a = (id, 0)^T``, ``b = [[id, 0], [phi, id]]`` and ``c = (0, id)``.  The
    returned smooth fan refines ``Sigma x Sigma'`` and contains ``b(sigma x 0)``
    for every ``sigma`` of the source.
    """
    src, tgt = phi.source, phi.target
    if not (src.is_smooth() and is_complete(src)):
        raise SourceNotSmoothComplete("source fan must be smooth and complete")
    n, m = src.ambient_rank, tgt.ambient_rank
    f = phi.map.matrix
    ident = lambda k: [[int(i == j) for j in range(k)] for i in range(k)]
    a_rows = [row + [] for row in ident(n)] + [[0] * n for _ in range(m)]
    b_rows = [r + [0] * m for r in ident(n)] + [list(f[i]) + ident(m)[i] for i in range(m)]
    binv_rows = [r + [0] * m for r in ident(n)] + [[-x for x in f[i]] + ident(m)[i] for i in range(m)]
    c_rows = [[0] * n + r for r in ident(m)]
    a = LatticeMap(n, n + m, a_rows)
    b = LatticeMap(n + m, n + m, b_rows)
    binv = LatticeMap(n + m, n + m, binv_rows)
    c = LatticeMap(n + m, m, c_rows)

    sigma0 = fan_validate([cone_from_rays(n + m, [tuple(r) + (0,) * m for r in s.rays]) for s in src.maximal_cones()], n + m)
    prod = product_fan(src, tgt)
    # pull Sigma x Sigma' back by b, refine against Sigma x (orthants), push forward
    pulled = map_fan(binv, prod)
    grid = product_fan(src, _orthant_fan(m))
    refined = common_refinement([cone.region() for cone in pulled.maximal_cones()], grid)
    smooth = smooth_refine(map_fan(b, refined))
    graph = tuple(image_cone(b, s) for s in sigma0.cones)
    return ABCFactorization(
        fan_morphism(a, src, sigma0),
        fan_morphism(b, sigma0, prod),
        fan_morphism(c, prod, tgt),
        smooth,
        graph,
    )
