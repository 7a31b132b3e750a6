"""Seeded random fans and morphisms of rank <= 2 for property tests."""

from __future__ import annotations

import random
from math import atan2, gcd

from torstk.cones import common_refinement, cone_from_rays, fan_morphism, fan_validate
from torstk.lattice import LatticeMap


def random_rays(rng: random.Random, k: int, bound: int = 3) -> list[tuple[int, int]]:
    rays = set()
    while len(rays) < k:
        v = (rng.randint(-bound, bound), rng.randint(-bound, bound))
        if v != (0, 0) and gcd(*v) == 1:
            rays.add(v)
    return sorted(rays, key=lambda v: atan2(v[1], v[0]))


def random_fan2(rng: random.Random, complete: bool = False):
    """Consecutive rays in angular order span the 2-cones; some are dropped.

    Complete fans always include the coordinate rays so that no gap reaches pi.
    """
    rays = random_rays(rng, rng.randint(2, 5))
    if complete:
        rays = sorted(set(rays) | {(1, 0), (0, 1), (-1, 0), (0, -1)}, key=lambda v: atan2(v[1], v[0]))
    cones = []
    for i, a in enumerate(rays):
        b = rays[(i + 1) % len(rays)]
        if a[0] * b[1] - a[1] * b[0] > 0 and (complete or rng.random() < 0.7):
            cones.append([a, b])
        elif complete or rng.random() < 0.5:
            cones.append([a])
    return fan_validate(cones, 2)


def random_fan1(rng: random.Random):
    choice = rng.choice([[], [[(1,)]], [[(-1,)]], [[(1,)], [(-1,)]]])
    return fan_validate(choice, 1)


def random_fan(rng: random.Random, n: int, complete: bool = False):
    if n == 0:
        return fan_validate([], 0)
    if n == 1:
        return fan_validate([[(1,)], [(-1,)]], 1) if complete else random_fan1(rng)
    return random_fan2(rng, complete)


def random_map(rng: random.Random, n: int, m: int, bound: int = 2) -> LatticeMap:
    return LatticeMap(n, m, [[rng.randint(-bound, bound) for _ in range(n)] for _ in range(m)])


def random_morphism(rng: random.Random):
    """A fan morphism ``(f, Sigma, Sigma')`` with ``Sigma`` built so that the map
    is compatible: cut a random fan along the preimages of the target cones and
    randomly drop cones."""
    n = rng.randint(1, 2)
    m = rng.randint(0, 2)
    tgt = random_fan(rng, m)
    f = random_map(rng, n, m)
    pre = [c.region().preimage(f.matrix, n) for c in tgt.maximal_cones()]
    base = random_fan(rng, n, complete=True)
    full = common_refinement(pre, base)
    keep = [c for c in full.maximal_cones() if rng.random() < 0.75]
    if not keep:
        keep = [cone_from_rays(n, [])]
    return fan_morphism(f, fan_validate(keep, n), tgt)
