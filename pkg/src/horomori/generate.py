"""Fixture fans and seeded instance generation for tests, experiments
and the acceptance corpus.

Random data is drawn from ``random.Random`` with explicit seeds, so the
corpus is reproducible byte for byte.  Flipping instances come from a
parametric circuit family (a quadrilateral cone pair closed off by a
bottom ray) pushed around by seeded unimodular changes of basis, plus
coloured variants; every instance is revalidated before it is emitted.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Optional

from .divisors import BDivisor, anticanonical, is_nef
from .errors import HoromoriError, UnsupportedFlip
from .fans import (
    Colour,
    ColouredCone,
    ColouredFan,
    ColouredLattice,
    cone,
    fan,
    toric_lattice,
    validate_fan,
)
from .linalg import apply_matrix, primitive
from .mori import ExtremalRay, contract, flip, mori_generators
from .rootsys import root_system


# -- named fixtures ------------------------------------------------------------


def plane_fan() -> ColouredFan:
    """The triangle fan: three rays, three cones, no colours."""
    return fan(toric_lattice(2), [cone([(1, 0), (0, 1)]),
                                  cone([(1, 0), (-1, -1)]),
                                  cone([(0, 1), (-1, -1)])])


def line_fan() -> ColouredFan:
    return fan(toric_lattice(1), [cone([(1,)]), cone([(-1,)])])


def product_fan() -> ColouredFan:
    """Product of two complete rank-one fans."""
    return fan(toric_lattice(2), [cone([(1, 0), (0, 1)]), cone([(0, 1), (-1, 0)]),
                                  cone([(-1, 0), (0, -1)]), cone([(0, -1), (1, 0)])])


def simplex_fan(n: int) -> ColouredFan:
    """The smooth simplex fan on n+1 rays."""
    rays = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    rays.append(tuple(-1 for _ in range(n)))
    cones = [cone(c) for c in itertools.combinations(rays, n)]
    return fan(toric_lattice(n), cones)


def weighted_p112_fan() -> ColouredFan:
    return fan(toric_lattice(2), [cone([(1, 0), (0, 1)]),
                                  cone([(0, 1), (-1, -2)]),
                                  cone([(1, 0), (-1, -2)])])


def rank1_coloured_fan() -> ColouredFan:
    """Rank one, one colour marked on the positive ray (flag factor a
    projective line)."""
    lat = ColouredLattice(1, root_system("A1"), (Colour("a", 1, (1,)),))
    return fan(lat, [cone([(1,)], ["a"]), cone([(-1,)])])


def rank1_colour_off_ray_fan() -> ColouredFan:
    """Rank one, the colour point sits on a non-coloured ray; contracting
    the colour class is divisorial."""
    lat = ColouredLattice(1, root_system("A1"), (Colour("a", 1, (1,)),))
    return fan(lat, [cone([(1,)]), cone([(-1,)])])


def rank1_colour_zero_fan() -> ColouredFan:
    """Rank one with a zero colour point; the colour class contracts to a
    fibration."""
    lat = ColouredLattice(1, root_system("A1"), (Colour("a", 1, (0,)),))
    return fan(lat, [cone([(1,)]), cone([(-1,)])])


def c2_mixed_rank1_fan() -> ColouredFan:
    """Rank one bound to the symplectic rank-two diagram at the long end
    node, where the flag deficit is positive."""
    lat = ColouredLattice(1, root_system("C2"), (Colour("b", 2, (1,)),))
    return fan(lat, [cone([(1,)], ["b"]), cone([(-1,)])])


def c0_two_fan() -> ColouredFan:
    """Rank two with the colour point twice the primitive generator of
    its ray, so the curve pairs to one half against the colour divisor."""
    lat = ColouredLattice(2, root_system("A1"), (Colour("a", 1, (2, 0)),))
    return fan(lat, [cone([(1, 0), (-2, 1)], ["a"]),
                     cone([(1, 0), (-2, -1)], ["a"]),
                     cone([(-2, 1), (-2, -1)])])


def flag_fan(diagram_label: str, node: int, name: str = "a") -> ColouredFan:
    """Rank-zero fan of a flag variety with one colour at the given node."""
    rs = root_system(diagram_label)
    lat = ColouredLattice(0, rs, (Colour(name, node, ()),))
    return ColouredFan(lat, (ColouredCone((), frozenset()),))


def colour_flip_interior_fan() -> ColouredFan:
    """Triangle fan with a colour point interior to a maximal cone; the
    colour class contraction is a flip through that point."""
    lat = ColouredLattice(2, root_system("A1"), (Colour("a", 1, (1, 1)),))
    return fan(lat, [cone([(1, 0), (0, 1)]), cone([(1, 0), (-1, -1)]),
                     cone([(0, 1), (-1, -1)])])


def colour_flip_swap_fan() -> ColouredFan:
    """Two colours over one ray: flipping the off-ray colour exchanges
    the colour carried by the ray and has scale two."""
    rs = root_system("A2")
    lat = ColouredLattice(2, rs, (Colour("a", 1, (2, 0)), Colour("b", 2, (1, 0))))
    return fan(lat, [cone([(1, 0), (0, 1)], ["b"]), cone([(1, 0), (0, -1)], ["b"]),
                     cone([(0, 1), (-1, 0)]), cone([(-1, 0), (0, -1)])])


def circuit_flip_fan(a: int = 1, b: int = 1, bottom: tuple[int, int, int] = (-1, -1, -1)
                     ) -> Optional[ColouredFan]:
    """Rank-three fan with the quadrilateral circuit v2 + v4 = a v1 + b v3
    split along the diagonal (v1, v3), closed off below by one ray.

    Returns None when the parameters do not produce a valid complete fan.
    """
    v1, v3, v2 = (1, 0, 0), (0, 1, 0), (0, 0, 1)
    v4 = (a, b, -1)
    w = bottom
    cones = [(v1, v2, v3), (v1, v3, v4),
             (v1, v2, w), (v2, v3, w), (v3, v4, w), (v1, v4, w)]
    try:
        f = fan(toric_lattice(3), [cone(c) for c in cones])
    except HoromoriError:
        return None
    diag = validate_fan(f)
    if not diag.ok:
        return None
    return f


def suspension_flip_fan() -> ColouredFan:
    f = circuit_flip_fan(1, 1)
    assert f is not None
    return f


def blowup_p3_point_fan() -> ColouredFan:
    e1, e2, e3 = (1, 0, 0), (0, 1, 0), (0, 0, 1)
    e0, exc = (-1, -1, -1), (1, 1, 1)
    return fan(toric_lattice(3), [cone(c) for c in [
        (e1, e2, exc), (e1, e3, exc), (e2, e3, exc),
        (e1, e2, e0), (e1, e3, e0), (e2, e3, e0)]])


def fixture_fans() -> dict[str, ColouredFan]:
    return {
        "plane": plane_fan(),
        "line": line_fan(),
        "product": product_fan(),
        "p3": simplex_fan(3),
        "weighted_p112": weighted_p112_fan(),
        "rank1_coloured": rank1_coloured_fan(),
        "rank1_colour_off_ray": rank1_colour_off_ray_fan(),
        "rank1_colour_zero": rank1_colour_zero_fan(),
        "c2_mixed_rank1": c2_mixed_rank1_fan(),
        "c0_two": c0_two_fan(),
        "flag_a2_end": flag_fan("A2", 1),
        "flag_c2_long": flag_fan("C2", 2),
        "flag_b3_end": flag_fan("B3", 3),
        "colour_flip_interior": colour_flip_interior_fan(),
        "colour_flip_swap": colour_flip_swap_fan(),
        "suspension_flip": suspension_flip_fan(),
        "blowup_p3_point": blowup_p3_point_fan(),
    }


# -- seeded generation ---------------------------------------------------------


def _random_unimodular(rng: random.Random, n: int, shears: int = 4) -> tuple:
    m = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(shears):
        i, j = rng.sample(range(n), 2)
        c = rng.choice([-2, -1, 1, 2])
        for k in range(n):
            m[k][j] += c * m[k][i]
    return tuple(tuple(row) for row in m)


def transform_fan(f: ColouredFan, m: tuple) -> ColouredFan:
    cones = [ColouredCone(tuple(apply_matrix(g, m) for g in c.generators), c.colours)
             for c in f.maximal_cones]
    cols = tuple(Colour(c.name, c.node, apply_matrix(c.u, m)) for c in f.lattice.colours)
    lat = ColouredLattice(f.lattice.rank, f.lattice.root_system, cols)
    return ColouredFan(lat, tuple(cones))


def random_subdivided_fan(seed: int, steps: int = 2, base: Optional[ColouredFan] = None
                          ) -> ColouredFan:
    """Iterated star subdivisions of the simplex fan at seeded points."""
    from .fans import star_subdivision

    rng = random.Random(seed)
    f = base if base is not None else simplex_fan(3)
    for _ in range(steps):
        c = rng.choice(f.maximal_cones)
        k = rng.choice([2, 2, 3])
        gens = rng.sample(list(c.generators), min(k, len(c.generators)))
        coeffs = [rng.choice([1, 1, 2]) for _ in gens]
        point = tuple(sum(cf * g[i] for cf, g in zip(coeffs, gens))
                      for i in range(f.rank))
        f = star_subdivision(f, primitive(point))
    return f


@dataclass(frozen=True)
class FlippingInstance:
    name: str
    fan: ColouredFan
    ray: ExtremalRay


def _flipping_rays(f: ColouredFan) -> list[ExtremalRay]:
    out = []
    try:
        mc = mori_generators(f)
    except HoromoriError:
        return out
    for r in mc.extremal_rays:
        try:
            res = contract(f, r)
        except HoromoriError:
            continue
        if res.kind != "flipping":
            continue
        try:
            flip(f, r)
        except (UnsupportedFlip, HoromoriError):
            continue
        out.append(r)
    return out


def flipping_instances(minimum: int = 50) -> list[FlippingInstance]:
    """Deterministic corpus of supported flipping contractions: the
    coloured fixtures, the circuit family, and unimodular images of it."""
    out: list[FlippingInstance] = []

    for name in ("colour_flip_interior", "colour_flip_swap", "suspension_flip"):
        f = fixture_fans()[name]
        for r in _flipping_rays(f):
            out.append(FlippingInstance(f"{name}/{r.vector}", f, r))

    params = [(a, b, (-1, -1, -c)) for a in (1, 2, 3) for b in (1, 2, 3) for c in (1, 2)]
    rng = random.Random(20240311)
    for a, b, bottom in params:
        f = circuit_flip_fan(a, b, bottom)
        if f is None:
            continue
        sides = [(f"circuit({a},{b},{bottom})", f)]
        rays0 = _flipping_rays(f)
        if rays0:
            # the flipped side carries the reverse (often K-negative) ray
            sides.append((f"circuit({a},{b},{bottom})+", flip(f, rays0[0]).fan_plus))
        for tag, base in sides:
            for r in _flipping_rays(base):
                out.append(FlippingInstance(f"{tag}/{r.vector}", base, r))
            for k in range(2):
                m = _random_unimodular(rng, 3)
                g = transform_fan(base, m)
                if not validate_fan(g).ok:
                    continue
                for r in _flipping_rays(g):
                    out.append(FlippingInstance(f"{tag}*u{k}/{r.vector}", g, r))
        if len(out) >= minimum + 10:
            break
    if len(out) < minimum:
        raise HoromoriError(f"flipping corpus too small: {len(out)} < {minimum}")
    return out


def corpus_fans() -> dict[str, ColouredFan]:
    """Fixture fans plus seeded subdivisions; every entry is validated."""
    out = dict(fixture_fans())
    for seed in (1, 2, 3, 5, 8, 13):
        f = random_subdivided_fan(seed, steps=2)
        if validate_fan(f).ok:
            out[f"subdivided_{seed}"] = f
    for i, inst in enumerate(flipping_instances(50)[:12]):
        out[f"flip_corpus_{i}"] = inst.fan
    dedup: dict[str, ColouredFan] = {}
    seen = set()
    for name, f in out.items():
        key = (f.lattice, f.maximal_cones)
        if key in seen:
            continue
        seen.add(key)
        dedup[name] = f
    return dedup


def nef_test_divisors(f: ColouredFan, count: int = 2) -> list[BDivisor]:
    """A few nef divisors on a fan: the zero divisor, the anticanonical
    divisor when it is nef, and nef unit divisors."""
    out = [BDivisor.build(f)]
    mk = anticanonical(f)
    if is_nef(f, mk):
        out.append(mk)
    from .divisors import divisor_basis, unit_divisor
    for key in divisor_basis(f):
        if len(out) >= count + 2:
            break
        d = unit_divisor(f, key)
        if is_nef(f, d):
            out.append(d)
    return out


def random_integral_divisor(f: ColouredFan, rng: random.Random, bound: int = 5) -> BDivisor:
    rays = {g: rng.randint(-bound, bound) for g in f.non_coloured_rays}
    cols = {c.name: rng.randint(-bound, bound) for c in f.lattice.colours}
    return BDivisor.build(f, rays=rays, colours=cols)
