"""Curve classes, the cone they span, extremal-ray contractions, flips
and the flip tower with its exact pullback identity.

A curve class is stored as its exact pairing vector against the ordered
list of invariant prime divisors; principal relations hold automatically
because every pairing is computed from piecewise linear data.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from . import ddm
from .divisors import (
    BDivisor,
    CartierData,
    anticanonical,
    cartier_data,
    divisor_basis,
    divisor_coefficient,
    evaluate_pl,
    unit_divisor,
)
from .errors import (
    ColourInCone,
    IdentityViolated,
    InternalInvariantViolation,
    NonIntegralMultiple,
    NotExtremal,
    NotFlipping,
    NotInExceptionalImage,
    NotProjective,
    UnsupportedFlip,
)
from .fans import (
    Colour,
    ColouredCone,
    ColouredFan,
    ColouredLattice,
    Gen,
    Wall,
    star_subdivision,
    toric_lattice,
    validate_fan,
    walls,
)
from .linalg import (
    apply_matrix,
    coordinates_in,
    det,
    dot,
    is_zero,
    kernel_in_dim,
    primitive,
    quotient_matrix,
    saturation,
    scale_between,
    vadd,
    vscale,
    vsub,
)


@dataclass(frozen=True)
class CurveClass:
    """Intersection functional on the invariant divisors of a fan."""

    kind: str                      # "wall" or "colour"
    label: str
    pairing: tuple[Fraction, ...]  # aligned with divisor_basis(fan)
    basis: tuple[tuple, ...]
    wall: Optional[Wall] = None
    colour: Optional[str] = None
    cone_index: Optional[int] = None

    def pair(self, delta: BDivisor) -> Fraction:
        return sum((divisor_coefficient(delta, key) * p
                    for key, p in zip(self.basis, self.pairing)), Fraction(0))


@lru_cache(maxsize=256)
def _basis_cartier(fan: ColouredFan) -> tuple[tuple[tuple, BDivisor, CartierData], ...]:
    out = []
    for key in divisor_basis(fan):
        delta = unit_divisor(fan, key)
        out.append((key, delta, cartier_data(fan, delta)))
    return tuple(out)


def wall_curve_class(fan: ColouredFan, wall: Wall) -> CurveClass:
    """Pairing through the difference of linear data across the wall,
    divided exactly by the primitive wall functional."""
    basis = divisor_basis(fan)
    values = []
    for _key, _delta, data in _basis_cartier(fan):
        diff = vsub(data.on_cone(wall.plus), data.on_cone(wall.minus))
        if is_zero(diff):
            values.append(Fraction(0))
            continue
        q = scale_between(diff, wall.m)
        if q is None:
            raise NonIntegralMultiple(
                f"linear-data difference across wall {wall.generators} is not a multiple "
                "of the wall functional")
        values.append(Fraction(q))
    return CurveClass(kind="wall", label=f"wall{wall.generators}",
                      pairing=tuple(values), basis=basis, wall=wall)


def colour_curve_class(fan: ColouredFan, colour: str, cone_index: int) -> CurveClass:
    """Pairing a_colour minus the linear data of the chosen maximal cone
    evaluated at the colour point."""
    c = fan.maximal_cones[cone_index]
    if colour in c.colours:
        raise ColourInCone(f"{colour} is carried by cone {cone_index}")
    basis = divisor_basis(fan)
    u = fan.lattice.colour_point(colour)
    values = []
    for key, delta, data in _basis_cartier(fan):
        a = delta.colour(colour)
        if fan.rank:
            a = a - Fraction(dot(data.on_cone(cone_index), u))
        values.append(a)
    return CurveClass(kind="colour", label=f"colour({colour},{cone_index})",
                      pairing=tuple(values), basis=basis, colour=colour,
                      cone_index=cone_index)


@dataclass(frozen=True)
class ExtremalRay:
    vector: tuple[int, ...]        # primitive pairing direction
    generating_class: CurveClass
    k_negative: bool
    has_wall_class: bool
    has_colour_class: bool
    class_indices: tuple[int, ...]


@dataclass(frozen=True)
class MoriCone:
    fan: ColouredFan
    basis: tuple[tuple, ...]
    generators: tuple[CurveClass, ...]
    extremal_rays: tuple[ExtremalRay, ...]
    facet_normals: tuple

    def contains_vector(self, v: Sequence) -> bool:
        return all(dot(f, v) >= 0 for f in self.facet_normals)


@lru_cache(maxsize=256)
def mori_generators(fan: ColouredFan) -> MoriCone:
    """All wall and colour classes, plus the extremal rays of the cone
    they span, each tagged with a canonical generating class."""
    fan.require_complete()
    fan.require_qfactorial()
    basis = divisor_basis(fan)
    gens: list[CurveClass] = []
    for w in walls(fan):
        gens.append(wall_curve_class(fan, w))
    for i, c in enumerate(fan.maximal_cones):
        for colour in sorted(set(col.name for col in fan.lattice.colours) - c.colours):
            gens.append(colour_curve_class(fan, colour, i))
    vectors = []
    for g in gens:
        if all(x == 0 for x in g.pairing):
            raise InternalInvariantViolation(f"zero curve class {g.label}")
        vectors.append(primitive(g.pairing))
    body = ddm.analyze_generated_cone(vectors, len(basis))
    if body.lineality:
        raise NotProjective("curve classes span a cone containing a line")
    minus_k = anticanonical(fan)
    rays = []
    for ray in body.extreme_rays:
        on_ray = [i for i, v in enumerate(vectors)
                  if (s := scale_between(v, ray)) is not None and s > 0]
        wall_idx = [i for i in on_ray if gens[i].kind == "wall"]
        colour_idx = [i for i in on_ray if gens[i].kind == "colour"]
        if wall_idx:
            tag = gens[wall_idx[0]]
        else:
            tag = None
            for i in colour_idx:
                g = gens[i]
                u = fan.lattice.colour_point(g.colour)
                if g.colour in fan.colour_set:
                    continue
                if not is_zero(u) and not fan.maximal_cones[g.cone_index].contains(u):
                    continue
                tag = g
                break
            if tag is None:
                raise InternalInvariantViolation(
                    f"extremal ray {ray} has no admissible generating class")
        rays.append(ExtremalRay(
            vector=ray,
            generating_class=tag,
            k_negative=tag.pair(minus_k) > 0,
            has_wall_class=bool(wall_idx),
            has_colour_class=bool(colour_idx),
            class_indices=tuple(on_ray),
        ))
    return MoriCone(fan=fan, basis=basis, generators=tuple(gens),
                    extremal_rays=tuple(rays), facet_normals=body.facet_normals)


def _find_ray(cone_: MoriCone, ray: ExtremalRay) -> ExtremalRay:
    for r in cone_.extremal_rays:
        if r.vector == ray.vector:
            return r
    raise NotExtremal(f"{ray.vector} is not an extremal ray of this fan")


# -- toric relation helpers ----------------------------------------------------


def toric_shadow(fan: ColouredFan) -> ColouredFan:
    """Same cones, colours forgotten."""
    lat = toric_lattice(fan.rank)
    cones = tuple(ColouredCone(c.generators, frozenset()) for c in fan.maximal_cones)
    return ColouredFan(lat, cones)


def _toric_wall_vector(shadow: ColouredFan, w: Wall) -> dict[Gen, Fraction]:
    cls = wall_curve_class(shadow, w)
    out = {}
    for key, val in zip(cls.basis, cls.pairing):
        out[key[1]] = val
    return out


def _relation_for_ray(fan: ColouredFan, shadow: ColouredFan, tagged_wall: Wall
                      ) -> tuple[dict[Gen, Fraction], list[Wall]]:
    """Global toric pairing vector of the tagged wall class and the walls
    whose toric class is a positive multiple of it."""
    vec = _toric_wall_vector(shadow, tagged_wall)
    rays = shadow.rays
    base = tuple(vec[g] for g in rays)
    if is_zero(base):
        raise InternalInvariantViolation("tagged wall has zero toric class")
    merged = []
    for w in walls(shadow):
        other = _toric_wall_vector(shadow, w)
        s = scale_between(tuple(other[g] for g in rays), base)
        if s is not None and s > 0:
            merged.append(w)
    # sanity: the relation really is a relation among the rays
    total = tuple(sum(vec[g] * g[i] for g in rays) for i in range(fan.rank))
    if not is_zero(total):
        raise InternalInvariantViolation("toric pairing vector is not a ray relation")
    return vec, merged


@dataclass(frozen=True)
class ContractionResult:
    kind: str                     # "mori_fibre_space" | "divisorial" | "flipping"
    source: ColouredFan
    target: ColouredFan
    ray: ExtremalRay
    lattice_map: Optional[tuple]  # None means the identity on N
    curve_kind: str               # "wall" or "colour"
    relation: Optional[dict]      # wall case: ray -> coefficient
    merged_components: tuple      # wall case: tuple of tuples of cone indices
    removed_rays: tuple


def contract(fan: ColouredFan, ray: ExtremalRay) -> ContractionResult:
    """Contract an extremal ray, following the colour-class case analysis
    or the toric surgery for wall classes."""
    cone_ = mori_generators(fan)
    ray = _find_ray(cone_, ray)
    if ray.generating_class.kind == "colour":
        return _contract_colour(fan, ray)
    return _contract_wall(fan, ray)


def _contract_colour(fan: ColouredFan, ray: ExtremalRay) -> ContractionResult:
    colour = ray.generating_class.colour
    u = fan.lattice.colour_point(colour)
    if is_zero(u):
        new_colours = tuple(c for c in fan.lattice.colours if c.name != colour)
        new_lattice = ColouredLattice(fan.rank, fan.lattice.root_system, new_colours)
        target = fan.with_lattice(new_lattice)
        return ContractionResult(kind="mori_fibre_space", source=fan, target=target,
                                 ray=ray, lattice_map=None, curve_kind="colour",
                                 relation=None, merged_components=(), removed_rays=())
    target = fan.with_colour_set(set(fan.colour_set) | {colour})
    r = primitive(u)
    divisorial = r in fan.ray_colours and not fan.ray_colours[r]
    kind = "divisorial" if divisorial else "flipping"
    return ContractionResult(kind=kind, source=fan, target=target, ray=ray,
                             lattice_map=None, curve_kind="colour",
                             relation=None, merged_components=(), removed_rays=())


def _merge_components(shadow: ColouredFan, merged_walls: list[Wall]) -> list[tuple[int, ...]]:
    parent = {}

    def find(x):
        while parent.get(x, x) != x:
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    touched = set()
    for w in merged_walls:
        union(w.plus, w.minus)
        touched |= {w.plus, w.minus}
    comps: dict[int, list[int]] = {}
    for i in sorted(touched):
        comps.setdefault(find(i), []).append(i)
    return [tuple(v) for _, v in sorted(comps.items())]


def _contract_wall(fan: ColouredFan, ray: ExtremalRay) -> ContractionResult:
    shadow = toric_shadow(fan)
    tagged = ray.generating_class.wall
    relation, merged_walls = _relation_for_ray(fan, shadow, tagged)
    # the tagged toric class must itself be extremal in the toric shadow
    shadow_cone = mori_generators(shadow)
    base = tuple(relation[g] for g in shadow.rays)
    if not any((s := scale_between(primitive(base), r.vector)) is not None and s > 0
               for r in shadow_cone.extremal_rays):
        raise InternalInvariantViolation("wall class is not extremal in the toric shadow")
    components = _merge_components(shadow, merged_walls)
    negative = tuple(g for g in shadow.rays if relation[g] < 0)
    positive = tuple(g for g in shadow.rays if relation[g] > 0)
    if not negative:
        return _wall_mfs(fan, ray, relation, components, positive)
    if len(negative) == 1:
        return _wall_divisorial(fan, ray, relation, components, negative[0])
    return _wall_flipping(fan, ray, relation, components)


def _cone_volume(gens: Sequence[Gen]) -> Fraction:
    return abs(det(gens))


def _wall_mfs(fan: ColouredFan, ray: ExtremalRay, relation, components, positive
              ) -> ContractionResult:
    proj = quotient_matrix(positive, fan.rank)
    new_rank = len(proj[0]) if proj else 0
    in_component = {i for comp in components for i in comp}
    image_cones: set[tuple] = set()
    for comp in components:
        gens = set()
        for i in comp:
            gens |= set(fan.maximal_cones[i].generators)
        img = [apply_matrix(g, proj) for g in gens]
        img = [primitive(v) for v in img if not is_zero(v)]
        image_cones.add(tuple(sorted(set(img))))
    for i, c in enumerate(fan.maximal_cones):
        if i in in_component:
            continue
        img = [apply_matrix(g, proj) for g in c.generators]
        img = [primitive(v) for v in img if not is_zero(v)]
        image_cones.add(tuple(sorted(set(img))))
    dropped = {c.name for c in fan.lattice.colours
               if c.name in fan.colour_set and is_zero(apply_matrix(c.u, proj))}
    kept = tuple(Colour(c.name, c.node, apply_matrix(c.u, proj))
                 for c in fan.lattice.colours if c.name not in dropped)
    new_lattice = ColouredLattice(new_rank, fan.lattice.root_system, kept)
    cones = tuple(ColouredCone(g) for g in sorted(image_cones) if g or new_rank == 0)
    if new_rank == 0:
        cones = (ColouredCone((), frozenset()),)
    target = ColouredFan(new_lattice, cones).with_colour_set(
        (fan.colour_set - dropped) & {c.name for c in kept})
    diag = validate_fan(target)
    if not diag.ok:
        raise InternalInvariantViolation(
            f"fibration target fails validation: {diag.failed()[0].witness}")
    return ContractionResult(kind="mori_fibre_space", source=fan, target=target, ray=ray,
                             lattice_map=proj, curve_kind="wall", relation=relation,
                             merged_components=tuple(components), removed_rays=())


def _wall_divisorial(fan: ColouredFan, ray: ExtremalRay, relation, components, removed
                     ) -> ContractionResult:
    if fan.ray_colours.get(removed):
        raise InternalInvariantViolation(
            f"contracted ray {removed} carries a colour; extremal data inconsistent")
    in_component = {i for comp in components for i in comp}
    new_cones: list[tuple[Gen, ...]] = []
    for comp in components:
        gens: set[Gen] = set()
        for i in comp:
            gens |= set(fan.maximal_cones[i].generators)
        if removed not in gens:
            raise InternalInvariantViolation("removed ray missing from merged region")
        kept = tuple(sorted(gens - {removed}))
        if len(kept) != fan.rank or _cone_volume(kept) == 0:
            raise InternalInvariantViolation(
                f"merged region over {kept} is not a simplicial cone")
        target_cone = ColouredCone(kept)
        if not target_cone.contains(removed):
            raise InternalInvariantViolation(
                f"removed ray {removed} falls outside the merged cone over {kept}")
        new_cones.append(kept)
    for i, c in enumerate(fan.maximal_cones):
        if i not in in_component:
            new_cones.append(c.generators)
    target = ColouredFan(fan.lattice, tuple(ColouredCone(g) for g in sorted(set(new_cones))))
    target = target.with_colour_set(fan.colour_set)
    diag = validate_fan(target)
    if not diag.ok:
        raise InternalInvariantViolation(
            f"divisorial target fails validation: {diag.failed()[0].witness}")
    return ContractionResult(kind="divisorial", source=fan, target=target, ray=ray,
                             lattice_map=None, curve_kind="wall", relation=relation,
                             merged_components=tuple(components), removed_rays=(removed,))


def _wall_flipping(fan: ColouredFan, ray: ExtremalRay, relation, components
                   ) -> ContractionResult:
    in_component = {i for comp in components for i in comp}
    new_cones: list[ColouredCone] = []
    for comp in components:
        gens: set[Gen] = set()
        for i in comp:
            gens |= set(fan.maximal_cones[i].generators)
        new_cones.append(ColouredCone(tuple(sorted(gens))))
    for i, c in enumerate(fan.maximal_cones):
        if i not in in_component:
            new_cones.append(ColouredCone(c.generators))
    target = ColouredFan(fan.lattice, tuple(new_cones)).with_colour_set(fan.colour_set)
    return ContractionResult(kind="flipping", source=fan, target=target, ray=ray,
                             lattice_map=None, curve_kind="wall", relation=relation,
                             merged_components=tuple(components), removed_rays=())


# -- flips ---------------------------------------------------------------------


@dataclass(frozen=True)
class FlipData:
    fan_plus: ColouredFan
    u_star: tuple[int, ...]
    d: Fraction        # marked point of the contraction over the new primitive ray
    curve_kind: str
    contraction: ContractionResult


@lru_cache(maxsize=512)
def flip(fan: ColouredFan, ray: ExtremalRay) -> FlipData:
    """The other small resolution of a flipping contraction."""
    res = contract(fan, ray)
    if res.kind != "flipping":
        raise NotFlipping(f"contraction of {ray.vector} is {res.kind}")
    if res.curve_kind == "colour":
        colour = res.ray.generating_class.colour
        u = fan.lattice.colour_point(colour)
        u_star = primitive(u)
        d = Fraction(scale_between(u, u_star))
        r = primitive(u)
        if r in fan.ray_colours and fan.ray_colours[r]:
            other = sorted(fan.ray_colours[r])
            if len(other) != 1:
                raise InternalInvariantViolation("coloured ray with several colours")
            new_f = (set(fan.colour_set) | {colour}) - {other[0]}
        else:
            new_f = set(fan.colour_set) | {colour}
        fan_plus = star_subdivision(fan, u_star, colour_set=new_f)
        _require_qfactorial_result(fan_plus)
        return FlipData(fan_plus=fan_plus, u_star=u_star, d=d,
                        curve_kind="colour", contraction=res)
    # wall case: each merged region must be a single circuit pair
    if len(res.merged_components) != 1 or len(res.merged_components[0]) != 2:
        raise UnsupportedFlip(
            "flip implemented for a single merged pair of maximal cones; got "
            f"components {res.merged_components}")
    comp = res.merged_components[0]
    gens: set[Gen] = set()
    for i in comp:
        gens |= set(fan.maximal_cones[i].generators)
    gens = tuple(sorted(gens))
    if len(gens) != fan.rank + 1:
        raise UnsupportedFlip("merged region is not a circuit")
    relation = res.relation
    negative = [g for g in gens if relation[g] < 0]
    new_region = []
    for g in negative:
        conegens = tuple(sorted(set(gens) - {g}))
        if _cone_volume(conegens) == 0:
            raise InternalInvariantViolation(
                f"flip retriangulation produced a degenerate cone over {conegens}")
        new_region.append(conegens)
    new_cones = [ColouredCone(c) for c in new_region]
    for i, c in enumerate(fan.maximal_cones):
        if i not in comp:
            new_cones.append(ColouredCone(c.generators))
    fan_plus = ColouredFan(fan.lattice, tuple(new_cones))
    plus_rays = set()
    for c in fan_plus.maximal_cones:
        plus_rays |= set(c.generators)
    keep = {a for a in fan.colour_set
            if primitive(fan.lattice.colour_point(a)) in plus_rays}
    fan_plus = fan_plus.with_colour_set(keep)
    _require_qfactorial_result(fan_plus)
    # the identity of the flip tower holds at the pairing-weighted point
    # sum(p_i v_i, p_i > 0); d is its (rational) scale over the primitive
    # generator of the new ray, one in the classical unweighted case
    w = (0,) * fan.rank
    for g in gens:
        if relation[g] > 0:
            w = vadd(w, vscale(relation[g], g))
    u_star = primitive(w)
    d = Fraction(scale_between(w, u_star))
    return FlipData(fan_plus=fan_plus, u_star=u_star, d=d,
                    curve_kind="wall", contraction=res)


def _require_qfactorial_result(fan_plus: ColouredFan) -> None:
    diag = validate_fan(fan_plus)
    if not diag.ok or not diag.qfactorial:
        bad = diag.failed()
        witness = bad[0].witness if bad else "not Q-factorial"
        raise InternalInvariantViolation(f"flip output fails validation: {witness}")


# -- flip tower ----------------------------------------------------------------


@dataclass(frozen=True)
class FlipTower:
    star_fan: ColouredFan
    fan_plus: ColouredFan
    u_star: tuple[int, ...]
    d: Fraction
    exceptional_ray: tuple[int, ...]


@dataclass(frozen=True)
class PullbackReport:
    pullback_source: BDivisor      # on the star fan
    pullback_plus: BDivisor        # on the star fan
    curve_value: Fraction          # pairing of the divisor with the class
    d: Fraction
    lhs_coefficient: Fraction      # value of source pullback on the new ray
    rhs_coefficient: Fraction      # value of plus pullback on the new ray
    holds: bool

    def to_json_dict(self) -> dict:
        return {
            "curve_value": str(self.curve_value),
            "d": str(self.d),
            "phi_at_u_star": str(self.lhs_coefficient),
            "phi_plus_at_u_star": str(self.rhs_coefficient),
            "holds": self.holds,
        }


@lru_cache(maxsize=512)
def _flip_tower_geometry(fan: ColouredFan, ray: ExtremalRay
                         ) -> tuple[FlipData, ColouredFan]:
    data = flip(fan, ray)
    fan_plus, u_star = data.fan_plus, data.u_star
    if data.curve_kind == "colour":
        colour = data.contraction.ray.generating_class.colour
        star_colours = set(fan_plus.colour_set) - {colour}
        star_fan = star_subdivision(fan, u_star, colour_set=star_colours)
    else:
        star_fan = star_subdivision(fan, u_star, colour_set=fan_plus.colour_set)
        check = star_subdivision(fan_plus, u_star, colour_set=fan_plus.colour_set)
        if ({c.generators for c in check.maximal_cones}
                != {c.generators for c in star_fan.maximal_cones}):
            raise InternalInvariantViolation(
                "star subdivisions of the two sides disagree")
    if star_fan.ray_colours.get(u_star):
        raise InternalInvariantViolation("new ray of the tower must be non-coloured")
    return data, star_fan


def flip_tower(fan: ColouredFan, ray: ExtremalRay, delta: BDivisor
               ) -> tuple[FlipTower, PullbackReport]:
    """Common star subdivision dominating both sides of a flip, and the
    exact pullback comparison on it.

    The two pullbacks agree away from the new ray; on it they differ by
    the pairing of the divisor with the contracted class over d.  A
    failure raises IdentityViolated since the identity is a theorem.
    """
    data, star_fan = _flip_tower_geometry(fan, ray)
    fan_plus, u_star, d = data.fan_plus, data.u_star, data.d
    phi = cartier_data(fan, delta)
    delta_plus = _transport_divisor(fan_plus, delta)
    phi_plus = cartier_data(fan_plus, delta_plus)

    pull_src = _pullback_to(star_fan, phi, delta)
    pull_plus = _pullback_to(star_fan, phi_plus, delta_plus)

    curve_value = data.contraction.ray.generating_class.pair(delta)
    lhs = pull_src.ray(u_star)
    rhs = pull_plus.ray(u_star)
    holds = True
    if lhs - rhs != -curve_value / d:
        holds = False
    # away from the new ray both pullbacks must agree exactly
    for g, a in pull_src.ray_coeffs:
        if g != u_star and a != pull_plus.ray(g):
            holds = False
    for n, a in pull_src.colour_coeffs:
        if a != pull_plus.colour(n):
            holds = False
    report = PullbackReport(pullback_source=pull_src, pullback_plus=pull_plus,
                            curve_value=curve_value, d=d, lhs_coefficient=lhs,
                            rhs_coefficient=rhs, holds=holds)
    if not holds:
        raise IdentityViolated(
            f"flip-tower pullback identity failed: phi={lhs}, phi_plus={rhs}, "
            f"delta.C={curve_value}, d={d}")
    tower = FlipTower(star_fan=star_fan, fan_plus=fan_plus, u_star=u_star, d=d,
                      exceptional_ray=u_star)
    return tower, report


def _transport_divisor(target: ColouredFan, delta: BDivisor) -> BDivisor:
    """Reinterpret a coefficient map on a fan with the same rays (small
    modification): colour coefficients carry over, ray coefficients carry
    over on the rays that stay non-coloured."""
    rays = {}
    for g in target.non_coloured_rays:
        rays[g] = dict(delta.ray_coeffs).get(g)
        if rays[g] is None:
            raise InternalInvariantViolation(
                f"no source coefficient for ray {g} of the transported divisor")
    cols = {n: a for n, a in delta.colour_coeffs
            if n in {c.name for c in target.lattice.colours}}
    return BDivisor.build(target, rays=rays, colours=cols)


def _pullback_to(star_fan: ColouredFan, data: CartierData, delta: BDivisor) -> BDivisor:
    """Divisor on the star fan with the same piecewise linear function."""
    rays = {}
    for g in star_fan.non_coloured_rays:
        rays[g] = evaluate_pl(data, g)
    cols = {n: a for n, a in delta.colour_coeffs}
    return BDivisor.build(star_fan, rays=rays, colours=cols)


# -- fibres --------------------------------------------------------------------


@dataclass(frozen=True)
class FibreFan:
    fan: ColouredFan
    kind: str
    landing_colours: tuple[str, ...]


def fibre_fan(result: ContractionResult) -> FibreFan:
    """Fan of the positive-dimensional fibre of a contraction.

    Colour contractions give the point fan with the single contracted
    colour.  Wall contractions build the quotient of the span of the
    positive-relation rays by the span of the others; the fibre rays are
    the images of the positive rays and the fibre inherits the colours
    landing on them.
    """
    fan = result.source
    if result.curve_kind == "colour":
        colour = result.ray.generating_class.colour
        col = fan.lattice.colour_by_name[colour]
        lat = ColouredLattice(0, fan.lattice.root_system, (Colour(col.name, col.node, ()),))
        fibre = ColouredFan(lat, (ColouredCone((), frozenset()),))
        return FibreFan(fan=fibre, kind=result.kind, landing_colours=(colour,))
    if result.relation is None:
        raise NotInExceptionalImage("contraction carries no ray relation")
    relation = result.relation
    w = result.ray.generating_class.wall
    pool = set(fan.maximal_cones[w.plus].generators)
    pool |= set(fan.maximal_cones[w.minus].generators)
    ray_pool = sorted(pool)
    positive = [g for g in ray_pool if relation[g] > 0]
    others = [g for g in ray_pool if relation[g] <= 0]
    plus_basis = saturation(positive, fan.rank)
    coords = []
    for g in positive:
        c = coordinates_in(plus_basis, g)
        if c is None or any(x.denominator != 1 for x in c):
            raise InternalInvariantViolation("positive ray outside its saturated span")
        coords.append(tuple(int(x) for x in c))
    # span of the non-positive rays, expressed inside the positive span
    sub_rows = []
    if others:
        complement = kernel_in_dim(others, fan.rank)
        if complement:
            m_rows = [[Fraction(dot(b, y)) for b in plus_basis] for y in complement]
            sub = kernel_in_dim(m_rows, len(plus_basis))
        else:
            sub = [tuple(Fraction(int(i == j)) for j in range(len(plus_basis)))
                   for i in range(len(plus_basis))]
        sub_rows = [primitive(s) for s in sub if not is_zero(s)]
    proj = quotient_matrix(sub_rows, len(plus_basis))
    fibre_rank = len(proj[0]) if proj else 0
    images = {}
    for g, c in zip(positive, coords):
        img = apply_matrix(c, proj)
        if is_zero(img):
            raise InternalInvariantViolation("positive ray collapses in the fibre")
        images[g] = primitive(img)
    landing = []
    kept_colours = []
    for col in fan.lattice.colours:
        if col.name not in fan.colour_set:
            continue
        c = coordinates_in(plus_basis, col.u)
        if c is None:
            continue
        img = apply_matrix(c, proj)
        if is_zero(img):
            continue
        target_ray = primitive(img)
        if target_ray in set(images.values()):
            landing.append(col.name)
            kept_colours.append(Colour(col.name, col.node, img))
    lat = ColouredLattice(fibre_rank, fan.lattice.root_system, tuple(kept_colours))
    ray_list = sorted(set(images.values()))
    if fibre_rank == 0:
        cones = (ColouredCone((), frozenset()),)
    else:
        cones = tuple(ColouredCone(tuple(r for r in ray_list if r != skip))
                      for skip in ray_list)
    fibre = ColouredFan(lat, cones).with_colour_set(landing)
    diag = validate_fan(fibre)
    if not diag.ok:
        raise InternalInvariantViolation(
            f"fibre fan fails validation: {diag.failed()[0].witness}")
    return FibreFan(fan=fibre, kind=result.kind, landing_colours=tuple(sorted(landing)))
