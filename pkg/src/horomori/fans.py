"""Coloured lattices, coloured cones and fans.

A coloured fan is stored by its maximal coloured cones; faces and their
colour sets are derived.  Fans are immutable values: every operation
returns a new fan.  Generators are primitive integer tuples, cones and
rays are kept in lexicographic order, so equal fans compare equal and
all outputs are deterministic.

Only structural sanity is enforced at construction time; the full
invariant battery (face intersections, colour conditions, completeness,
simpliciality, Q-factoriality) lives in :func:`validate_fan`, which
reports diagnostics instead of raising.  Operations that need an
invariant call the ``require_*`` helpers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

from . import ddm
from .errors import (
    ConeNotInFan,
    FanError,
    NotComplete,
    NotQFactorial,
    NotSimplicial,
    PointOutsideSupport,
)
from .linalg import (
    apply_matrix,
    dot,
    is_zero,
    primitive,
    quotient_matrix,
    rank as mat_rank,
    scale_between,
    solve,
)
from .rootsys import ParabolicChoice, RootSystem, build_root_system, diagram, flag_dimension

Gen = tuple


@dataclass(frozen=True)
class Colour:
    """A universal colour: a name, the simple-root node it is bound to,
    and its lattice point (which may be zero or shared)."""

    name: str
    node: int
    u: tuple

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(int(x) for x in self.u))


@dataclass(frozen=True)
class ColouredLattice:
    """Lattice of rank n with the universal colour set bound injectively
    to simple-root nodes; the unbound nodes form the parabolic choice."""

    rank: int
    root_system: RootSystem
    colours: tuple[Colour, ...] = ()

    def __post_init__(self):
        cols = tuple(sorted(self.colours, key=lambda c: c.name))
        object.__setattr__(self, "colours", cols)
        names = [c.name for c in cols]
        if len(set(names)) != len(names):
            raise FanError("duplicate colour names")
        nodes = [c.node for c in cols]
        if len(set(nodes)) != len(nodes):
            raise FanError("colour-to-node binding must be injective")
        for c in cols:
            self.root_system._check_node(c.node)
            if len(c.u) != self.rank:
                raise FanError(f"colour {c.name}: point has wrong length")

    @cached_property
    def colour_by_name(self) -> dict[str, Colour]:
        return {c.name: c for c in self.colours}

    @cached_property
    def parabolic(self) -> ParabolicChoice:
        bound = {c.node for c in self.colours}
        return ParabolicChoice(frozenset(set(self.root_system.nodes) - bound))

    def colour_point(self, name: str) -> tuple:
        return self.colour_by_name[name].u


TORIC_ROOT_SYSTEM = build_root_system(diagram(()))


def toric_lattice(rank: int) -> ColouredLattice:
    return ColouredLattice(rank=rank, root_system=TORIC_ROOT_SYSTEM, colours=())


@dataclass(frozen=True)
class ColouredCone:
    """Finitely many primitive generators plus a set of colour names."""

    generators: tuple[Gen, ...]
    colours: frozenset[str] = frozenset()

    def __post_init__(self):
        gens = []
        for g in self.generators:
            g = tuple(int(x) for x in g)
            if is_zero(g):
                raise FanError("zero vector cannot generate a ray")
            gens.append(primitive(g))
        object.__setattr__(self, "generators", tuple(sorted(set(gens))))
        object.__setattr__(self, "colours", frozenset(self.colours))

    @property
    def dim_ambient(self) -> int:
        return len(self.generators[0]) if self.generators else 0

    @cached_property
    def dim(self) -> int:
        return mat_rank(self.generators)

    @cached_property
    def is_simplicial(self) -> bool:
        return len(self.generators) == self.dim

    def signature(self) -> tuple:
        return (self.generators, tuple(sorted(self.colours)))

    def contains(self, x: Sequence, ambient_dim: Optional[int] = None) -> bool:
        if not self.generators:
            return is_zero(x)
        if self.is_simplicial:
            coords = solve(list(zip(*self.generators)), x)
            return coords is not None and all(c >= 0 for c in coords)
        body = ddm.analyze_generated_cone(self.generators, self.dim_ambient)
        return body.contains(x)

    def faces(self) -> Iterable[tuple[Gen, ...]]:
        """Generator subsets; faces of a simplicial cone are exactly
        these.  Callers must hold a simplicial cone."""
        for size in range(len(self.generators) + 1):
            for subset in itertools.combinations(self.generators, size):
                yield subset


def cone(generators: Iterable[Sequence[int]], colours: Iterable[str] = ()) -> ColouredCone:
    return ColouredCone(tuple(tuple(g) for g in generators), frozenset(colours))


@dataclass(frozen=True)
class ColouredFan:
    """Immutable coloured fan given by maximal coloured cones."""

    lattice: ColouredLattice
    maximal_cones: tuple[ColouredCone, ...]

    def __post_init__(self):
        cones = tuple(sorted(self.maximal_cones, key=lambda c: c.signature()))
        object.__setattr__(self, "maximal_cones", cones)
        if not cones:
            raise FanError("a fan needs at least one maximal cone")
        declared = set(self.lattice.colour_by_name)
        for c in cones:
            for g in c.generators:
                if len(g) != self.lattice.rank:
                    raise FanError("generator length does not match lattice rank")
            undeclared = c.colours - declared
            if undeclared:
                raise FanError(f"undeclared colours {sorted(undeclared)}")

    # -- derived structure -------------------------------------------------

    @property
    def rank(self) -> int:
        return self.lattice.rank

    @cached_property
    def colour_set(self) -> frozenset[str]:
        out: set[str] = set()
        for c in self.maximal_cones:
            out |= c.colours
        return frozenset(out)

    @cached_property
    def ray_colours(self) -> dict[Gen, frozenset[str]]:
        """Colour set carried by each ray, by face inheritance."""
        out: dict[Gen, set[str]] = {}
        for c in self.maximal_cones:
            for g in c.generators:
                cols = set()
                for a in c.colours:
                    s = scale_between(self.lattice.colour_point(a), g)
                    if s is not None and s > 0:
                        cols.add(a)
                out.setdefault(g, set()).update(cols)
        return {g: frozenset(cs) for g, cs in out.items()}

    @cached_property
    def rays(self) -> tuple[Gen, ...]:
        return tuple(sorted(self.ray_colours))

    @cached_property
    def non_coloured_rays(self) -> tuple[Gen, ...]:
        return tuple(g for g in self.rays if not self.ray_colours[g])

    @cached_property
    def coloured_rays(self) -> tuple[Gen, ...]:
        return tuple(g for g in self.rays if self.ray_colours[g])

    @cached_property
    def faces(self) -> dict[tuple[Gen, ...], frozenset[str]]:
        """All faces of all maximal cones with inherited colour sets.

        Needs simplicial maximal cones; colour inheritance takes the
        union over the maximal cones containing a face (validate_fan
        checks they agree).
        """
        out: dict[tuple[Gen, ...], set[str]] = {}
        for c in self.maximal_cones:
            for gens in c.faces():
                cols = {a for a in c.colours
                        if _in_span_cone(self.lattice.colour_point(a), gens)}
                out.setdefault(gens, set()).update(cols)
        return {g: frozenset(cs) for g, cs in out.items()}

    @cached_property
    def is_simplicial(self) -> bool:
        return all(c.is_simplicial for c in self.maximal_cones)

    @cached_property
    def is_complete(self) -> bool:
        if self.rank == 0:
            return True
        if not self.is_simplicial:
            raise NotSimplicial("completeness test implemented for simplicial fans")
        if any(c.dim != self.rank for c in self.maximal_cones):
            return False
        counts: dict[tuple[Gen, ...], int] = {}
        for c in self.maximal_cones:
            for facet in itertools.combinations(c.generators, self.rank - 1):
                counts[facet] = counts.get(facet, 0) + 1
        return all(v == 2 for v in counts.values())

    @cached_property
    def is_qfactorial(self) -> bool:
        if not self.is_simplicial:
            return False
        seen: dict[Gen, str] = {}
        for a in sorted(self.colour_set):
            u = self.lattice.colour_point(a)
            if is_zero(u):
                return False
            r = primitive(u)
            if r not in self.ray_colours or self.ray_colours[r] != {a} or r in seen:
                return False
            seen[r] = a
        return True

    # -- requirements ------------------------------------------------------

    def require_simplicial(self) -> None:
        if not self.is_simplicial:
            raise NotSimplicial("operation needs a simplicial fan")

    def require_complete(self) -> None:
        if not self.is_complete:
            raise NotComplete("operation needs a complete fan")

    def require_qfactorial(self) -> None:
        self.require_simplicial()
        if not self.is_qfactorial:
            raise NotQFactorial("operation needs colours realized on their own rays")

    # -- geometry ----------------------------------------------------------

    def maximal_cone_containing(self, x: Sequence) -> Optional[int]:
        for i, c in enumerate(self.maximal_cones):
            if c.contains(x):
                return i
        return None

    def supports(self, x: Sequence) -> bool:
        return self.maximal_cone_containing(x) is not None

    def face_index(self, gens: Sequence[Sequence[int]]) -> tuple[Gen, ...]:
        sig = tuple(sorted(primitive(g) for g in gens)) if gens else ()
        if sig not in self.faces:
            raise ConeNotInFan(f"cone {sig} is not a face of the fan")
        return sig

    def with_colour_set(self, names: Iterable[str]) -> "ColouredFan":
        """Same underlying fan, per-cone colours recomputed from the
        given global colour set by membership of the colour points."""
        names = set(names)
        unknown = names - set(self.lattice.colour_by_name)
        if unknown:
            raise FanError(f"unknown colours {sorted(unknown)}")
        new_cones = []
        for c in self.maximal_cones:
            cols = {a for a in names
                    if not is_zero(self.lattice.colour_point(a))
                    and c.contains(self.lattice.colour_point(a))}
            new_cones.append(ColouredCone(c.generators, frozenset(cols)))
        return ColouredFan(self.lattice, tuple(new_cones))

    def with_lattice(self, lattice: ColouredLattice) -> "ColouredFan":
        kept = set(lattice.colour_by_name)
        cones = tuple(ColouredCone(c.generators, c.colours & kept) for c in self.maximal_cones)
        return ColouredFan(lattice, cones)


def _in_span_cone(x: Sequence, gens: tuple[Gen, ...]) -> bool:
    """Membership of x in the simplicial cone spanned by ``gens``."""
    if not gens:
        return is_zero(x)
    from .linalg import coordinates_in
    coords = coordinates_in(gens, x)
    return coords is not None and all(c >= 0 for c in coords)


def fan(lattice: ColouredLattice, cones: Iterable[ColouredCone]) -> ColouredFan:
    return ColouredFan(lattice, tuple(cones))


def dimension(f: ColouredFan) -> int:
    """Lattice rank plus the dimension of the bound flag factor."""
    return f.rank + flag_dimension(f.lattice.root_system, f.lattice.parabolic)


# -- validation --------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    witness: str = ""


@dataclass(frozen=True)
class FanDiagnostics:
    checks: tuple[CheckResult, ...]
    complete: bool
    simplicial: bool
    qfactorial: bool

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failed(self) -> tuple[CheckResult, ...]:
        return tuple(c for c in self.checks if not c.ok)

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "complete": self.complete,
            "simplicial": self.simplicial,
            "qfactorial": self.qfactorial,
            "checks": [
                {"name": c.name, "ok": c.ok, "witness": c.witness} for c in self.checks],
        }


def validate_fan(f: ColouredFan) -> FanDiagnostics:
    """Per-invariant diagnostics with witnesses; never raises."""
    checks: list[CheckResult] = []
    n = f.rank

    simplicial = f.is_simplicial
    witness = ""
    if not simplicial:
        bad = next(c for c in f.maximal_cones if not c.is_simplicial)
        witness = f"cone {bad.generators} has {len(bad.generators)} generators, dim {bad.dim}"
    checks.append(CheckResult("simplicial", simplicial, witness))

    # strict convexity
    ok, witness = True, ""
    for c in f.maximal_cones:
        if c.is_simplicial:
            continue
        body = ddm.analyze_generated_cone(c.generators, n)
        if body.lineality:
            ok, witness = False, f"cone {c.generators} contains the line {body.lineality[0]}"
            break
    checks.append(CheckResult("strictly_convex", ok, witness))

    # colour condition: u_a in the cone and nonzero, for carried colours
    ok, witness = True, ""
    for c in f.maximal_cones:
        for a in sorted(c.colours):
            u = f.lattice.colour_point(a)
            if is_zero(u):
                ok, witness = False, f"colour {a} carried with zero point"
                break
            if not c.contains(u):
                ok, witness = False, f"colour point of {a} outside cone {c.generators}"
                break
        if not ok:
            break
    checks.append(CheckResult("colour_points_in_cones", ok, witness))

    # pairwise intersections are common faces, with matching colours
    ok, witness = True, ""
    if simplicial:
        for (i, a), (j, b) in itertools.combinations(enumerate(f.maximal_cones), 2):
            rays, lin = ddm.cone_intersection_rays(a.generators, b.generators, n)
            if lin:
                ok, witness = False, f"cones {i} and {j} overlap in a line"
                break
            common = set(a.generators) & set(b.generators)
            if set(rays) != common or (rays and mat_rank(rays) != len(rays)):
                ok, witness = (False,
                               f"cones {i} {a.generators} and {j} {b.generators} do not meet in a common face")
                break
            cols_a = {x for x in a.colours if _in_span_cone(f.lattice.colour_point(x), tuple(sorted(common)))}
            cols_b = {x for x in b.colours if _in_span_cone(f.lattice.colour_point(x), tuple(sorted(common)))}
            if cols_a != cols_b:
                ok, witness = (False,
                               f"face colours disagree between cones {i} and {j}: {sorted(cols_a)} vs {sorted(cols_b)}")
                break
    checks.append(CheckResult("intersections_are_faces", ok, witness))

    complete = False
    try:
        complete = f.is_complete
    except NotSimplicial:
        pass
    checks.append(CheckResult("complete", complete,
                              "" if complete else "support is not the whole space"))

    qfact = f.is_qfactorial
    witness = ""
    if not qfact and simplicial:
        for a in sorted(f.colour_set):
            u = f.lattice.colour_point(a)
            if is_zero(u):
                witness = f"colour {a} in a cone with zero point"
                break
            r = primitive(u)
            if r not in f.ray_colours:
                witness = f"colour point of {a} is not on a ray"
                break
            if f.ray_colours[r] != {a}:
                witness = f"ray {r} carries {sorted(f.ray_colours[r])}, not exactly {{{a}}}"
                break
    checks.append(CheckResult("qfactorial", qfact, witness))

    return FanDiagnostics(checks=tuple(checks), complete=complete,
                          simplicial=simplicial, qfactorial=qfact)


# -- walls -------------------------------------------------------------------


@dataclass(frozen=True)
class Wall:
    """Codimension-one cone between two maximal cones, with the primitive
    functional vanishing on it and positive on the ``plus`` side."""

    generators: tuple[Gen, ...]
    plus: int
    minus: int
    m: tuple

    def signature(self) -> tuple:
        return self.generators


def walls(f: ColouredFan) -> list[Wall]:
    """All walls of a complete simplicial fan, in canonical order."""
    f.require_simplicial()
    if f.rank == 0:
        return []
    incidence: dict[tuple[Gen, ...], list[int]] = {}
    for i, c in enumerate(f.maximal_cones):
        if c.dim != f.rank:
            raise NotComplete("maximal cones must be full-dimensional")
        for facet in itertools.combinations(c.generators, f.rank - 1):
            incidence.setdefault(tuple(sorted(facet)), []).append(i)
    out = []
    for facet in sorted(incidence):
        sides = incidence[facet]
        if len(sides) != 2:
            raise NotComplete(f"facet {facet} borders {len(sides)} maximal cones")
        i, j = sides
        m = _wall_functional(f, facet, i)
        out.append(Wall(generators=facet, plus=i, minus=j, m=m))
    return out


def _wall_functional(f: ColouredFan, facet: tuple[Gen, ...], plus_index: int) -> tuple:
    from .linalg import kernel_in_dim
    kern = kernel_in_dim(facet, f.rank)
    if len(kern) != 1:
        raise FanError(f"facet {facet} does not have codimension one")
    m = primitive(kern[0])
    plus_cone = f.maximal_cones[plus_index]
    outer = next(g for g in plus_cone.generators if g not in facet)
    val = dot(m, outer)
    if val == 0:
        raise FanError("wall functional vanishes on the plus side")
    return m if val > 0 else tuple(-x for x in m)


# -- star subdivision --------------------------------------------------------


def star_subdivision(f: ColouredFan, point: Sequence[int],
                     colour_set: Optional[Iterable[str]] = None) -> ColouredFan:
    """Star subdivide through a lattice point in the support.

    Cones not containing the point survive; each cone containing it is
    replaced by the joins of the new ray with its facets missing the
    point.  ``colour_set`` fixes the global colour set of the result
    (default: keep the current one); per-cone colours are recomputed by
    membership.
    """
    f.require_simplicial()
    u = primitive(point)
    if not f.supports(u):
        raise PointOutsideSupport(f"{tuple(point)} is outside the fan support")
    new_cones: list[tuple[Gen, ...]] = []
    for c in f.maximal_cones:
        if not c.contains(u):
            new_cones.append(c.generators)
            continue
        for facet in itertools.combinations(c.generators, len(c.generators) - 1):
            if not _in_span_cone(u, tuple(sorted(facet))):
                new_cones.append(tuple(sorted(set(facet) | {u})))
    names = f.colour_set if colour_set is None else set(colour_set)
    result = ColouredFan(f.lattice, tuple(ColouredCone(g) for g in sorted(set(new_cones))))
    return result.with_colour_set(names)


# -- orbit closures ----------------------------------------------------------


@dataclass(frozen=True)
class OrbitClosure:
    """Quotient fan of the star of a cone, with divisor bookkeeping."""

    fan: ColouredFan
    projection: tuple            # rank x rank' matrix, rows act on the right
    tau: tuple[Gen, ...]
    dropped_colours: frozenset[str]
    ray_images: Mapping[Gen, Gen]          # star ray -> primitive image ray
    ray_scales: Mapping[Gen, Fraction]     # d_j with image of w_j = d_j * w'_j


def orbit_closure_fan(f: ColouredFan, tau: Sequence[Sequence[int]]) -> OrbitClosure:
    """Fan of the orbit closure attached to a nonzero cone of the fan.

    The new lattice is the quotient by the span of the cone; rays come
    from the star outside the cone, colours of the cone are removed from
    the universal set, and each surviving ray records the positive scale
    relating its marked point upstairs to the one downstairs.
    """
    f.require_simplicial()
    sig = f.face_index(tau)
    if not sig:
        raise ConeNotInFan("the zero cone has no proper orbit closure")
    tau_colours = f.faces[sig]
    proj = quotient_matrix(sig, f.rank)
    new_rank = len(proj[0]) if proj else 0

    kept_colours = []
    for c in f.lattice.colours:
        if c.name in tau_colours:
            continue
        kept_colours.append(Colour(c.name, c.node, apply_matrix(c.u, proj)))
    new_lattice = ColouredLattice(rank=new_rank, root_system=f.lattice.root_system,
                                  colours=tuple(kept_colours))

    star = [c for c in f.maximal_cones if set(sig) <= set(c.generators)]
    if not star:
        raise ConeNotInFan("cone is not a face of any maximal cone")
    ray_images: dict[Gen, Gen] = {}
    ray_scales: dict[Gen, Fraction] = {}
    new_cones = []
    for c in star:
        img_gens = []
        for g in c.generators:
            if g in sig:
                continue
            img = apply_matrix(g, proj)
            if is_zero(img):
                raise FanError(f"star ray {g} collapses in the quotient")
            img_gens.append(primitive(img))
            ray_images[g] = primitive(img)
            if f.ray_colours.get(g, frozenset()) - tau_colours:
                # coloured ray: the marked point downstairs is the image
                # of the one upstairs, so the scale is one
                ray_scales[g] = Fraction(1)
            else:
                ray_scales[g] = Fraction(scale_between(img, primitive(img)))
        new_cones.append(ColouredCone(tuple(img_gens), frozenset(c.colours - tau_colours)))
    new_fan = ColouredFan(new_lattice, tuple(sorted(set(new_cones), key=lambda c: c.signature())))
    return OrbitClosure(fan=new_fan, projection=proj, tau=sig,
                        dropped_colours=frozenset(tau_colours),
                        ray_images=ray_images, ray_scales=ray_scales)
