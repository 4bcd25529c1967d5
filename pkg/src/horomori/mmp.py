"""Nef-threshold reduction loop, the rank-one classification with its
curve constructions, and the end-to-end curve certificate.

Orbits are tracked at cone granularity: every construction acts through
group translates, so a point is remembered only through the cone of the
orbit containing it.  An orbit falls in the exceptional locus of a step
exactly when its cone contains a face whose data (generators or colour
set) the step's fan surgery alters; fibrations mark every orbit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .divisors import (
    BDivisor,
    anticanonical,
    cartier_data,
    divisor_basis,
    is_nef,
    picard_rank,
)
from .errors import (
    InternalInvariantViolation,
    MinimalModelReached,
    NoKNegativeRay,
    NoRelation,
    NotNef,
    NotPicardOne,
    NotTerminalFlagged,
)
from .fans import ColouredFan, Gen, dimension, orbit_closure_fan
from .linalg import det, kernel_in_dim, primitive, scale_between
from .mori import (
    ContractionResult,
    ExtremalRay,
    FibreFan,
    contract,
    fibre_fan,
    flip,
    mori_generators,
)
from .rootsys import (
    ParabolicChoice,
    b_coefficients,
    flag_dimension,
    omega,
)


@dataclass(frozen=True)
class OrbitMarker:
    """The cone of the tracked orbit, as a face signature of the current
    fan (empty tuple is the dense orbit)."""

    generators: tuple[Gen, ...]

    @staticmethod
    def of(fan: ColouredFan, gens: Sequence[Sequence[int]]) -> "OrbitMarker":
        return OrbitMarker(fan.face_index(gens))

    @staticmethod
    def dense() -> "OrbitMarker":
        return OrbitMarker(())


def nef_threshold(fan: ColouredFan, delta: BDivisor) -> tuple[Fraction, ExtremalRay]:
    """Largest a with delta + a*K nef, as the minimum of the pairing
    ratios over the K-negative extremal rays, plus an achieving ray."""
    if not is_nef(fan, delta):
        raise NotNef("threshold input must be nef")
    cone = mori_generators(fan)
    knegative = [r for r in cone.extremal_rays if r.k_negative]
    if not knegative:
        raise NoKNegativeRay("no K-negative extremal ray; minimal model reached")
    minus_k = anticanonical(fan)
    best: Optional[tuple[Fraction, ExtremalRay]] = None
    for ray in sorted(knegative, key=lambda r: r.vector):
        g = ray.generating_class
        ratio = g.pair(delta) / g.pair(minus_k)
        if best is None or ratio < best[0]:
            best = (ratio, ray)
    return best


@dataclass(frozen=True)
class MMPStep:
    index: int
    fan: ColouredFan
    divisor: BDivisor
    threshold: Fraction
    ray: ExtremalRay
    kind: str
    orbit: OrbitMarker
    perp_value: Fraction          # pairing of the adjusted divisor with the ray


@dataclass(frozen=True)
class MMPTrace:
    steps: tuple[MMPStep, ...]
    status: str                   # OrbitInExceptional | MinimalReached | IterationCap
    final_fan: ColouredFan
    final_divisor: BDivisor
    final_orbit: OrbitMarker
    terminal_contraction: Optional[ContractionResult]
    terminal_ray: Optional[ExtremalRay]


def _altered_faces(old: ColouredFan, new: ColouredFan) -> set[tuple]:
    old_faces = {(g, tuple(sorted(c))) for g, c in old.faces.items()}
    new_faces = {(g, tuple(sorted(c))) for g, c in new.faces.items()}
    return {sig for sig in old_faces if sig not in new_faces}


def _orbit_hit(orbit: OrbitMarker, altered: set[tuple]) -> bool:
    ogens = set(orbit.generators)
    return any(set(gens) <= ogens for gens, _cols in altered)


def _pushforward(fan_new: ColouredFan, delta: BDivisor) -> BDivisor:
    rays = {}
    old_rays = dict(delta.ray_coeffs)
    for g in fan_new.non_coloured_rays:
        if g not in old_rays:
            raise InternalInvariantViolation(
                f"pushforward target has a non-coloured ray {g} with no source coefficient")
        rays[g] = old_rays[g]
    names = {c.name for c in fan_new.lattice.colours}
    cols = {n: a for n, a in delta.colour_coeffs if n in names}
    return BDivisor.build(fan_new, rays=rays, colours=cols)


def run_reduction(fan: ColouredFan, delta: BDivisor, orbit: OrbitMarker,
                  *, terminal: bool, cap: int = 1000) -> MMPTrace:
    """Iterate threshold, contraction and transport until the tracked
    orbit meets the exceptional locus or no K-negative ray remains."""
    if not terminal:
        raise NotTerminalFlagged("reduction requires the terminal input flag")
    fan.require_qfactorial()
    fan.face_index(orbit.generators)
    steps: list[MMPStep] = []
    current_fan, current_div, current_orbit = fan, delta, orbit
    for index in range(cap):
        try:
            a, ray = nef_threshold(current_fan, current_div)
        except NoKNegativeRay:
            return MMPTrace(steps=tuple(steps), status="MinimalReached",
                            final_fan=current_fan, final_divisor=current_div,
                            final_orbit=current_orbit, terminal_contraction=None,
                            terminal_ray=None)
        adjusted = current_div.add(anticanonical(current_fan).neg().scale(a))
        perp = ray.generating_class.pair(adjusted)
        if perp != 0:
            raise InternalInvariantViolation(
                f"adjusted divisor pairs to {perp} with the contracted ray")
        if not is_nef(current_fan, adjusted):
            raise NotNef("adjusted divisor lost nefness; internal bug")
        res = contract(current_fan, ray)
        steps.append(MMPStep(index=index, fan=current_fan, divisor=current_div,
                             threshold=a, ray=ray, kind=res.kind, orbit=current_orbit,
                             perp_value=perp))
        if res.kind == "mori_fibre_space":
            return MMPTrace(steps=tuple(steps), status="OrbitInExceptional",
                            final_fan=current_fan, final_divisor=adjusted,
                            final_orbit=current_orbit, terminal_contraction=res,
                            terminal_ray=ray)
        if res.kind == "divisorial":
            next_fan = res.target
        else:
            next_fan = flip(current_fan, ray).fan_plus
        altered = _altered_faces(current_fan, next_fan)
        if _orbit_hit(current_orbit, altered):
            return MMPTrace(steps=tuple(steps), status="OrbitInExceptional",
                            final_fan=current_fan, final_divisor=adjusted,
                            final_orbit=current_orbit, terminal_contraction=res,
                            terminal_ray=ray)
        next_div = _pushforward(next_fan, adjusted)
        cartier_data(next_fan, next_div)
        if not is_nef(next_fan, next_div):
            raise NotNef("pushforward lost nefness; internal bug")
        next_orbit = OrbitMarker.of(next_fan, current_orbit.generators)
        current_fan, current_div, current_orbit = next_fan, next_div, next_orbit
    return MMPTrace(steps=tuple(steps), status="IterationCap",
                    final_fan=current_fan, final_divisor=current_div,
                    final_orbit=current_orbit, terminal_contraction=None,
                    terminal_ray=None)


# -- rank-one classification and curves ---------------------------------------


def picard1_classify(fan: ColouredFan) -> str:
    """"FlagOneColour" for the point fan with a single colour, otherwise
    "PositiveRankFull" with all colours realized and rank+1 rays."""
    if picard_rank(fan) != 1:
        raise NotPicardOne("classification needs rank one")
    names = {c.name for c in fan.lattice.colours}
    if fan.rank == 0:
        if len(names) == 1 and not fan.colour_set:
            return "FlagOneColour"
        raise NotPicardOne("rank-zero case must have exactly one colour")
    if fan.colour_set == names and len(fan.rays) == fan.rank + 1:
        return "PositiveRankFull"
    raise NotPicardOne("rank-positive case must realize all colours on rank+1 rays")


@dataclass(frozen=True)
class Claim:
    name: str
    lhs: Fraction
    rhs: Fraction
    op: str

    @property
    def ok(self) -> bool:
        if self.op == "<=":
            return self.lhs <= self.rhs
        if self.op == "==":
            return self.lhs == self.rhs
        raise ValueError(self.op)

    def to_json_dict(self) -> dict:
        return {"name": self.name, "lhs": str(self.lhs), "op": self.op,
                "rhs": str(self.rhs), "ok": self.ok}


@dataclass(frozen=True)
class CurveCertificate:
    """Curve class on a rank-one variety with its exact pairings and the
    degree bounds it certifies."""

    fan: ColouredFan
    case: str
    pairings: tuple[tuple[tuple, Fraction], ...]   # divisor key -> value
    minus_k_dot_c: Fraction
    dim_w: int
    strengthened: bool
    claims: tuple[Claim, ...]
    provenance: tuple[tuple[str, str], ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.claims)

    def pairing_of(self, key: tuple) -> Fraction:
        return dict(self.pairings)[key]

    def to_json_dict(self) -> dict:
        return {
            "case": self.case,
            "pairings": [[list(map(str, k)) if isinstance(k, tuple) else k, str(v)]
                         for k, v in self.pairings],
            "minus_k_dot_c": str(self.minus_k_dot_c),
            "dim": self.dim_w,
            "strengthened": self.strengthened,
            "claims": [c.to_json_dict() for c in self.claims],
            "provenance": [list(p) for p in self.provenance],
        }


def flag_curve(fan: ColouredFan) -> CurveCertificate:
    """Dual curve on a one-colour flag variety: unit pairing against the
    colour divisor, degree the anticanonical colour coefficient."""
    case = picard1_classify(fan)
    if case != "FlagOneColour":
        raise NotPicardOne("flag curve needs the rank-zero one-colour case")
    colour = fan.lattice.colours[0]
    rs, I = fan.lattice.root_system, fan.lattice.parabolic
    b = b_coefficients(rs, I)[colour.node]
    dim_w = flag_dimension(rs, I)
    w = omega(rs, I)
    strengthened = w > 0
    claims = [Claim("colour pairing", Fraction(1), Fraction(1), "=="),
              Claim("-K.C <= dim+1", Fraction(b), Fraction(dim_w + 1), "<=")]
    if strengthened:
        claims.append(Claim("-K.C <= dim", Fraction(b), Fraction(dim_w), "<="))
    cert = CurveCertificate(
        fan=fan, case=case,
        pairings=((("colour", colour.name), Fraction(1)),),
        minus_k_dot_c=Fraction(b), dim_w=dim_w, strengthened=strengthened,
        claims=tuple(claims),
        provenance=(("construction", "dual curve"), ("colour", colour.name)),
    )
    if not cert.ok:
        raise InternalInvariantViolation("flag curve certificate failed its claims")
    return cert


def _marked_points(fan: ColouredFan) -> tuple[list[Gen], list[tuple], list[Fraction]]:
    """Rays with their marked vectors: the colour point on coloured rays,
    the primitive generator otherwise, plus the positive ray multiples."""
    ws, cs = [], []
    rays = list(fan.rays)
    for g in rays:
        cols = fan.ray_colours[g]
        if cols:
            (a,) = tuple(sorted(cols))
            u = fan.lattice.colour_point(a)
            ws.append(u)
            cs.append(Fraction(scale_between(u, g)))
        else:
            ws.append(g)
            cs.append(Fraction(1))
    return rays, ws, cs


def _positive_relation(ws: Sequence[tuple]) -> tuple[int, ...]:
    """The coprime positive integer relation among the marked vectors."""
    kern = kernel_in_dim(list(zip(*ws)), len(ws))
    if len(kern) != 1:
        raise NoRelation(f"expected a unique relation, kernel rank {len(kern)}")
    rel = primitive(kern[0])
    if all(x < 0 for x in rel):
        rel = tuple(-x for x in rel)
    if not all(x > 0 for x in rel):
        raise NoRelation("ray relation is not strictly positive; fan cannot be complete")
    return rel


def _ray_divisor_key(fan: ColouredFan, g: Gen) -> tuple:
    cols = fan.ray_colours[g]
    if cols:
        (a,) = tuple(sorted(cols))
        return ("colour", a)
    return ("ray", g)


def picard1_curve(fan: ColouredFan, orbit: OrbitMarker) -> CurveCertificate:
    """One-parameter-subgroup curve through the tracked orbit on a
    rank-one variety with all colours realized.

    The base case follows the maximal-coefficient ray; deeper orbits
    recurse through the orbit closure along one of their rays and lift
    pairings back through the recorded ray scales.
    """
    case = picard1_classify(fan)
    if case != "PositiveRankFull":
        raise NotPicardOne("curve construction needs the positive-rank case")
    fan.face_index(orbit.generators)
    rays, ws, cs = _marked_points(fan)
    rel = _positive_relation(ws)
    a_by_ray = dict(zip(rays, rel))
    c_by_ray = dict(zip(rays, cs))
    # canonical tie break: first ray in lexicographic order among maxima
    maxima = [g for g in sorted(rays) if a_by_ray[g] == max(rel)]
    a0_ray = maxima[0]

    base = orbit.generators in ((), (a0_ray,)) or fan.rank == 1
    provenance: list[tuple[str, str]] = [("relation", str(tuple(rel))),
                                         ("pivot_ray", str(a0_ray))]
    if base:
        t = Fraction(1, a_by_ray[a0_ray] * c_by_ray[a0_ray])
        values = {g: t * a_by_ray[g] for g in rays}
        provenance.append(("construction", "one-parameter subgroup"))
    else:
        j_ray = next(g for g in sorted(set(orbit.generators)) if g != a0_ray)
        closure = orbit_closure_fan(fan, [j_ray])
        inner_orbit_gens = tuple(sorted(
            closure.ray_images[g] for g in orbit.generators if g != j_ray))
        inner = picard1_curve(closure.fan, OrbitMarker.of(closure.fan, inner_orbit_gens))
        values = {}
        t = None
        for g in rays:
            if g == j_ray:
                continue
            img = closure.ray_images[g]
            key = _ray_divisor_key(closure.fan, img)
            val = inner.pairing_of(key) / closure.ray_scales[g]
            values[g] = val
            t_g = val / a_by_ray[g]
            if t is None:
                t = t_g
            elif t != t_g:
                raise InternalInvariantViolation(
                    "lifted pairings are not proportional to the ray relation")
        values[j_ray] = t * a_by_ray[j_ray]
        provenance.append(("recursed_through", str(j_ray)))
        provenance.extend(inner.provenance)

    pairings = []
    minus_k = Fraction(0)
    bs = b_coefficients(fan.lattice.root_system, fan.lattice.parabolic)
    claims = []
    for g in rays:
        key = _ray_divisor_key(fan, g)
        val = values[g]
        pairings.append((key, val))
        claims.append(Claim(f"D{key}.C <= 1", val, Fraction(1), "<="))
        coeff = Fraction(1) if key[0] == "ray" else Fraction(
            bs[fan.lattice.colour_by_name[key[1]].node])
        minus_k += coeff * val
    dim_w = dimension(fan)
    w = omega(fan.lattice.root_system, fan.lattice.parabolic)
    strengthened = w > 0
    claims.append(Claim("-K.C <= dim+1", minus_k, Fraction(dim_w + 1), "<="))
    if strengthened:
        claims.append(Claim("-K.C <= dim", minus_k, Fraction(dim_w), "<="))
    cert = CurveCertificate(fan=fan, case=case, pairings=tuple(pairings),
                            minus_k_dot_c=minus_k, dim_w=dim_w,
                            strengthened=strengthened, claims=tuple(claims),
                            provenance=tuple(provenance))
    if not cert.ok:
        raise InternalInvariantViolation("rank-one curve certificate failed its claims")
    return cert


def is_projective_space(fan: ColouredFan) -> bool:
    """Conservative recognition: the smooth simplex fan in the toric
    case, the zero-deficit one-colour flag in the rank-zero case, never
    in the mixed case."""
    names = {c.name for c in fan.lattice.colours}
    if fan.rank == 0:
        return len(names) == 1 and omega(fan.lattice.root_system, fan.lattice.parabolic) == 0
    if names:
        return False
    if len(fan.rays) != fan.rank + 1 or not fan.is_complete:
        return False
    if any(abs(det(c.generators)) != 1 for c in fan.maximal_cones):
        return False
    rel = _positive_relation(list(fan.rays))
    return all(x == 1 for x in rel)


@dataclass(frozen=True)
class ApproximationCertificate:
    trace: MMPTrace
    fibre: FibreFan
    curve: CurveCertificate
    dim_x: int
    minus_k_x_bound: Fraction
    strengthened_on_x: bool
    x_is_projective_space: bool
    claims: tuple[Claim, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.claims)


def find_approximation_curve(fan: ColouredFan, delta: BDivisor, orbit: OrbitMarker,
                             *, terminal: bool, cap: int = 1000
                             ) -> ApproximationCertificate:
    """Run the reduction, build the terminal fibre, construct its curve
    and chain the degree bounds back to the terminal variety."""
    trace = run_reduction(fan, delta, orbit, terminal=terminal, cap=cap)
    if trace.status == "MinimalReached":
        raise MinimalModelReached("no K-negative ray; certificate not applicable")
    if trace.status != "OrbitInExceptional":
        raise InternalInvariantViolation(f"reduction ended with {trace.status}")
    res = trace.terminal_contraction
    fibre = fibre_fan(res)
    if fibre.fan.rank == 0:
        curve = flag_curve(fibre.fan)
    else:
        curve = picard1_curve(fibre.fan, OrbitMarker.dense())
    terminal_fan = trace.final_fan
    dim_x = dimension(terminal_fan)
    dim_f = curve.dim_w
    pn = is_projective_space(terminal_fan)
    strengthened_on_x = (not pn) and (curve.strengthened or dim_f < dim_x)
    claims = [Claim("dim F <= dim X", Fraction(dim_f), Fraction(dim_x), "<="),
              Claim("-K_F.C <= dim F + 1", curve.minus_k_dot_c, Fraction(dim_f + 1), "<="),
              Claim("-K_X.C <= dim X + 1", curve.minus_k_dot_c, Fraction(dim_x + 1), "<=")]
    if strengthened_on_x:
        claims.append(Claim("-K_X.C <= dim X", curve.minus_k_dot_c, Fraction(dim_x), "<="))
    cert = ApproximationCertificate(
        trace=trace, fibre=fibre, curve=curve, dim_x=dim_x,
        minus_k_x_bound=curve.minus_k_dot_c, strengthened_on_x=strengthened_on_x,
        x_is_projective_space=pn, claims=tuple(claims))
    if not cert.ok:
        raise InternalInvariantViolation("approximation certificate failed its claims")
    return cert
