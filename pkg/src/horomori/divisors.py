"""Invariant divisors, their piecewise linear data, and divisor-level
invariants (rank of the divisor class lattice, the anticanonical
divisor, nefness).

A divisor is a coefficient map: one rational per non-coloured ray and
one per universal colour.  Its linear data on a maximal cone is the
covector agreeing with the ray coefficients on primitive generators and
with the colour coefficients on the marked points carried by the cone;
the sign convention is the evaluation one (value at the generator IS
the coefficient, no sign flip).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import FanError, NotQCartier, OutsideSupport
from .fans import ColouredFan, Gen
from .linalg import dot, rank as mat_rank, solve
from .rootsys import b_coefficients


@dataclass(frozen=True)
class BDivisor:
    """Coefficients on the non-coloured rays and on every universal
    colour of a fixed fan (zero coefficients are stored explicitly)."""

    ray_coeffs: tuple[tuple[Gen, Fraction], ...]
    colour_coeffs: tuple[tuple[str, Fraction], ...]

    @staticmethod
    def build(fan: ColouredFan, rays: Mapping[Gen, object] | None = None,
              colours: Mapping[str, object] | None = None) -> "BDivisor":
        rays = {tuple(k): Fraction(v) for k, v in (rays or {}).items()}
        colours = {k: Fraction(v) for k, v in (colours or {}).items()}
        known_rays = set(fan.non_coloured_rays)
        unknown = set(rays) - known_rays
        if unknown:
            raise FanError(f"coefficients on unknown or coloured rays: {sorted(unknown)}")
        known_cols = {c.name for c in fan.lattice.colours}
        unknown = set(colours) - known_cols
        if unknown:
            raise FanError(f"coefficients on unknown colours: {sorted(unknown)}")
        ray_items = tuple((g, rays.get(g, Fraction(0))) for g in fan.non_coloured_rays)
        col_items = tuple((c.name, colours.get(c.name, Fraction(0)))
                          for c in fan.lattice.colours)
        return BDivisor(ray_items, col_items)

    @property
    def rays(self) -> dict[Gen, Fraction]:
        return dict(self.ray_coeffs)

    @property
    def colours(self) -> dict[str, Fraction]:
        return dict(self.colour_coeffs)

    def ray(self, g: Gen) -> Fraction:
        return dict(self.ray_coeffs)[g]

    def colour(self, name: str) -> Fraction:
        return dict(self.colour_coeffs)[name]

    def add(self, other: "BDivisor") -> "BDivisor":
        r = {g: a + dict(other.ray_coeffs)[g] for g, a in self.ray_coeffs}
        c = {n: a + dict(other.colour_coeffs)[n] for n, a in self.colour_coeffs}
        return BDivisor(tuple(sorted(r.items())), tuple(sorted(c.items())))

    def scale(self, t) -> "BDivisor":
        t = Fraction(t)
        return BDivisor(tuple((g, t * a) for g, a in self.ray_coeffs),
                        tuple((n, t * a) for n, a in self.colour_coeffs))

    def neg(self) -> "BDivisor":
        return self.scale(-1)

    def is_integral(self) -> bool:
        return all(a.denominator == 1 for _, a in self.ray_coeffs + self.colour_coeffs)


@dataclass(frozen=True)
class CartierData:
    """One covector per maximal cone; the piecewise linear function of a
    divisor is the cone-wise pairing against these."""

    fan: ColouredFan
    covectors: tuple[tuple, ...]

    def on_cone(self, index: int) -> tuple:
        return self.covectors[index]


def cartier_data(fan: ColouredFan, delta: BDivisor) -> CartierData:
    """Solve for the covector on every maximal cone.

    On each cone the constraints are: value at a primitive generator of
    a non-coloured ray equals its ray coefficient, and value at the
    marked point of every carried colour equals that colour coefficient.
    An inconsistent system on some cone raises NotQCartier.
    """
    fan.require_simplicial()
    fan.require_complete()
    ray_c = delta.rays
    col_c = delta.colours
    covs = []
    for c in fan.maximal_cones:
        rows: list[Sequence] = []
        rhs: list[Fraction] = []
        constrained: set[str] = set()
        for g in c.generators:
            carried = fan.ray_colours[g]
            if carried:
                for a in sorted(carried):
                    rows.append(fan.lattice.colour_point(a))
                    rhs.append(col_c[a])
                    constrained.add(a)
            else:
                rows.append(g)
                rhs.append(ray_c[g])
        for a in sorted(c.colours - constrained):
            rows.append(fan.lattice.colour_point(a))
            rhs.append(col_c[a])
        if fan.rank == 0:
            covs.append(())
            continue
        try:
            m = solve(rows, rhs)
        except ValueError as exc:
            raise NotQCartier(f"linear data underdetermined on cone {c.generators}") from exc
        if m is None:
            raise NotQCartier(f"no consistent linear data on cone {c.generators}")
        covs.append(m)
    return CartierData(fan=fan, covectors=tuple(covs))


def evaluate_pl(data: CartierData, x: Sequence) -> Fraction:
    """Value of the piecewise linear function at a point of the support."""
    i = data.fan.maximal_cone_containing(x)
    if i is None:
        raise OutsideSupport(f"{tuple(x)} is outside the fan support")
    return Fraction(dot(data.covectors[i], x)) if data.fan.rank else Fraction(0)


def divisor_basis(fan: ColouredFan) -> tuple[tuple, ...]:
    """Canonical order of the invariant prime divisors: non-coloured rays
    lexicographically, then universal colours by name."""
    keys: list[tuple] = [("ray", g) for g in fan.non_coloured_rays]
    keys.extend(("colour", c.name) for c in fan.lattice.colours)
    return tuple(keys)


def unit_divisor(fan: ColouredFan, key: tuple) -> BDivisor:
    kind, which = key
    if kind == "ray":
        return BDivisor.build(fan, rays={which: 1})
    return BDivisor.build(fan, colours={which: 1})


def divisor_coefficient(delta: BDivisor, key: tuple) -> Fraction:
    kind, which = key
    return delta.ray(which) if kind == "ray" else delta.colour(which)


def picard_rank(fan: ColouredFan) -> int:
    """Number of invariant prime divisors minus the lattice rank."""
    fan.require_complete()
    fan.require_qfactorial()
    n_div = len(fan.rays) + len(set(c.name for c in fan.lattice.colours) - fan.colour_set)
    return n_div - fan.rank


def picard_rank_via_principal(fan: ColouredFan) -> int:
    """Independent cross-check: corank of the lattice of principal
    divisors inside the full divisor lattice."""
    fan.require_complete()
    fan.require_qfactorial()
    basis = divisor_basis(fan)
    rows = []
    for i in range(fan.rank):
        e = tuple(int(j == i) for j in range(fan.rank))
        row = []
        for kind, which in basis:
            v = which if kind == "ray" else fan.lattice.colour_point(which)
            row.append(dot(e, v))
        rows.append(row)
    principal_rank = mat_rank(rows) if rows else 0
    return len(basis) - principal_rank


def anticanonical(fan: ColouredFan) -> BDivisor:
    """Coefficient one on every non-coloured ray and the positive-root
    coefficient on every universal colour."""
    bs = b_coefficients(fan.lattice.root_system, fan.lattice.parabolic)
    cols = {c.name: Fraction(bs[c.node]) for c in fan.lattice.colours}
    rays = {g: Fraction(1) for g in fan.non_coloured_rays}
    return BDivisor.build(fan, rays=rays, colours=cols)


def canonical(fan: ColouredFan) -> BDivisor:
    return anticanonical(fan).neg()


def principal_divisor(fan: ColouredFan, covector: Sequence) -> BDivisor:
    """Divisor of the character attached to a covector."""
    rays = {g: Fraction(dot(covector, g)) for g in fan.non_coloured_rays}
    cols = {c.name: Fraction(dot(covector, c.u)) for c in fan.lattice.colours}
    return BDivisor.build(fan, rays=rays, colours=cols)


def is_nef(fan: ColouredFan, delta: BDivisor) -> bool:
    """Nonnegative against every curve-class generator."""
    from .mori import mori_generators
    cartier_data(fan, delta)
    gens = mori_generators(fan)
    return all(g.pair(delta) >= 0 for g in gens.generators)
