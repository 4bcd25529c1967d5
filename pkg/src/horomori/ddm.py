"""Exact double description for rational polyhedral cones.

Implements the incremental double-description method over Z/Q: from a
homogeneous H-representation {x : a.x >= 0, e.x = 0} to extreme rays
plus a lineality basis, and the derived V-side services this package
needs (extreme rays of a generated cone, facet normals, membership,
intersections).  All arithmetic is exact; every returned ray is a
primitive integer vector and orders are canonical.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .linalg import dot, is_zero, kernel_in_dim, primitive, scale_between, vsub, vscale


def _unit_rays(dim: int) -> list[tuple]:
    return [tuple(int(j == i) for j in range(dim)) for i in range(dim)]


def dual_description(inequalities: Sequence[Sequence], dim: int,
                     equalities: Sequence[Sequence] = ()) -> tuple[list[tuple], list[tuple]]:
    """Rays and lineality of {x in R^dim : a.x >= 0 for a in inequalities,
    e.x = 0 for e in equalities}.

    Returns (rays, lineality) with primitive integer vectors, rays sorted.
    """
    constraints: list[tuple] = []
    for e in equalities:
        constraints.append(tuple(e))
        constraints.append(tuple(-x for x in e))
    constraints.extend(tuple(a) for a in inequalities)

    rays: list[tuple] = []
    lin: list[tuple] = _unit_rays(dim)
    processed: list[tuple] = []

    def zero_set(r: tuple) -> frozenset:
        return frozenset(i for i, a in enumerate(processed) if dot(a, r) == 0)

    for a in constraints:
        if is_zero(a):
            processed.append(a)
            continue
        pivot = next((l for l in lin if dot(a, l) != 0), None)
        if pivot is not None:
            if dot(a, pivot) < 0:
                pivot = tuple(-x for x in pivot)
            pa = dot(a, pivot)
            new_lin = []
            for l in lin:
                if l is pivot or l == pivot or l == tuple(-x for x in pivot):
                    continue
                al = dot(a, l)
                if al != 0:
                    l = vsub(vscale(pa, l), vscale(al, pivot))
                    if is_zero(l):
                        continue
                    l = primitive(l)
                new_lin.append(l)
            new_rays = []
            for r in rays:
                ar = dot(a, r)
                if ar != 0:
                    r = primitive(vsub(vscale(pa, r), vscale(ar, pivot)))
                new_rays.append(r)
            new_rays.append(pivot)
            lin, rays = new_lin, new_rays
        else:
            plus = [r for r in rays if dot(a, r) > 0]
            zero = [r for r in rays if dot(a, r) == 0]
            minus = [r for r in rays if dot(a, r) < 0]
            if minus:
                zsets = {r: zero_set(r) for r in rays}
                new_rays = zero + plus
                for rp in plus:
                    for rm in minus:
                        common = zsets[rp] & zsets[rm]
                        adjacent = True
                        for r3 in rays:
                            if r3 is rp or r3 is rm:
                                continue
                            if common <= zsets[r3]:
                                adjacent = False
                                break
                        if adjacent:
                            combo = vsub(vscale(dot(a, rp), rm), vscale(dot(a, rm), rp))
                            if not is_zero(combo):
                                new_rays.append(primitive(combo))
                rays = new_rays
        processed.append(a)
        # dedupe identical directions
        seen = {}
        for r in rays:
            seen.setdefault(r, r)
        rays = sorted(seen)
    return sorted(set(rays)), lin


@dataclass(frozen=True)
class GeneratedCone:
    """Extreme-ray analysis of a cone given by generators."""

    dim: int
    generators: tuple
    extreme_rays: tuple          # primitive, sorted
    facet_normals: tuple         # rays of the dual cone
    dual_lineality: tuple        # equalities cutting out the span
    lineality: tuple             # nonempty iff the cone contains a line

    def contains(self, x: Sequence) -> bool:
        return (all(dot(f, x) >= 0 for f in self.facet_normals)
                and all(dot(e, x) == 0 for e in self.dual_lineality))

    def ray_members(self, ray: Sequence) -> tuple:
        """Indices of generators lying on the given extreme ray."""
        out = []
        for i, g in enumerate(self.generators):
            c = scale_between(g, ray)
            if c is not None and c > 0:
                out.append(i)
        return tuple(out)


def analyze_generated_cone(generators: Sequence[Sequence], dim: int) -> GeneratedCone:
    """Extreme rays, facets and lineality of Cone(generators)."""
    gens = tuple(tuple(g) for g in generators)
    nonzero = [primitive(g) for g in gens if not is_zero(g)]
    dedup = sorted(set(nonzero))
    # dual cone {y : g.y >= 0}; its rays are the facet normals of the cone
    normals, dual_lin = dual_description(dedup, dim)
    span_rows = list(normals) + list(dual_lin)
    lin = []
    if span_rows:
        lin = [primitive(k) for k in kernel_in_dim(span_rows, dim)]
    else:
        lin = _unit_rays(dim)
    extreme: list[tuple] = []
    if not lin:
        for g in dedup:
            zset = [f for f in normals if dot(f, g) == 0]
            minimal_face = [h for h in dedup if all(dot(f, h) == 0 for f in zset)]
            if all(scale_between(h, g) is not None for h in minimal_face):
                extreme.append(g)
    return GeneratedCone(dim=dim, generators=gens, extreme_rays=tuple(sorted(extreme)),
                         facet_normals=tuple(sorted(normals)),
                         dual_lineality=tuple(sorted(tuple(x) for x in dual_lin)),
                         lineality=tuple(sorted(lin)))


def cone_intersection_rays(gens_a: Sequence[Sequence], gens_b: Sequence[Sequence],
                           dim: int) -> tuple[list[tuple], list[tuple]]:
    """Rays and lineality of Cone(gens_a) intersected with Cone(gens_b)."""
    ca = analyze_generated_cone(gens_a, dim)
    cb = analyze_generated_cone(gens_b, dim)
    ineqs = list(ca.facet_normals) + list(cb.facet_normals)
    eqs = list(ca.dual_lineality) + list(cb.dual_lineality)
    return dual_description(ineqs, dim, equalities=eqs)
