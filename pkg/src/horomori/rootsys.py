"""Root systems from Dynkin diagrams, the deficit function on parabolic
choices, and the exhaustive inequality sweep.

Node numbering follows Bourbaki.  For the classical types the simple
roots are realized as

* A_l:  a_i = e_i - e_{i+1}                      (ambient R^{l+1})
* B_l:  a_i = e_i - e_{i+1}, a_l = e_l           (a_l is the short end)
* C_l:  a_i = e_i - e_{i+1}, a_l = 2 e_l         (a_l is the long end)
* D_l:  a_i = e_i - e_{i+1}, a_l = e_{l-1} + e_l

and E6/E7/E8, F4, G2 use the standard Bourbaki realizations (scaled by
2 where half-integers occur; the pairing matrix is scale invariant).
The matrix entry ``cartan[i][j]`` is the pairing of a_j against the
coroot of a_i, so rows index coroots.  Public node labels are 1-based.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import FrozenSet, Iterable, Iterator, Sequence

from .errors import InequalityViolated, InternalInvariantViolation, InvalidDiagram, UnknownNode

TYPE_RANK_BOUNDS = {
    "A": (1, None),
    "B": (2, None),
    "C": (2, None),
    "D": (4, None),
    "E": (6, 8),
    "F": (4, 4),
    "G": (2, 2),
}

# classical positive-root counts, used as an independent cross-check
POSITIVE_ROOT_COUNT = {
    "A": lambda l: l * (l + 1) // 2,
    "B": lambda l: l * l,
    "C": lambda l: l * l,
    "D": lambda l: l * (l - 1),
    "E": lambda l: {6: 36, 7: 63, 8: 120}[l],
    "F": lambda l: 24,
    "G": lambda l: 6,
}


def _validate_component(type_label: str, rank: int) -> None:
    if type_label not in TYPE_RANK_BOUNDS:
        raise InvalidDiagram(f"unknown type {type_label!r}")
    lo, hi = TYPE_RANK_BOUNDS[type_label]
    if rank < lo or (hi is not None and rank > hi):
        raise InvalidDiagram(f"{type_label}{rank} is out of range")


@dataclass(frozen=True)
class DynkinDiagram:
    """A finite product of connected Dynkin diagrams."""

    components: tuple[tuple[str, int], ...]

    def __post_init__(self):
        comps = tuple((str(t), int(r)) for t, r in self.components)
        object.__setattr__(self, "components", comps)
        for t, r in comps:
            _validate_component(t, r)

    @property
    def rank(self) -> int:
        return sum(r for _, r in self.components)

    @property
    def label(self) -> str:
        return "x".join(f"{t}{r}" for t, r in self.components) or "trivial"

    def node_blocks(self) -> list[range]:
        """Global 1-based node ranges, one per component, in order."""
        blocks, start = [], 1
        for _, r in self.components:
            blocks.append(range(start, start + r))
            start += r
        return blocks


def diagram(spec: str | Sequence[tuple[str, int]]) -> DynkinDiagram:
    """Build a diagram from components or a label like ``"A2xD4"``."""
    if isinstance(spec, str):
        comps = []
        for part in spec.split("x"):
            part = part.strip()
            if not part:
                continue
            comps.append((part[0], int(part[1:])))
        return DynkinDiagram(tuple(comps))
    return DynkinDiagram(tuple(spec))


def _euclid_simple_roots(type_label: str, rank: int) -> list[tuple[int, ...]]:
    l = rank

    def chain(ambient: int) -> list[list[int]]:
        out = []
        for i in range(l - 1):
            v = [0] * ambient
            v[i], v[i + 1] = 1, -1
            out.append(v)
        return out

    if type_label == "A":
        out = chain(l + 1)
        v = [0] * (l + 1)
        if l >= 1:
            # chain() above only produced l-1 roots; add the last one
            v[l - 1], v[l] = 1, -1
            out.append(v)
        return [tuple(x) for x in out]
    if type_label == "B":
        out = chain(l)
        v = [0] * l
        v[l - 1] = 1
        out.append(v)
        return [tuple(x) for x in out]
    if type_label == "C":
        out = chain(l)
        v = [0] * l
        v[l - 1] = 2
        out.append(v)
        return [tuple(x) for x in out]
    if type_label == "D":
        out = chain(l)
        v = [0] * l
        v[l - 2], v[l - 1] = 1, 1
        out.append(v)
        return [tuple(x) for x in out]
    if type_label == "E":
        # Bourbaki E8 simple roots scaled by 2; E6/E7 are the prefixes
        e8 = [
            (1, -1, -1, -1, -1, -1, -1, 1),
            (2, 2, 0, 0, 0, 0, 0, 0),
            (-2, 2, 0, 0, 0, 0, 0, 0),
            (0, -2, 2, 0, 0, 0, 0, 0),
            (0, 0, -2, 2, 0, 0, 0, 0),
            (0, 0, 0, -2, 2, 0, 0, 0),
            (0, 0, 0, 0, -2, 2, 0, 0),
            (0, 0, 0, 0, 0, -2, 2, 0),
        ]
        return e8[:l]
    if type_label == "F":
        return [(0, 2, -2, 0), (0, 0, 2, -2), (0, 0, 0, 2), (1, -1, -1, -1)]
    if type_label == "G":
        return [(1, -1, 0), (-2, 1, 1)]
    raise InvalidDiagram(type_label)


def _cartan_from_roots(simple: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    def ip(a, b):
        return sum(x * y for x, y in zip(a, b))

    n = len(simple)
    rows = []
    for i in range(n):
        nrm = ip(simple[i], simple[i])
        row = []
        for j in range(n):
            val = Fraction(2 * ip(simple[i], simple[j]), nrm)
            if val.denominator != 1:
                raise InternalInvariantViolation("non-integral pairing in diagram data")
            row.append(int(val))
        rows.append(tuple(row))
    return tuple(rows)


@lru_cache(maxsize=None)
def component_cartan(type_label: str, rank: int) -> tuple[tuple[int, ...], ...]:
    _validate_component(type_label, rank)
    return _cartan_from_roots(_euclid_simple_roots(type_label, rank))


def _positive_roots_closure(cartan: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Positive roots as coefficient vectors, grown height by height.

    A candidate b + a_i is accepted when the a_i-string through b, read
    off from already-known lower roots and the pairing, extends upward.
    """
    l = len(cartan)
    simples = [tuple(int(j == i) for j in range(l)) for i in range(l)]
    roots = set(simples)
    level = list(simples)
    while level:
        nxt = set()
        for beta in level:
            for i in range(l):
                pair = sum(beta[j] * cartan[i][j] for j in range(l))
                p = 0
                cur = list(beta)
                while True:
                    cur[i] -= 1
                    if cur[i] < 0 or tuple(cur) not in roots:
                        break
                    p += 1
                if p - pair >= 1:
                    up = list(beta)
                    up[i] += 1
                    nxt.add(tuple(up))
        nxt -= roots
        roots |= nxt
        level = sorted(nxt)
    return sorted(roots)


def weyl_orbit_positive_roots(cartan: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Independent oracle: all roots as the reflection orbit of the
    simple roots; positives are those with nonnegative coefficients."""
    l = len(cartan)
    simples = [tuple(int(j == i) for j in range(l)) for i in range(l)]
    seen = set(simples)
    frontier = list(simples)
    while frontier:
        new = []
        for beta in frontier:
            for i in range(l):
                pair = sum(beta[j] * cartan[i][j] for j in range(l))
                img = list(beta)
                img[i] -= pair
                img = tuple(img)
                if img not in seen:
                    seen.add(img)
                    new.append(img)
        frontier = new
    return sorted(r for r in seen if all(c >= 0 for c in r))


@dataclass(frozen=True)
class RootSystem:
    """Positive roots of a (possibly reducible) diagram, with the pairing
    matrix against coroots.  Roots are integer coefficient vectors over
    the global simple-root nodes, in lexicographic order."""

    diagram: DynkinDiagram
    cartan: tuple[tuple[int, ...], ...]
    positive_roots: tuple[tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return self.diagram.rank

    @property
    def nodes(self) -> range:
        return range(1, self.rank + 1)

    def simple_root(self, node: int) -> tuple[int, ...]:
        self._check_node(node)
        return tuple(int(j == node - 1) for j in range(self.rank))

    def _check_node(self, node: int) -> None:
        if not 1 <= node <= self.rank:
            raise UnknownNode(f"node {node} not in 1..{self.rank}")

    def support(self, beta: Sequence[int]) -> frozenset[int]:
        return frozenset(j + 1 for j, c in enumerate(beta) if c != 0)


@lru_cache(maxsize=None)
def build_root_system(diag: DynkinDiagram) -> RootSystem:
    """Enumerate positive roots componentwise by closure."""
    n = diag.rank
    cartan_rows = [[0] * n for _ in range(n)]
    roots: list[tuple[int, ...]] = []
    offset = 0
    for (t, r), block in zip(diag.components, diag.node_blocks()):
        local = component_cartan(t, r)
        for i in range(r):
            for j in range(r):
                cartan_rows[offset + i][offset + j] = local[i][j]
        for root in _positive_roots_closure(local):
            full = [0] * n
            full[offset:offset + r] = root
            roots.append(tuple(full))
        offset += r
    expected = sum(POSITIVE_ROOT_COUNT[t](r) for t, r in diag.components)
    if len(roots) != expected:
        raise InternalInvariantViolation(
            f"{diag.label}: enumerated {len(roots)} positive roots, expected {expected}")
    return RootSystem(diagram=diag, cartan=tuple(tuple(row) for row in cartan_rows),
                      positive_roots=tuple(sorted(roots)))


def root_system(spec: str | Sequence[tuple[str, int]]) -> RootSystem:
    return build_root_system(diagram(spec))


def pairing(rs: RootSystem, beta: Sequence[int], node: int) -> int:
    """Pairing of an integer root-lattice vector against the coroot of a
    simple root; linear in ``beta`` through the Cartan matrix."""
    rs._check_node(node)
    return sum(c * rs.cartan[node - 1][j] for j, c in enumerate(beta))


@dataclass(frozen=True)
class ParabolicChoice:
    """A subset I of the simple-root nodes; its complement C indexes the
    colour divisors of the flag factor."""

    nodes: FrozenSet[int]

    @staticmethod
    def of(rs: RootSystem, nodes: Iterable[int]) -> "ParabolicChoice":
        ns = frozenset(int(x) for x in nodes)
        for x in ns:
            rs._check_node(x)
        return ParabolicChoice(ns)

    def complement(self, rs: RootSystem) -> tuple[int, ...]:
        return tuple(sorted(set(rs.nodes) - self.nodes))


def roots_outside(rs: RootSystem, I: ParabolicChoice) -> list[tuple[int, ...]]:
    """Positive roots whose support is not contained in I."""
    return [b for b in rs.positive_roots if not rs.support(b) <= I.nodes]


def b_coefficients(rs: RootSystem, I: ParabolicChoice) -> dict[int, int]:
    """Anticanonical colour coefficients: for each node a outside I, the
    sum of pairings of the roots outside I against the coroot of a."""
    outside = roots_outside(rs, I)
    out: dict[int, int] = {}
    for node in I.complement(rs):
        val = sum(pairing(rs, b, node) for b in outside)
        if val <= 0:
            raise InternalInvariantViolation(
                f"b coefficient at node {node} is {val}; enumeration bug")
        out[node] = val
    return out


def flag_dimension(rs: RootSystem, I: ParabolicChoice) -> int:
    return len(roots_outside(rs, I))


def omega(rs: RootSystem, I: ParabolicChoice) -> int:
    """Deficit #C + #(outside roots) - sum of b coefficients.  Additive
    over diagram components; zero exactly on products of projective
    spaces."""
    comp = I.complement(rs)
    total = len(comp) + flag_dimension(rs, I)
    outside = roots_outside(rs, I)
    for node in comp:
        total -= sum(pairing(rs, b, node) for b in outside)
    return total


def omega_by_component(rs: RootSystem, I: ParabolicChoice) -> list[int]:
    vals = []
    for block in rs.diagram.node_blocks():
        block_nodes = set(block)
        comp = [n for n in block_nodes if n not in I.nodes]
        outside = [b for b in rs.positive_roots
                   if rs.support(b) <= block_nodes and not rs.support(b) <= I.nodes]
        val = len(comp) + len(outside)
        for node in comp:
            val -= sum(pairing(rs, b, node) for b in outside)
        vals.append(val)
    return vals


def is_product_of_projective_spaces(rs: RootSystem, I: ParabolicChoice) -> bool:
    """True when the deficit vanishes on every component."""
    return all(v == 0 for v in omega_by_component(rs, I))


def connected_diagrams(max_rank: int) -> Iterator[DynkinDiagram]:
    """All connected diagrams of rank at most ``max_rank``, A through G.

    B2 and C2 name isomorphic systems with swapped node labels; both are
    enumerated.
    """
    if max_rank < 1:
        raise InvalidDiagram("max_rank must be at least 1")
    for l in range(1, max_rank + 1):
        yield diagram(f"A{l}")
    for l in range(2, max_rank + 1):
        yield diagram(f"B{l}")
    for l in range(2, max_rank + 1):
        yield diagram(f"C{l}")
    for l in range(4, max_rank + 1):
        yield diagram(f"D{l}")
    for l in (6, 7, 8):
        if l <= max_rank:
            yield diagram(f"E{l}")
    if max_rank >= 4:
        yield diagram("F4")
    if max_rank >= 2:
        yield diagram("G2")


@dataclass(frozen=True)
class RootInequalityReport:
    """Result of the exhaustive sweep over proper parabolic choices."""

    max_rank: int
    checked: tuple[tuple[str, int], ...]          # (diagram label, #subsets)
    equality_witnesses: tuple[tuple[str, tuple[int, ...]], ...]
    projective_space_nodes: tuple[tuple[str, tuple[int, ...]], ...]
    violations: tuple[tuple[str, tuple[int, ...], int], ...]

    def to_json_dict(self) -> dict:
        return {
            "max_rank": self.max_rank,
            "checked": [{"diagram": d, "subsets": n} for d, n in self.checked],
            "equality_witnesses": [
                {"diagram": d, "I": list(nodes)} for d, nodes in self.equality_witnesses],
            "projective_space_nodes": [
                {"diagram": d, "nodes": list(nodes)} for d, nodes in self.projective_space_nodes],
            "violations": [
                {"diagram": d, "I": list(nodes), "omega": w} for d, nodes, w in self.violations],
        }

    def to_text(self) -> str:
        lines = [f"root inequality sweep, rank <= {self.max_rank}"]
        total = sum(n for _, n in self.checked)
        lines.append(f"checked {total} proper parabolic choices on {len(self.checked)} diagrams")
        lines.append(f"violations: {len(self.violations)}")
        lines.append("projective-space nodes per diagram (maximal choices with zero deficit):")
        for d, nodes in self.projective_space_nodes:
            shown = ",".join(map(str, nodes)) if nodes else "-"
            lines.append(f"  {d}: {shown}")
        lines.append("equality witnesses:")
        for d, nodes in self.equality_witnesses:
            shown = "{" + ",".join(map(str, nodes)) + "}"
            lines.append(f"  {d}: I={shown}")
        return "\n".join(lines)


def verify_root_inequality(max_rank: int = 8) -> RootInequalityReport:
    """Check the deficit is nonnegative for every connected diagram of
    rank at most ``max_rank`` and every proper subset I, recording all
    equality cases.  Raises InequalityViolated with a witness otherwise.
    """
    checked = []
    witnesses = []
    proj_nodes = []
    violations = []
    for diag in connected_diagrams(max_rank):
        rs = build_root_system(diag)
        nodes = list(rs.nodes)
        count = 0
        for size in range(0, len(nodes)):
            for subset in itertools.combinations(nodes, size):
                I = ParabolicChoice(frozenset(subset))
                w = omega(rs, I)
                count += 1
                if w < 0:
                    violations.append((diag.label, tuple(subset), w))
                    raise InequalityViolated(
                        f"omega({diag.label}, I={set(subset)}) = {w} < 0")
                if w == 0:
                    if is_product_of_projective_spaces(rs, I) is not True:
                        raise InternalInvariantViolation(
                            "equality and product characterization disagree at "
                            f"({diag.label}, {set(subset)})")
                    witnesses.append((diag.label, tuple(subset)))
                elif is_product_of_projective_spaces(rs, I):
                    raise InternalInvariantViolation(
                        "product characterization without equality at "
                        f"({diag.label}, {set(subset)})")
        checked.append((diag.label, count))
        eq_nodes = tuple(n for n in nodes
                         if omega(rs, ParabolicChoice(frozenset(set(nodes) - {n}))) == 0)
        proj_nodes.append((diag.label, eq_nodes))
    return RootInequalityReport(
        max_rank=max_rank,
        checked=tuple(checked),
        equality_witnesses=tuple(witnesses),
        projective_space_nodes=tuple(proj_nodes),
        violations=tuple(violations),
    )
