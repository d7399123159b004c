"""Finite quotients of wreath-recursive groups and their subgroup structures.

``enumerate_quotient`` materializes the full image of a group at a given depth
by breadth-first closure of the projected generators; ``build_stab_chain``
represents the same image by a stabilizer chain over the faithful leaf action,
which scales past enumeration and supports membership and exact uniform
sampling.  Elements are kept internally as one-line leaf permutations
(``bytes``); portraits are materialized on demand.

Level stabilizers, rigid (vertex and level) stabilizers, orbits, indices and
section sets follow.  Rigid stabilizers computed from an enumerated quotient
are the rigid stabilizers *of the quotient*; they contain, possibly properly,
the projection of the ambient group's rigid stabilizer, which is only
available through generator-word metadata (``profinite_rist_projection``).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import CapacityError, InvariantViolation, UnsupportedError
from .groupdef import GroupDef
from .permutations import (
    block_quotient,
    compose_bytes,
    identity_bytes,
    invert_bytes,
    perm_order,
)
from .portraits import Portrait
from .stabchain import StabilizerChain
from .trees import TreeShape, Vertex, format_vertex

DEFAULT_ELEMENT_CAP = 10_000_000


def _generator_perms(group: GroupDef, k: int) -> list[bytes]:
    """Leaf permutations of the projected generators, inverses included."""
    out: list[bytes] = []
    seen: set[bytes] = set()
    for name in group.generator_names():
        p = group.project(name, k).leaf_bytes()
        for q in (p, invert_bytes(p)):
            if q not in seen:
                seen.add(q)
                out.append(q)
    return out


def bfs_closure(
    generators: Sequence[bytes], degree: int, cap: int = DEFAULT_ELEMENT_CAP
) -> set[bytes]:
    """Deterministic breadth-first closure of a generating set."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    identity = identity_bytes(degree)
    seen = {identity}
    frontier = [identity]
    while frontier:
        fresh: list[bytes] = []
        for x in frontier:
            for g in generators:
                y = compose_bytes(x, g)
                if y not in seen:
                    seen.add(y)
                    if len(seen) > cap:
                        raise CapacityError(
                            f"enumeration exceeded cap {cap} (reached {len(seen)} elements)",
                            reached=len(seen),
                            cap=cap,
                        )
                    fresh.append(y)
        frontier = fresh
    return seen


class FiniteQuotient:
    """Common surface of the two quotient representations."""

    group: GroupDef
    depth: int
    shape: TreeShape
    order: int

    def generator_perms(self) -> list[bytes]:
        raise NotImplementedError

    def portrait_of(self, perm: bytes) -> Portrait:
        return Portrait.from_leaf_permutation(self.shape, tuple(perm))


class EnumeratedQuotient(FiniteQuotient):
    """Fully enumerated image of the group at a fixed depth."""

    def __init__(self, group: GroupDef, depth: int, elements: frozenset[bytes]):
        self.group = group
        self.depth = depth
        self.shape = group.shape(depth)
        self.elements = elements
        self.order = len(elements)
        self._gens = _generator_perms(group, depth)
        self._sorted: list[bytes] | None = None
        self._images: dict[int, frozenset[bytes]] = {}
        self._order_stats: dict[tuple[int, ...], dict] = {}

    def generator_perms(self) -> list[bytes]:
        return list(self._gens)

    def __contains__(self, g: Portrait | bytes) -> bool:
        key = g.leaf_bytes() if isinstance(g, Portrait) else bytes(g)
        return key in self.elements

    def portraits(self) -> list[Portrait]:
        """All elements in canonical-encoding order (deterministic)."""
        out = [self.portrait_of(p) for p in self.elements]
        out.sort(key=Portrait.encode)
        return out

    def sorted_perms(self) -> list[bytes]:
        """Element leaf perms sorted by canonical portrait encoding."""
        if self._sorted is None:
            keyed = sorted((self.portrait_of(p).encode(), p) for p in self.elements)
            self._sorted = [p for _, p in keyed]
        return self._sorted

    def image_at(self, j: int) -> frozenset[bytes]:
        """Truncations of all elements to depth j, as level-j leaf perms."""
        if not 0 <= j <= self.depth:
            raise ValueError(f"depth {j} out of range 0..{self.depth}")
        if j not in self._images:
            block = self.shape.block_size(j)
            self._images[j] = frozenset(
                bytes(block_quotient(p, block)) for p in self.elements
            )
        return self._images[j]

    def order_statistics(self, levels: tuple[int, ...] = ()) -> dict[tuple[int, ...], int]:
        """Joint histogram of (element order, truncation orders at the given
        levels); one streaming pass serves every census at this depth."""
        key = tuple(sorted(set(levels)))
        cached = self._order_stats.get(key)
        if cached is not None:
            return cached
        blocks = [self.shape.block_size(n) for n in key]
        counts: dict[tuple[int, ...], int] = {}
        for p in self.elements:
            row = [perm_order(p)]
            for block in blocks:
                row.append(perm_order(block_quotient(p, block)))
            t = tuple(row)
            counts[t] = counts.get(t, 0) + 1
        self._order_stats[key] = counts
        return counts


class StabChainQuotient(FiniteQuotient):
    """Stabilizer-chain representation over the faithful leaf action."""

    def __init__(self, group: GroupDef, depth: int, seed: int = 0):
        self.group = group
        self.depth = depth
        self.seed = seed
        self.shape = group.shape(depth)
        gens = _generator_perms(group, depth)
        self.chain = StabilizerChain(self.shape.leaf_count, gens)
        self.order = self.chain.order()
        self._gens = gens

    def generator_perms(self) -> list[bytes]:
        return list(self._gens)

    def __contains__(self, g: Portrait | bytes) -> bool:
        key = g.leaf_bytes() if isinstance(g, Portrait) else bytes(g)
        return self.chain.contains(key)

    def sample_perm(self, rng: random.Random) -> bytes:
        return self.chain.sample(rng)

    def sample_portrait(self, rng: random.Random) -> Portrait:
        return self.portrait_of(self.chain.sample(rng))


def enumerate_quotient(
    group: GroupDef, k: int, cap: int = DEFAULT_ELEMENT_CAP
) -> EnumeratedQuotient:
    """BFS closure of the projected generators at depth k."""
    if k < 0:
        raise ValueError("depth must be >= 0")
    shape = group.shape(k)
    gens = _generator_perms(group, k)
    elements = bfs_closure(gens, shape.leaf_count, cap)
    return EnumeratedQuotient(group, k, frozenset(elements))


def build_stab_chain(group: GroupDef, k: int, seed: int = 0) -> StabChainQuotient:
    """Stabilizer-chain representation; construction is deterministic, the
    seed pins the default sampling stream."""
    return StabChainQuotient(group, k, seed)


# subgroups -------------------------------------------------------------------


@dataclass(frozen=True)
class SubgroupHandle:
    """A subgroup of a depth-k quotient, stored as a full element set."""

    shape: TreeShape
    depth: int
    elements: frozenset[bytes]
    label: str
    provenance: str = "finite-quotient"
    generators: tuple[bytes, ...] = field(default_factory=tuple)

    @property
    def order(self) -> int:
        return len(self.elements)

    def is_trivial(self) -> bool:
        return self.order == 1

    def generator_perms(self) -> list[bytes]:
        if self.generators:
            return list(self.generators)
        return sorted(self.elements)

    def portraits(self) -> list[Portrait]:
        out = [Portrait.from_leaf_permutation(self.shape, tuple(p)) for p in self.elements]
        out.sort(key=Portrait.encode)
        return out

    def __contains__(self, g: Portrait | bytes) -> bool:
        key = g.leaf_bytes() if isinstance(g, Portrait) else bytes(g)
        return key in self.elements


def _require_enumerated(q: FiniteQuotient, op: str) -> EnumeratedQuotient:
    if not isinstance(q, EnumeratedQuotient):
        raise CapacityError(
            f"{op} needs a fully enumerated quotient; rebuild with enumerate_quotient"
        )
    return q


def subgroup_generated(
    parent: EnumeratedQuotient | SubgroupHandle,
    generators: Iterable[bytes | Portrait],
    label: str,
    provenance: str = "finite-quotient",
) -> SubgroupHandle:
    """Closure of the given elements inside the parent's ambient group."""
    gens: list[bytes] = []
    for g in generators:
        gens.append(g.leaf_bytes() if isinstance(g, Portrait) else bytes(g))
    degree = parent.shape.leaf_count
    with_inverses: list[bytes] = []
    for g in gens:
        for q in (g, invert_bytes(g)):
            if q not in with_inverses:
                with_inverses.append(q)
    elements = bfs_closure(with_inverses, degree) if gens else {identity_bytes(degree)}
    return SubgroupHandle(
        parent.shape, parent.depth, frozenset(elements), label, provenance, tuple(gens)
    )


def level_stabilizer(q: FiniteQuotient, n: int) -> SubgroupHandle:
    """Elements acting trivially on every vertex of level n (hence on all
    levels up to n)."""
    eq = _require_enumerated(q, "level_stabilizer")
    if not 1 <= n <= q.depth:
        raise ValueError(f"level {n} out of range 1..{q.depth}")
    block = q.shape.block_size(n)
    count = q.shape.level_size(n)
    kept = frozenset(
        p for p in eq.elements if all(p[i * block] // block == i for i in range(count))
    )
    return SubgroupHandle(q.shape, q.depth, kept, f"St({n})")


def rigid_stabilizer(q: FiniteQuotient, v: Vertex) -> SubgroupHandle:
    """Elements of the quotient fixing every vertex outside the subtree at v.

    This is the rigid stabilizer of the finite quotient; it contains the
    projection of the ambient group's rigid stabilizer but need not equal it.
    """
    eq = _require_enumerated(q, "rigid_stabilizer")
    if not 1 <= len(v) < q.depth:
        raise ValueError(f"vertex level must be in 1..{q.depth - 1}")
    q.shape.validate_vertex(v)
    start, size = q.shape.leaf_range(v)
    outside = [i for i in range(q.shape.leaf_count) if not start <= i < start + size]
    kept = frozenset(p for p in eq.elements if all(p[i] == i for i in outside))
    return SubgroupHandle(q.shape, q.depth, kept, f"rist({format_vertex(v)})")


def rigid_level_stabilizer(q: FiniteQuotient, n: int) -> SubgroupHandle:
    """Internal direct product of the rigid stabilizers over level n."""
    eq = _require_enumerated(q, "rigid_level_stabilizer")
    if not 1 <= n < q.depth:
        raise ValueError(f"level must be in 1..{q.depth - 1}")
    factors = [rigid_stabilizer(eq, v) for v in q.shape.vertices_at_level(n)]
    product = {identity_bytes(q.shape.leaf_count)}
    expected = 1
    for f in factors:
        expected *= f.order
        product = {compose_bytes(a, b) for a in product for b in f.elements}
    if len(product) != expected:
        raise InvariantViolation(
            f"RiSt({n}) is not a direct product: {len(product)} != {expected}"
        )
    return SubgroupHandle(q.shape, q.depth, frozenset(product), f"RiSt({n})")


def profinite_rist_projection(group: GroupDef, v: Vertex, k: int) -> SubgroupHandle:
    """Subgroup of the depth-k quotient generated by the projections of the
    rigid-stabilizer words supplied in the definition's metadata.

    By construction this is contained in ``rigid_stabilizer`` of the quotient
    at v; it approximates the projection of the ambient rigid stabilizer from
    below.  Raises UnsupportedError when no words are recorded for v.
    """
    words = group.rist_words.get(tuple(v))
    if words is None:
        raise UnsupportedError(
            f"group {group.name!r} carries no rist generator words for vertex "
            f"{format_vertex(tuple(v))}"
        )
    shape = group.shape(k)
    gens = [group.evaluate(w, k).leaf_bytes() for w in words]
    seeds: list[bytes] = []
    for g in gens:
        for q in (g, invert_bytes(g)):
            if q not in seeds:
                seeds.append(q)
    elements = bfs_closure(seeds, shape.leaf_count) if seeds else {identity_bytes(shape.leaf_count)}
    return SubgroupHandle(
        shape,
        k,
        frozenset(elements),
        f"rist({format_vertex(tuple(v))})~words",
        provenance="metadata-words",
        generators=tuple(gens),
    )


def metadata_rist_level(group: GroupDef, n: int, k: int) -> SubgroupHandle:
    """Product of the metadata-backed rigid stabilizers over all of level n."""
    shape = group.shape(k)
    vertices = shape.vertices_at_level(n)
    missing = [v for v in vertices if v not in group.rist_words]
    if missing:
        raise UnsupportedError(
            f"group {group.name!r} lacks rist words for level-{n} vertices: "
            + ", ".join(format_vertex(v) for v in missing)
        )
    factors = [profinite_rist_projection(group, v, k) for v in vertices]
    product = {identity_bytes(shape.leaf_count)}
    expected = 1
    for f in factors:
        expected *= f.order
        product = {compose_bytes(a, b) for a in product for b in f.elements}
    if len(product) != expected:
        raise InvariantViolation(f"metadata RiSt({n}) is not a direct product")
    return SubgroupHandle(
        shape, k, frozenset(product), f"RiSt({n})~words", provenance="metadata-words"
    )


def normal_closure(q: FiniteQuotient, h: SubgroupHandle) -> SubgroupHandle:
    """Smallest subgroup containing h that is closed under conjugation by the
    quotient's generators."""
    eq = _require_enumerated(q, "normal_closure")
    gens = eq.generator_perms()
    current = h.elements
    while True:
        conjugates = {
            compose_bytes(compose_bytes(g, t), invert_bytes(g))
            for g in gens
            for t in current
        }
        if conjugates <= current:
            return SubgroupHandle(
                q.shape, q.depth, current, f"ncl({h.label})", h.provenance
            )
        seeds = sorted(current | conjugates)
        current = frozenset(bfs_closure(seeds, q.shape.leaf_count))


def index(q: FiniteQuotient, h: SubgroupHandle) -> int:
    """|Q| / |H|, with containment and exact divisibility checked."""
    if isinstance(q, EnumeratedQuotient):
        if not h.elements <= q.elements:
            raise InvariantViolation(f"{h.label} is not contained in the quotient")
    else:
        for p in h.elements:
            if p not in q:
                raise InvariantViolation(f"{h.label} is not contained in the quotient")
    if q.order % h.order:
        raise InvariantViolation(
            f"|H|={h.order} does not divide |Q|={q.order} for {h.label}"
        )
    return q.order // h.order


# orbits and transitivity -------------------------------------------------------


def orbits(source: FiniteQuotient | SubgroupHandle, n: int) -> list[tuple[int, ...]]:
    """Orbit partition of the generator action on level-n vertex indices,
    sorted by smallest member."""
    shape = source.shape
    if not 0 <= n <= shape.depth:
        raise ValueError(f"level {n} out of range 0..{shape.depth}")
    block = shape.block_size(n)
    gens = [block_quotient(p, block) for p in source.generator_perms()]
    count = shape.level_size(n)
    seen = [False] * count
    out: list[tuple[int, ...]] = []
    for start in range(count):
        if seen[start]:
            continue
        orbit = [start]
        seen[start] = True
        frontier = [start]
        while frontier:
            fresh = []
            for x in frontier:
                for g in gens:
                    y = g[x]
                    if not seen[y]:
                        seen[y] = True
                        orbit.append(y)
                        fresh.append(y)
            frontier = fresh
        out.append(tuple(sorted(orbit)))
    return out


def is_level_transitive(q: FiniteQuotient | SubgroupHandle) -> bool:
    return all(len(orbits(q, n)) == 1 for n in range(1, q.shape.depth + 1))


def is_weakly_branch_at(q: FiniteQuotient, n: int) -> bool:
    """Whether the quotient's rigid level stabilizer at n is nontrivial."""
    return not rigid_level_stabilizer(q, n).is_trivial()


def is_branch_at(q: FiniteQuotient, n: int) -> tuple[bool, int]:
    """(level-transitive and RiSt(n) nontrivial, index of RiSt(n)).

    The index of any subgroup of a finite quotient is finite, so it is
    reported for trend inspection across depths rather than decided on.
    """
    rist = rigid_level_stabilizer(q, n)
    flag = is_level_transitive(q) and not rist.is_trivial()
    return flag, index(q, rist)


# section sets ---------------------------------------------------------------


def section_set(
    source: FiniteQuotient | SubgroupHandle | Iterable[Portrait],
    v: Vertex,
    j: int,
) -> frozenset[Portrait]:
    """Depth-j sections at v of every element of the source, deduplicated."""
    if isinstance(source, EnumeratedQuotient):
        shape, perms = source.shape, source.elements
    elif isinstance(source, SubgroupHandle):
        shape, perms = source.shape, source.elements
    elif isinstance(source, FiniteQuotient):
        raise CapacityError("section_set needs an enumerated source")
    else:
        portraits = list(source)
        return frozenset(g.section(tuple(v), j) for g in portraits)
    shape.validate_vertex(tuple(v))
    if not 0 <= j <= shape.depth - len(v):
        raise ValueError(f"section depth {j} exceeds remaining depth")
    start, size = shape.leaf_range(tuple(v))
    sub = TreeShape(shape.arities[len(v):len(v) + j])
    block = size // sub.leaf_count
    out: set[bytes] = set()
    for p in perms:
        base = p[start] - (p[start] % size)
        sec = tuple(p[start + i] - base for i in range(size))
        out.add(bytes(block_quotient(sec, block)))
    return frozenset(Portrait.from_leaf_permutation(sub, tuple(s)) for s in out)


def element_order(perm: Sequence[int]) -> int:
    return perm_order(perm)
