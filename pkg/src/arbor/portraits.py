"""Finite-depth rooted-tree automorphisms stored as portraits.

A portrait over a depth-k shape assigns one permutation of the children to
every internal vertex.  The automorphism it denotes acts by the left-action
recursion ``g(x·w) = perm_root[x] · g|_x(w)`` where ``g|_x`` is the portrait of
the subtree hanging at letter ``x`` of the *source* tree.  Products act right
to left: ``(g*h)(v) = g(h(v))``, and sections obey
``(g*h)|_v = g|_{h(v)} * h|_v``.

The canonical byte encoding concatenates the one-line permutations in
depth-first preorder of the internal vertices; two portraits over the same
shape are equal iff their encodings are equal, and the encoding doubles as the
hash key used by the enumeration machinery.
"""

from __future__ import annotations

import random
from typing import Iterable, Sequence

from .permutations import (
    Perm,
    check_perm,
    compose_perms,
    identity_perm,
    invert_perm,
    perm_order,
)
from .trees import ROOT, TreeShape, Vertex


class Portrait:
    """Immutable depth-k tree automorphism."""

    __slots__ = ("shape", "_perms", "_encoding", "_leaf_perm")

    def __init__(self, shape: TreeShape, perms: dict[Vertex, Perm], _validate: bool = True):
        self.shape = shape
        self._perms = perms
        self._encoding: bytes | None = None
        self._leaf_perm: tuple[int, ...] | None = None
        if _validate:
            internal = shape.internal_vertices
            if len(perms) != len(internal):
                raise ValueError(
                    f"expected {len(internal)} internal permutations, got {len(perms)}"
                )
            for v in internal:
                check_perm(perms[v], shape.arities[len(v)])

    # construction ------------------------------------------------------

    @classmethod
    def identity(cls, shape: TreeShape) -> "Portrait":
        perms = {v: identity_perm(shape.arities[len(v)]) for v in shape.internal_vertices}
        return cls(shape, perms, _validate=False)

    @classmethod
    def from_root_perm(cls, shape: TreeShape, root: Sequence[int]) -> "Portrait":
        """Rooted automorphism: the given permutation at the root, trivial below."""
        if shape.depth == 0:
            if len(root) != 0:
                raise ValueError("depth-0 tree admits no root permutation")
            return cls.identity(shape)
        g = cls.identity(shape)
        perms = dict(g._perms)
        check_perm(root, shape.arities[0])
        perms[ROOT] = tuple(root)
        return cls(shape, perms, _validate=False)

    @classmethod
    def from_leaf_permutation(cls, shape: TreeShape, leaf_perm: Sequence[int]) -> "Portrait":
        """Reconstruct the portrait from its action on the canonical leaf order.

        Raises ValueError when the permutation does not respect the block
        structure of the shape, i.e. is not induced by a tree automorphism.
        """
        check_perm(leaf_perm, shape.leaf_count)
        perms: dict[Vertex, Perm] = {}

        def walk(v: Vertex, src_start: int, dst_start: int) -> None:
            if len(v) == shape.depth:
                if leaf_perm[src_start] != dst_start:
                    raise ValueError("permutation does not respect the tree structure")
                return
            m = class_arities[len(v)]
            child = shape.block_size(len(v) + 1)
            images = []
            for c in range(m):
                offset = leaf_perm[src_start + c * child] - dst_start
                letter, rem = divmod(offset, child)
                if rem or not 0 <= letter < m:
                    raise ValueError("permutation does not respect the tree structure")
                images.append(letter)
            if sorted(images) != list(range(m)):
                raise ValueError("permutation does not respect the tree structure")
            perms[v] = tuple(images)
            for c in range(m):
                walk(v + (c,), src_start + c * child, dst_start + images[c] * child)

        class_arities = shape.arities
        walk(ROOT, 0, 0)
        return cls(shape, perms, _validate=False)

    # the group operations ------------------------------------------------

    @property
    def depth(self) -> int:
        return self.shape.depth

    def perm_at(self, v: Vertex) -> Perm:
        return self._perms[v]

    def apply(self, v: Vertex) -> Vertex:
        """Image of a vertex (any level up to the depth)."""
        self.shape.validate_vertex(v)
        out = []
        cur: Vertex = ROOT
        for letter in v:
            out.append(self._perms[cur][letter])
            cur = cur + (letter,)
        return tuple(out)

    def __mul__(self, other: "Portrait") -> "Portrait":
        """self after other (other acts first)."""
        if self.shape != other.shape:
            raise ValueError("shape mismatch in composition")
        g, h = self._perms, other._perms
        perms: dict[Vertex, Perm] = {}
        depth = self.depth

        def rec(v: Vertex, hv: Vertex) -> None:
            ph = h[v]
            pg = g[hv]
            perms[v] = tuple(pg[x] for x in ph)
            if len(v) + 1 < depth:
                for c in range(len(ph)):
                    rec(v + (c,), hv + (ph[c],))

        if depth:
            rec(ROOT, ROOT)
        return Portrait(self.shape, perms, _validate=False)

    compose = __mul__

    def inverse(self) -> "Portrait":
        perms: dict[Vertex, Perm] = {}
        depth = self.depth
        mine = self._perms

        def rec(v: Vertex, gv: Vertex) -> None:
            p = mine[v]
            perms[gv] = invert_perm(p)
            if len(v) + 1 < depth:
                for c in range(len(p)):
                    rec(v + (c,), gv + (p[c],))

        if depth:
            rec(ROOT, ROOT)
        return Portrait(self.shape, perms, _validate=False)

    def __pow__(self, e: int) -> "Portrait":
        base = self if e >= 0 else self.inverse()
        result = Portrait.identity(self.shape)
        for _ in range(abs(e)):
            result = result * base
        return result

    # sections and the wreath decomposition -------------------------------

    def section(self, v: Vertex, depth: int | None = None) -> "Portrait":
        """Section g|_v of the given depth (defaults to everything below v)."""
        self.shape.validate_vertex(v)
        remaining = self.depth - len(v)
        if depth is None:
            depth = remaining
        if not 0 <= depth <= remaining:
            raise ValueError(f"section depth {depth} exceeds remaining depth {remaining}")
        sub = TreeShape(self.shape.arities[len(v):len(v) + depth])
        perms = {w: self._perms[v + w] for w in sub.internal_vertices}
        return Portrait(sub, perms, _validate=False)

    def truncate(self, n: int) -> "Portrait":
        """The depth-n truncation g|_∅^n."""
        return self.section(ROOT, n)

    def psi_decompose(self, n: int) -> tuple[list["Portrait"], "Portrait"]:
        """Wreath coordinates at level n: level-n sections in canonical order
        plus the depth-n truncation acting on top."""
        if not 1 <= n <= self.depth:
            raise ValueError(f"level {n} out of range 1..{self.depth}")
        sections = [self.section(v) for v in self.shape.vertices_at_level(n)]
        return sections, self.truncate(n)

    # faithful leaf action -------------------------------------------------

    def leaf_permutation(self) -> tuple[int, ...]:
        """Induced permutation of the canonical leaf order (a faithful image)."""
        if self._leaf_perm is None:
            shape = self.shape
            images: dict[Vertex, Vertex] = {ROOT: ROOT}
            for v in shape.internal_vertices:
                p = self._perms[v]
                iv = images[v]
                for c in range(len(p)):
                    images[v + (c,)] = iv + (p[c],)
            self._leaf_perm = tuple(shape.leaf_index(images[leaf]) for leaf in shape.leaves)
        return self._leaf_perm

    def leaf_bytes(self) -> bytes:
        return bytes(self.leaf_permutation())

    def order(self) -> int:
        """Least r >= 1 with g^r trivial, from the cycle structure of the
        faithful leaf action."""
        return perm_order(self.leaf_permutation())

    def is_identity(self) -> bool:
        return all(p[i] == i for p in self._perms.values() for i in range(len(p)))

    # canonical encoding ----------------------------------------------------

    def encode(self) -> bytes:
        """Depth-first concatenation of the one-line permutations (bit-exact
        external format; arities above 255 are rejected by TreeShape)."""
        if self._encoding is None:
            buf = bytearray()
            for v in self.shape.internal_vertices:
                buf.extend(self._perms[v])
            self._encoding = bytes(buf)
        return self._encoding

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Portrait)
            and self.shape == other.shape
            and self.encode() == other.encode()
        )

    def __hash__(self) -> int:
        return hash((self.shape.arities, self.encode()))

    def __repr__(self) -> str:
        return f"Portrait(depth={self.depth}, key={self.encode().hex()})"


def psi_compose(sections: Sequence[Portrait], top: Portrait) -> Portrait:
    """Inverse of psi_decompose: assemble a portrait from level-n sections (in
    canonical order) and a depth-n top action."""
    n = top.depth
    level = top.shape.vertices_at_level(n)
    if len(sections) != len(level):
        raise ValueError(f"expected {len(level)} sections, got {len(sections)}")
    sub_arities = sections[0].shape.arities if sections else ()
    for s in sections:
        if s.shape.arities != sub_arities:
            raise ValueError("sections must share one shape")
    shape = TreeShape(top.shape.arities + sub_arities)
    perms: dict[Vertex, Perm] = {}
    for v in top.shape.internal_vertices:
        perms[v] = top.perm_at(v)
    for v, s in zip(level, sections):
        for w in s.shape.internal_vertices:
            perms[v + w] = s.perm_at(w)
    return Portrait(shape, perms, _validate=False)


def random_portrait(shape: TreeShape, rng: random.Random) -> Portrait:
    """Uniformly random element of Aut of the truncated tree."""
    perms: dict[Vertex, Perm] = {}
    for v in shape.internal_vertices:
        p = list(range(shape.arities[len(v)]))
        rng.shuffle(p)
        perms[v] = tuple(p)
    return Portrait(shape, perms, _validate=False)


def order_by_iteration(g: Portrait, limit: int = 1 << 20) -> int:
    """Oracle: repeatedly compose until the identity shows up."""
    acc = g
    r = 1
    while not acc.is_identity():
        acc = acc * g
        r += 1
        if r > limit:
            raise ValueError(f"order exceeds iteration limit {limit}")
    return r


def closure(generators: Iterable[Portrait]) -> set[Portrait]:
    """Brute-force closure of a finite generating set under composition."""
    gens = list(generators)
    if not gens:
        raise ValueError("need at least one generator")
    shape = gens[0].shape
    seen = {Portrait.identity(shape)}
    frontier = list(seen)
    while frontier:
        fresh = []
        for x in frontier:
            for g in gens:
                y = x * g
                if y not in seen:
                    seen.add(y)
                    fresh.append(y)
        frontier = fresh
    return seen
