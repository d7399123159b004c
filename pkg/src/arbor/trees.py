"""Spherically homogeneous rooted trees: shapes, truncations and vertex addressing.

A vertex is a tuple of letters; the empty tuple is the root and the length of
the word is the level.  The letter at position ``j`` ranges over
``0..arities[j]-1``.  The canonical order of the vertices of one level is
lexicographic; every downstream coordinate convention (leaf permutations, the
wreath decomposition, set iteration) is pinned to it.
"""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Iterator

Vertex = tuple[int, ...]

ROOT: Vertex = ()

MAX_ARITY = 255  # one-line permutation images must fit in a byte


class TreeShape:
    """Arity sequence of a finite truncation of a spherically homogeneous tree.

    ``arities[j]`` is the number of children of every level-``j`` vertex; an
    empty sequence denotes the single-vertex tree.  Instances are immutable by
    convention and safe to share.
    """

    def __init__(self, arities: Iterable[int]):
        self.arities = tuple(int(m) for m in arities)
        for m in self.arities:
            if m < 1:
                raise ValueError(f"arity must be >= 1, got {m}")
            if m > MAX_ARITY:
                raise ValueError(f"arity {m} exceeds the encodable maximum {MAX_ARITY}")
        sizes = [1]
        for m in self.arities:
            sizes.append(sizes[-1] * m)
        self._level_sizes = tuple(sizes)

    @classmethod
    def constant(cls, arity: int, depth: int) -> "TreeShape":
        return cls((arity,) * depth)

    @property
    def depth(self) -> int:
        return len(self.arities)

    @property
    def leaf_count(self) -> int:
        return self._level_sizes[-1]

    def level_size(self, n: int) -> int:
        """Number of vertices at level n (the empty product gives 1 at n=0)."""
        if not 0 <= n <= self.depth:
            raise ValueError(f"level {n} out of range 0..{self.depth}")
        return self._level_sizes[n]

    def block_size(self, n: int) -> int:
        """Number of leaves below one level-n vertex."""
        if not 0 <= n <= self.depth:
            raise ValueError(f"level {n} out of range 0..{self.depth}")
        return self.leaf_count // self._level_sizes[n]

    def vertices_at_level(self, n: int) -> list[Vertex]:
        """All level-n vertices in canonical (lexicographic) order."""
        self.level_size(n)
        out: list[Vertex] = [ROOT]
        for j in range(n):
            m = self.arities[j]
            out = [v + (c,) for v in out for c in range(m)]
        return out

    def validate_vertex(self, v: Vertex) -> None:
        if len(v) > self.depth:
            raise ValueError(f"vertex {v} deeper than shape depth {self.depth}")
        for j, letter in enumerate(v):
            if not 0 <= letter < self.arities[j]:
                raise ValueError(f"letter {letter} at position {j} out of range 0..{self.arities[j] - 1}")

    def subtree_shape(self, v: Vertex) -> "TreeShape":
        """Shape of the subtree rooted at v (arities shifted by the level of v)."""
        self.validate_vertex(v)
        return TreeShape(self.arities[len(v):])

    @cached_property
    def internal_vertices(self) -> tuple[Vertex, ...]:
        """All vertices of level < depth in depth-first preorder."""
        out: list[Vertex] = []

        def walk(v: Vertex) -> None:
            if len(v) == self.depth:
                return
            out.append(v)
            for c in range(self.arities[len(v)]):
                walk(v + (c,))

        walk(ROOT)
        return tuple(out)

    @cached_property
    def leaves(self) -> tuple[Vertex, ...]:
        return tuple(self.vertices_at_level(self.depth))

    def leaf_index(self, v: Vertex) -> int:
        """Position of a leaf in the canonical leaf order (mixed-radix value)."""
        if len(v) != self.depth:
            raise ValueError(f"not a leaf: {v}")
        self.validate_vertex(v)
        idx = 0
        for j, letter in enumerate(v):
            idx += letter * self.block_size(j + 1)
        return idx

    def leaf_range(self, v: Vertex) -> tuple[int, int]:
        """(start, size) of the contiguous leaf block below a vertex."""
        self.validate_vertex(v)
        start = 0
        for j, letter in enumerate(v):
            start += letter * self.block_size(j + 1)
        return start, self.block_size(len(v))

    def iter_vertices(self) -> Iterator[Vertex]:
        for n in range(self.depth + 1):
            yield from self.vertices_at_level(n)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TreeShape) and self.arities == other.arities

    def __hash__(self) -> int:
        return hash(self.arities)

    def __repr__(self) -> str:
        return f"TreeShape{self.arities}"


def format_vertex(v: Vertex) -> str:
    """Render a vertex word; digit string when possible, dotted otherwise."""
    if not v:
        return "@"
    if all(letter < 10 for letter in v):
        return "".join(str(letter) for letter in v)
    return ".".join(str(letter) for letter in v)


def parse_vertex(text: str) -> Vertex:
    """Inverse of format_vertex; accepts ``@`` (root), ``011`` or ``0.1.1``."""
    text = text.strip()
    if text in ("", "@"):
        return ROOT
    if "." in text:
        return tuple(int(tok) for tok in text.split("."))
    if not text.isdigit():
        raise ValueError(f"malformed vertex {text!r}")
    return tuple(int(ch) for ch in text)
