"""Deterministic Schreier-Sims stabilizer chains over a faithful point action.

The chain supports exact order computation, membership testing and exactly
uniform random sampling: an element factors uniquely as a product of one coset
representative per level, so independent uniform picks of representatives give
the uniform distribution on the group.

Permutations are one-line ``bytes``.  Construction is fully deterministic:
base points are the smallest moved points, orbits expand in sorted order and
every Schreier generator is processed (no Monte-Carlo shortcuts), so the chain
is independent of hash randomization and of any seed.
"""

from __future__ import annotations

import random
from typing import Iterable

from .permutations import compose_bytes, identity_bytes, invert_bytes


class _Node:
    """One level: a base point, the strong generators added here, and the
    transversal of the orbit of the base point under this level's group
    (generated by the generators of this node and every deeper node)."""

    __slots__ = ("degree", "identity", "point", "gens", "transversal", "orbit", "stab")

    def __init__(self, degree: int, identity: bytes):
        self.degree = degree
        self.identity = identity
        self.point: int | None = None
        self.gens: list[bytes] = []
        self.transversal: dict[int, bytes] = {}
        self.orbit: list[int] = []
        self.stab: "_Node | None" = None

    def generators(self) -> list[bytes]:
        deeper = self.stab.generators() if self.stab is not None else []
        return deeper + self.gens

    def sift(self, p: bytes) -> bytes:
        node = self
        while node is not None and node.point is not None:
            x = p[node.point]
            rep = node.transversal.get(x)
            if rep is None:
                return p
            p = compose_bytes(invert_bytes(rep), p)
            node = node.stab
        return p

    def add_gen(self, gen: bytes) -> None:
        residue = self.sift(gen)
        if residue != self.identity:
            self._add_new(residue)

    def _add_new(self, gen: bytes) -> None:
        if self.point is None:
            self.point = next(i for i in range(self.degree) if gen[i] != i)
            self.stab = _Node(self.degree, self.identity)
        if gen[self.point] == self.point:
            self.stab._add_new(gen)
        else:
            self.gens.append(gen)
        self._rebuild_orbit()
        # verify (and repair) strong generation below via Schreier's lemma
        gens = self.generators()
        for x in self.orbit:
            ux = self.transversal[x]
            for g in gens:
                rep = self.transversal[g[x]]
                schreier = compose_bytes(invert_bytes(rep), compose_bytes(g, ux))
                if schreier != self.identity:
                    self.stab.add_gen(schreier)

    def _rebuild_orbit(self) -> None:
        gens = self.generators()
        transversal = {self.point: self.identity}
        order = [self.point]
        frontier = [self.point]
        while frontier:
            fresh = []
            for x in frontier:
                ux = transversal[x]
                for g in gens:
                    y = g[x]
                    if y not in transversal:
                        transversal[y] = compose_bytes(g, ux)
                        fresh.append(y)
            frontier = sorted(fresh)
            order.extend(frontier)
        self.transversal = transversal
        self.orbit = order

    def order(self) -> int:
        if self.point is None:
            return 1
        return len(self.transversal) * self.stab.order()


class StabilizerChain:
    """Base and strong generating set for a permutation group on 0..n-1."""

    def __init__(self, degree: int, generators: Iterable[bytes] = ()):
        self.degree = degree
        self._identity = identity_bytes(degree)
        self.root = _Node(degree, self._identity)
        for g in generators:
            self.extend(g)

    def extend(self, gen: bytes) -> None:
        if len(gen) != self.degree:
            raise ValueError("degree mismatch")
        self.root.add_gen(gen)

    def order(self) -> int:
        return self.root.order()

    def contains(self, p: bytes) -> bool:
        if len(p) != self.degree:
            return False
        return self.root.sift(p) == self._identity

    def sample(self, rng: random.Random) -> bytes:
        """Exactly uniform random element: independent uniform transversal
        representatives, multiplied root-first."""
        g = self._identity
        node = self.root
        while node is not None and node.point is not None:
            orbit = node.orbit
            x = orbit[rng.randrange(len(orbit))]
            g = compose_bytes(g, node.transversal[x])
            node = node.stab
        return g

    def base(self) -> list[int]:
        out = []
        node = self.root
        while node is not None and node.point is not None:
            out.append(node.point)
            node = node.stab
        return out
