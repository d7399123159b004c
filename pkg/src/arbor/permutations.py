"""Permutation helpers shared by portraits, the DSL parser and the quotient engine.

Permutations act on ``0..n-1`` and are stored in one-line notation: ``p[i]``
is the image of ``i``.  Composition is functional and right-to-left:
``compose(p, q)[i] == p[q[i]]``, i.e. ``q`` acts first.  The byte variants
operate on ``bytes`` objects of the same one-line form; they exist because the
quotient engine keeps millions of leaf permutations around and ``bytes`` is
the cheapest hashable container for them.
"""

from __future__ import annotations

import math
import re
from typing import Sequence

Perm = tuple[int, ...]

_CYCLE_RE = re.compile(r"\(\s*((?:\d+[\s,]*)*)\)")


def identity_perm(n: int) -> Perm:
    return tuple(range(n))


def is_identity(p: Sequence[int]) -> bool:
    return all(i == x for i, x in enumerate(p))


def compose_perms(p: Sequence[int], q: Sequence[int]) -> Perm:
    """Return p after q (q acts first)."""
    return tuple(p[x] for x in q)


def invert_perm(p: Sequence[int]) -> Perm:
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)


def check_perm(p: Sequence[int], n: int | None = None) -> None:
    if n is not None and len(p) != n:
        raise ValueError(f"expected a permutation of {n} points, got {len(p)}")
    if sorted(p) != list(range(len(p))):
        raise ValueError(f"not a permutation: {p!r}")


def cycles_of(p: Sequence[int]) -> list[tuple[int, ...]]:
    """Nontrivial cycles, each starting at its minimum, sorted by minimum."""
    seen = [False] * len(p)
    out = []
    for i in range(len(p)):
        if seen[i] or p[i] == i:
            seen[i] = True
            continue
        cyc = [i]
        seen[i] = True
        j = p[i]
        while j != i:
            cyc.append(j)
            seen[j] = True
            j = p[j]
        out.append(tuple(cyc))
    return out


def perm_order(p: Sequence[int]) -> int:
    """Order of the permutation: lcm of its cycle lengths."""
    seen = [False] * len(p)
    order = 1
    for i in range(len(p)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        order = math.lcm(order, length)
    return order


def parse_cycles(text: str, n: int) -> Perm:
    """Parse cycle notation like ``(0 1 2)(3 4)`` (or ``id``) on 0..n-1."""
    text = text.strip()
    if text == "id":
        return identity_perm(n)
    consumed = 0
    perm = list(range(n))
    for m in _CYCLE_RE.finditer(text):
        if text[consumed:m.start()].strip():
            raise ValueError(f"malformed cycle notation: {text!r}")
        consumed = m.end()
        body = m.group(1).strip()
        if not body:
            continue
        points = [int(tok) for tok in re.split(r"[\s,]+", body)]
        if len(set(points)) != len(points):
            raise ValueError(f"repeated point in cycle: {text!r}")
        for x in points:
            if not 0 <= x < n:
                raise ValueError(f"point {x} out of range 0..{n - 1} in {text!r}")
        # right-to-left: this cycle acts first, accumulated perm second
        cyc = list(range(n))
        for a, b in zip(points, points[1:]):
            cyc[a] = b
        cyc[points[-1]] = points[0]
        perm = [perm[cyc[i]] for i in range(n)]
    if text[consumed:].strip():
        raise ValueError(f"malformed cycle notation: {text!r}")
    return tuple(perm)


def format_cycles(p: Sequence[int]) -> str:
    cycles = cycles_of(p)
    if not cycles:
        return "id"
    return "".join("(" + " ".join(map(str, c)) + ")" for c in cycles)


# bytes variants -------------------------------------------------------------

def identity_bytes(n: int) -> bytes:
    return bytes(range(n))


def compose_bytes(p: bytes, q: bytes) -> bytes:
    """Return p after q, as bytes (q acts first)."""
    return bytes(map(p.__getitem__, q))


def invert_bytes(p: bytes) -> bytes:
    inv = bytearray(len(p))
    for i, x in enumerate(p):
        inv[x] = i
    return bytes(inv)


def conjugate_bytes(q: bytes, p: bytes) -> bytes:
    """q p q^-1."""
    return compose_bytes(compose_bytes(q, p), invert_bytes(q))


def block_quotient(p: Sequence[int], block: int) -> Perm:
    """Induced permutation on contiguous blocks of the given size.

    Valid only when ``p`` maps blocks to blocks, which holds for the leaf
    action of any tree automorphism and the level blocks of its shape.
    """
    m = len(p) // block
    return tuple(p[i * block] // block for i in range(m))
