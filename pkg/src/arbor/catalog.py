"""Built-in groups.

Tree groups are shipped as ``.ssg`` text and parsed on demand, so the catalog
exercises the same loader as user files.  Rigid-stabilizer generator words are
attached where they are known; each is an element supported on one subtree at
every depth, which the test suite re-verifies mechanically.

The truncated semidirect counterexample lives here too: the ring of p-adic
integers extended by a primitive p-th root of unity, truncated modulo p^k and
acted on by the cyclic group of order p.  The ring is the quotient by the
polynomial ``x^(p-1) + ... + x + 1``, so its additive rank is p-1; reports
surface that rank next to the rank p the construction is usually quoted with,
without reconciling them.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import UnsupportedError
from .groupdef import GroupDef, parse_group
from .quotients import DEFAULT_ELEMENT_CAP

FULL_AUT_DEFAULT_DEPTH = 4  # named catalog entry full-aut-p truncates here


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _require_prime(p: int) -> None:
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")


GRIGORCHUK_SSG = """\
# first Grigorchuk group
group grigorchuk arity 2
gen a = perm (0 1) sections [1, 1]
gen b = perm id sections [a, c]
gen c = perm id sections [a, d]
gen d = perm id sections [1, b]
# elements supported on one level-1 subtree: a*d*a = (b, 1), d = (1, b),
# (a*d*a*b)^2 = ((ba)^2, 1), (a*b*a*d)^2 = (1, (ab)^2)
rist 0 = [a*d*a, a*d*a*b*a*d*a*b]
rist 1 = [d, a*b*a*d*a*b*a*d]
# s = y^-1*c*y*c with y = (a*b*a*d)^2 lands in the subtree at 11; the other
# level-2 words are its conjugates by elements moving 11 around level 2
rist 00 = [b*a*d*a*b*a*d*a*b*a*c*a*b*a*d*a*b*a*d*c*a*b]
rist 01 = [a*d*a*b*a*d*a*b*a*c*a*b*a*d*a*b*a*d*c*a]
rist 10 = [a*b*a*d*a*b*a*d*a*b*a*c*a*b*a*d*a*b*a*d*c*a*b*a]
rist 11 = [d*a*b*a*d*a*b*a*c*a*b*a*d*a*b*a*d*c]
flag expected_branch = true
flag expected_level_transitive = true
"""


@lru_cache(maxsize=None)
def grigorchuk() -> GroupDef:
    return parse_group(GRIGORCHUK_SSG)


@lru_cache(maxsize=None)
def gupta_sidki(p: int) -> GroupDef:
    """Gupta-Sidki group for an odd prime: t = (a, a^-1, 1, ..., 1, t)."""
    _require_prime(p)
    if p < 3:
        raise ValueError("the Gupta-Sidki recursion needs an odd prime")
    cycle = "(" + " ".join(str(i) for i in range(p)) + ")"
    sections = ["a", "a^-1"] + ["1"] * (p - 3) + ["t"]
    text = "\n".join(
        [
            f"group gupta-sidki-{p} arity {p}",
            f"gen a = perm {cycle} sections [{', '.join(['1'] * p)}]",
            f"gen t = perm id sections [{', '.join(sections)}]",
            "flag expected_branch = true",
            "flag expected_level_transitive = true",
        ]
    )
    return parse_group(text + "\n")


@lru_cache(maxsize=None)
def odometer(p: int) -> GroupDef:
    """The adding machine g = (1, ..., 1, g) followed by the full cycle."""
    _require_prime(p)
    cycle = "(" + " ".join(str(i) for i in range(p)) + ")"
    sections = ["1"] * (p - 1) + ["g"]
    text = "\n".join(
        [
            f"group odometer-{p} arity {p}",
            f"gen g = perm {cycle} sections [{', '.join(sections)}]",
            "flag expected_level_transitive = true",
            "flag expected_weakly_branch = false",
        ]
    )
    return parse_group(text + "\n")


def _power_word(name: str, e: int) -> str:
    if e == 0:
        return ""
    if e == 1:
        return name
    return f"{name}^{e}"


def _conjugated_word(conjugators: list[tuple[str, int]], core: list[str]) -> str:
    parts = [_power_word(n, e) for n, e in conjugators]
    inverse = [_power_word(n, -e) for n, e in reversed(conjugators)]
    tokens = [t for t in parts + core + inverse if t]
    return "*".join(tokens)


@lru_cache(maxsize=None)
def full_aut(p: int, k: int) -> GroupDef:
    """Automorphism group of the depth-k p-ary tree, as an iterated wreath
    product: one rooted cycle per level, each hung below the previous one.
    Projections deeper than k stay at the depth-k group."""
    _require_prime(p)
    if k < 1:
        raise ValueError("depth must be >= 1")
    cycle = "(" + " ".join(str(i) for i in range(p)) + ")"
    lines = [f"group full-aut-{p}-k{k} arity {p}"]
    lines.append(f"gen b0 = perm {cycle} sections [{', '.join(['1'] * p)}]")
    for j in range(1, k):
        sections = [f"b{j - 1}"] + ["1"] * (p - 1)
        lines.append(f"gen b{j} = perm id sections [{', '.join(sections)}]")
    # b_n is the cycle at vertex 0^n, supported on that subtree at every
    # depth; conjugates of the deeper generators fill the rigid stabilizers
    for n in (1, 2):
        if n >= k:
            break
        for v in itertools.product(range(p), repeat=n):
            conj: list[tuple[str, int]] = []
            for pos, letter in enumerate(v):
                if letter:
                    conj.append((f"b{pos}", letter))
            words = [_conjugated_word(conj, [f"b{j}"]) for j in range(n, k)]
            joiner = "." if p > 10 else ""
            vertex = joiner.join(str(x) for x in v)
            lines.append(f"rist {vertex} = [{', '.join(words)}]")
    lines.append("flag expected_branch = true")
    lines.append("flag expected_level_transitive = true")
    return parse_group("\n".join(lines) + "\n")


@lru_cache(maxsize=None)
def paper_realization(p: int) -> GroupDef:
    """Tree realization of the semidirect counterexample: the rooted cycle a,
    the adding machine g and its stabilized companion h = g with the root
    action removed.  Under the left action, a*h equals g; the group generated
    by a and h already contains g, so listing g changes nothing."""
    _require_prime(p)
    cycle = "(" + " ".join(str(i) for i in range(p)) + ")"
    trivial = ", ".join(["1"] * p)
    tail = ", ".join(["1"] * (p - 1) + ["g"])
    text = "\n".join(
        [
            f"group paper-realization-{p} arity {p}",
            f"gen a = perm {cycle} sections [{trivial}]",
            f"gen g = perm {cycle} sections [{tail}]",
            f"gen h = perm id sections [{tail}]",
            "flag expected_level_transitive = true",
            "flag expected_weakly_branch = false",
        ]
    )
    return parse_group(text + "\n")


# the truncated p-adic semidirect product ---------------------------------------

RingVector = tuple[int, ...]
GroupElement = tuple[RingVector, int]


class AbstractSemidirectQuotient:
    """The order-p^(k(p-1)+1) truncation of the semidirect product of the
    cyclotomic ring extension of the p-adic integers by the cyclic group of
    order p acting as multiplication by the root of unity.

    Ring vectors are coefficient tuples on 1, xi, ..., xi^(p-2) modulo p^k;
    multiplication by xi shifts them against the relation
    ``xi^(p-1) = -(1 + xi + ... + xi^(p-2))``.  For p = 2 the ring degenerates
    to a rank-1 module with xi = -1; nothing below special-cases that beyond
    the vector length.
    """

    def __init__(self, p: int, k: int, cap: int = DEFAULT_ELEMENT_CAP):
        _require_prime(p)
        if k < 1:
            raise ValueError("truncation exponent must be >= 1")
        self.p = p
        self.k = k
        self.rank = p - 1
        self.modulus = p**k
        self.order = p ** (k * (p - 1) + 1)
        if self.order > cap:
            raise UnsupportedError(
                f"group of order {self.order} exceeds the element cap {cap}"
            )
        self.identity: GroupElement = ((0,) * self.rank, 0)

    # ring arithmetic -----------------------------------------------------

    def xi_times(self, x: RingVector) -> RingVector:
        m = self.modulus
        borrow = x[-1]
        out = [(-borrow) % m]
        out.extend((x[i - 1] - borrow) % m for i in range(1, self.rank))
        return tuple(out)

    def xi_power_times(self, y: int, x: RingVector) -> RingVector:
        for _ in range(y % self.p):
            x = self.xi_times(x)
        return x

    def ring_add(self, x: RingVector, z: RingVector) -> RingVector:
        m = self.modulus
        return tuple((a + b) % m for a, b in zip(x, z))

    def ring_scale(self, c: int, x: RingVector) -> RingVector:
        m = self.modulus
        return tuple((c * a) % m for a in x)

    # group structure ------------------------------------------------------

    def multiply(self, e1: GroupElement, e2: GroupElement) -> GroupElement:
        (x, y), (z, w) = e1, e2
        return self.ring_add(x, self.xi_power_times(y, z)), (y + w) % self.p

    def inverse(self, e: GroupElement) -> GroupElement:
        x, y = e
        neg = self.ring_scale(-1, x)
        return self.xi_power_times(-y % self.p, neg), (-y) % self.p

    def power(self, e: GroupElement, n: int) -> GroupElement:
        if n < 0:
            return self.power(self.inverse(e), -n)
        acc = self.identity
        for _ in range(n):
            acc = self.multiply(acc, e)
        return acc

    def power_closed_form(self, e: GroupElement, n: int) -> GroupElement:
        """(x, y)^n = (x + xi^y x + ... + xi^((n-1)y) x, n y)."""
        if n < 0:
            raise ValueError("closed form stated for n >= 0")
        x, y = e
        total = (0,) * self.rank
        term = x
        for _ in range(n):
            total = self.ring_add(total, term)
            term = self.xi_power_times(y, term)
        return total, (n * y) % self.p

    def element_order(self, e: GroupElement) -> int:
        acc = e
        r = 1
        while acc != self.identity:
            acc = self.multiply(acc, e)
            r += 1
        return r

    def elements(self):
        """All elements in deterministic lexicographic order."""
        for x in itertools.product(range(self.modulus), repeat=self.rank):
            for y in range(self.p):
                yield (x, y)

    # torsion observables ----------------------------------------------------

    def torsion_fraction(self) -> Fraction:
        """Exact fraction of elements whose p-th power is trivial, by brute
        force over the whole group."""
        count = 0
        for e in self.elements():
            if self.power(e, self.p) == self.identity:
                count += 1
        return Fraction(count, self.order)

    def count_order_at_most(self, order_cap: int) -> int:
        if order_cap < 1:
            raise ValueError("order cap must be >= 1")
        return sum(1 for e in self.elements() if self.element_order(e) <= order_cap)

    def report(self) -> dict:
        return {
            "p": self.p,
            "k": self.k,
            "order": self.order,
            "ring_modulus": self.modulus,
            "additive_rank_implemented": self.rank,
            "additive_rank_stated": self.p,
            "torsion_fraction": str(self.torsion_fraction()),
            "torsion_fraction_closed_form": str(torsion_fraction_closed_form(self.p, self.k)),
        }


def abstract_quotient(p: int, k: int, cap: int = DEFAULT_ELEMENT_CAP) -> AbstractSemidirectQuotient:
    return AbstractSemidirectQuotient(p, k, cap)


def torsion_fraction(q: AbstractSemidirectQuotient) -> Fraction:
    return q.torsion_fraction()


def torsion_fraction_closed_form(p: int, k: int) -> Fraction:
    """Limit value (p-1)/p plus the contribution of the p-torsion of the
    truncated ring."""
    return Fraction(p - 1, p) + Fraction(p ** (p - 1), p * p ** (k * (p - 1)))


def verify_power_identity(
    q: AbstractSemidirectQuotient, trials: int = 200, seed: int = 0
) -> bool:
    """Random check that iterated products match the closed power form for
    exponents up to p^2."""
    rng = random.Random(seed)
    for _ in range(trials):
        x = tuple(rng.randrange(q.modulus) for _ in range(q.rank))
        y = rng.randrange(q.p)
        n = rng.randrange(q.p * q.p + 1)
        if q.power((x, y), n) != q.power_closed_form((x, y), n):
            return False
    return True


# name registry -------------------------------------------------------------------


@dataclass(frozen=True)
class AbstractGroupRef:
    """CLI-level handle for the non-tree catalog entry."""

    p: int

    @property
    def name(self) -> str:
        return f"abstract-semidirect-{self.p}"

    def quotient(self, k: int, cap: int = DEFAULT_ELEMENT_CAP) -> AbstractSemidirectQuotient:
        return AbstractSemidirectQuotient(self.p, k, cap)


def catalog_names() -> list[str]:
    return [
        "grigorchuk",
        "gupta-sidki-3",
        "odometer-2",
        "paper-realization-2",
        "abstract-semidirect-2",
        "full-aut-2",
    ]


def load_catalog_group(name: str) -> GroupDef | AbstractGroupRef:
    """Resolve a catalog name; numeric suffixes select the prime."""
    if name == "grigorchuk":
        return grigorchuk()
    for prefix, factory in (
        ("gupta-sidki-", gupta_sidki),
        ("odometer-", odometer),
        ("paper-realization-", paper_realization),
    ):
        if name.startswith(prefix):
            return factory(int(name[len(prefix):]))
    if name.startswith("full-aut-"):
        return full_aut(int(name[len("full-aut-"):]), FULL_AUT_DEFAULT_DEPTH)
    if name.startswith("abstract-semidirect-"):
        p = int(name[len("abstract-semidirect-"):])
        _require_prime(p)
        return AbstractGroupRef(p)
    raise KeyError(f"unknown catalog group {name!r}")
