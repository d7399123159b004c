"""Haar-measure computations on finite quotients.

On a compact group acting on the tree, the measure of a cylinder set over a
depth-j condition is a counting ratio over the depth-j image, and the measure
of the torsion-candidate sets is chased through censuses of
``P(r, n, k) = {h in the depth-k image : o(h) = o(h truncated to n) = r}``.
All ratios are exact ``Fraction`` values; floats appear only in Monte-Carlo
estimators.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InvariantViolation, UnsupportedError
from .groupdef import GroupDef
from .permutations import block_quotient, perm_order
from .portraits import Portrait
from .quotients import (
    DEFAULT_ELEMENT_CAP,
    EnumeratedQuotient,
    FiniteQuotient,
    StabChainQuotient,
    SubgroupHandle,
    enumerate_quotient,
    index,
    metadata_rist_level,
    profinite_rist_projection,
    rigid_level_stabilizer,
    rigid_stabilizer,
    section_set,
)
from .trees import Vertex, format_vertex

Z95 = 1.959963984540054  # two-sided 95% normal quantile


# cylinders and fibers ---------------------------------------------------------


def haar_of_cylinder(q: EnumeratedQuotient, elements: Iterable[Portrait], j: int) -> Fraction:
    """Measure of the cylinder over a depth-j subset: #X / |depth-j image|."""
    image = q.image_at(j)
    keys = set()
    for g in elements:
        if g.depth != j:
            raise ValueError(f"cylinder elements must live at depth {j}")
        key = g.leaf_bytes()
        if key not in image:
            raise ValueError("cylinder subset is not contained in the depth-j image")
        keys.add(key)
    return Fraction(len(keys), len(image))


def fiber_sizes(q: EnumeratedQuotient, j: int) -> Counter:
    """Cardinalities of the fibers of the truncation onto the depth-j image."""
    block = q.shape.block_size(j)
    return Counter(bytes(block_quotient(p, block)) for p in q.elements)


def check_fiber_uniformity(q: EnumeratedQuotient, j: int) -> bool:
    """All fibers of the truncation map share one cardinality (the finite
    content of the pullback property of the Haar measure)."""
    sizes = set(fiber_sizes(q, j).values())
    return len(sizes) == 1


# torsion censuses ------------------------------------------------------------


@dataclass(frozen=True)
class TorsionProfile:
    depth: int
    counts: dict[int, int]  # order -> element count

    def total(self) -> int:
        return sum(self.counts.values())


def torsion_profile(q: EnumeratedQuotient) -> TorsionProfile:
    """Exact order histogram of the quotient."""
    stats = q.order_statistics()
    counts: dict[int, int] = {}
    for (order,), c in stats.items():
        counts[order] = counts.get(order, 0) + c
    return TorsionProfile(q.depth, dict(sorted(counts.items())))


def census_P(q: EnumeratedQuotient, r: int, n: int) -> int:
    """#{h : o(h) = r and o(h truncated to level n) = r}."""
    if r < 1:
        raise ValueError("order must be >= 1")
    if not 1 <= n <= q.depth:
        raise ValueError(f"level {n} out of range 1..{q.depth}")
    stats = q.order_statistics((n,))
    return sum(c for (order, t_order), c in stats.items() if order == r and t_order == r)


def capped_census(q: EnumeratedQuotient, order_cap: int) -> int:
    """#{h : o(h) <= order_cap} (the finite shadow of the torsion set)."""
    if order_cap < 1:
        raise ValueError("order cap must be >= 1")
    stats = q.order_statistics()
    return sum(c for (order,), c in stats.items() if order <= order_cap)


@dataclass(frozen=True)
class DensityRecord:
    """One row of a torsion census."""

    r: int
    n: int
    k: int
    count: int
    group_order: int
    ratio: Fraction
    bound_upper: Fraction | None = None
    bound_alpha: Fraction | None = None
    rist_provenance: str | None = None


def density_curve(
    group: GroupDef,
    r: int,
    n: int,
    ks: Sequence[int],
    cap: int = DEFAULT_ELEMENT_CAP,
    quotients: dict[int, EnumeratedQuotient] | None = None,
) -> list[DensityRecord]:
    """Exact census ratios across depths; the sequence must be non-increasing
    (preimages of the census sets nest), otherwise the run is aborted."""
    ks = sorted(set(ks))
    if ks and ks[0] < n:
        raise ValueError(f"depths must be >= n = {n}")
    records = []
    for k in ks:
        q = quotients.get(k) if quotients else None
        if q is None:
            q = enumerate_quotient(group, k, cap)
        count = census_P(q, r, n)
        records.append(
            DensityRecord(r, n, k, count, q.order, Fraction(count, q.order))
        )
    for a, b in zip(records, records[1:]):
        if b.ratio > a.ratio:
            raise InvariantViolation(
                f"census ratio increased from depth {a.k} ({a.ratio}) to "
                f"depth {b.k} ({b.ratio})"
            )
    return records


# the bound chain ---------------------------------------------------------------


@dataclass(frozen=True)
class BoundLedger:
    """Everything the proof's inequality chain produces at one (r, n, k)."""

    record: DensityRecord
    level_order: int            # |depth-n image|
    level_width: int            # number of level-n vertices
    upper_value: int            # bound on the census count
    upper_holds: bool
    lower_value: int            # bound from below on the group order
    lower_holds: bool
    rist_index: int             # index of the rist source in the quotient
    alpha_value: int
    alpha_bound: Fraction       # alpha / smallest rist section set
    alpha_holds: bool
    alpha_asserted: bool
    rist_provenance: str
    section_sizes: tuple[int, ...]
    rist_section_sizes: tuple[int, ...]


def _rist_source(
    group: GroupDef, q: EnumeratedQuotient, n: int, source: str
) -> tuple[SubgroupHandle, list[SubgroupHandle], str]:
    vertices = q.shape.vertices_at_level(n)
    if n == q.depth:
        # sections at depth 0 are trivial; the chain degenerates gracefully
        trivial = SubgroupHandle(
            q.shape, q.depth, frozenset({bytes(range(q.shape.leaf_count))}), "RiSt(k)~trivial"
        )
        return trivial, [trivial for _ in vertices], "trivial"
    if source == "metadata":
        level = metadata_rist_level(group, n, q.depth)
        factors = [profinite_rist_projection(group, v, q.depth) for v in vertices]
        return level, factors, "metadata-words"
    level = rigid_level_stabilizer(q, n)
    factors = [rigid_stabilizer(q, v) for v in vertices]
    return level, factors, "finite-quotient"


def bound_ledger(
    group: GroupDef,
    r: int,
    n: int,
    k: int,
    rist_source: str = "auto",
    cap: int = DEFAULT_ELEMENT_CAP,
    quotient: EnumeratedQuotient | None = None,
) -> BoundLedger:
    """Evaluate the counting bound chain at one (r, n, k).

    The upper bound on the census drops the section at one level-n vertex (the
    worst case over the dropped vertex is taken, which is what aggregating the
    per-element choice over the whole census set justifies).  The lower bound
    on the group order multiplies the section counts of the rigid level
    stabilizer.  The final ratio bound against
    ``alpha(n) / #sections of the rist source`` is asserted only for the
    metadata-backed source; the quotient's own rigid stabilizers may exceed
    the ambient group's, which would weaken that inequality's meaning.
    """
    if rist_source not in ("auto", "finite", "metadata"):
        raise ValueError(f"unknown rist source {rist_source!r}")
    q = quotient if quotient is not None else enumerate_quotient(group, k, cap)
    if not 1 <= n <= k:
        raise ValueError(f"level {n} out of range 1..{k}")
    if rist_source == "auto":
        vertices = q.shape.vertices_at_level(n)
        has_metadata = n < k and all(v in group.rist_words for v in vertices)
        rist_source = "metadata" if has_metadata else "finite"

    count = census_P(q, r, n)
    level_order = len(q.image_at(n))
    vertices = q.shape.vertices_at_level(n)
    width = len(vertices)

    sec_sizes = tuple(len(section_set(q, v, k - n)) for v in vertices)
    total = math.prod(sec_sizes)
    upper_value = level_order * max(total // s for s in sec_sizes)
    upper_holds = count <= upper_value

    level, factors, provenance = _rist_source(group, q, n, rist_source)
    rist_sec_sizes = tuple(
        len(section_set(f, v, k - n)) for f, v in zip(factors, vertices)
    )
    lower_value = math.prod(rist_sec_sizes)
    lower_holds = lower_value <= q.order

    rist_index = index(q, level)
    alpha_value = level_order * (width * rist_index) ** (width - 1)
    alpha_bound = Fraction(alpha_value, min(rist_sec_sizes))
    ratio = Fraction(count, q.order)
    alpha_holds = ratio <= alpha_bound
    alpha_asserted = provenance != "finite-quotient"

    if not upper_holds:
        raise InvariantViolation(
            f"upper bound failed at r={r} n={n} k={k}: {count} > {upper_value}"
        )
    if not lower_holds:
        raise InvariantViolation(
            f"lower bound failed at r={r} n={n} k={k}: {lower_value} > {q.order}"
        )
    if alpha_asserted and not alpha_holds:
        raise InvariantViolation(
            f"alpha bound failed at r={r} n={n} k={k}: {ratio} > {alpha_bound}"
        )

    record = DensityRecord(
        r,
        n,
        k,
        count,
        q.order,
        ratio,
        bound_upper=Fraction(upper_value, q.order),
        bound_alpha=alpha_bound,
        rist_provenance=provenance,
    )
    return BoundLedger(
        record=record,
        level_order=level_order,
        level_width=width,
        upper_value=upper_value,
        upper_holds=upper_holds,
        lower_value=lower_value,
        lower_holds=lower_holds,
        rist_index=rist_index,
        alpha_value=alpha_value,
        alpha_bound=alpha_bound,
        alpha_holds=alpha_holds,
        alpha_asserted=alpha_asserted,
        rist_provenance=provenance,
        section_sizes=sec_sizes,
        rist_section_sizes=rist_sec_sizes,
    )


# orbit structure of a torsion witness ------------------------------------------


@dataclass(frozen=True)
class OrbitSpectrum:
    sizes: tuple[int, ...]
    maximum: int
    lcm: int
    witness: Vertex  # a bottom-level vertex on an orbit of maximal length


def orbit_spectrum(tau: Portrait) -> OrbitSpectrum:
    """Orbit lengths of the cyclic group generated by tau on its bottom level.

    In a p-group quotient every orbit length is a p-power, so the lcm of the
    lengths equals the maximum; that coincidence is checked whenever the
    lengths are powers of one prime.
    """
    perm = tau.leaf_permutation()
    n = tau.depth
    sizes = []
    witness = None
    best = 0
    seen = [False] * len(perm)
    leaves = tau.shape.leaves
    for i in range(len(perm)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        sizes.append(length)
        if length > best:
            best = length
            witness = leaves[i]
    lcm = math.lcm(*sizes) if sizes else 1
    spectrum = OrbitSpectrum(tuple(sorted(sizes)), best, lcm, witness or ())
    primes = {p for s in spectrum.sizes if s > 1 for p in _prime_factors(s)}
    if len(primes) <= 1 and spectrum.maximum != spectrum.lcm:
        raise InvariantViolation(
            f"p-power orbit lengths {spectrum.sizes} with max != lcm"
        )
    return spectrum


def _prime_factors(n: int) -> set[int]:
    out = set()
    d = 2
    while d * d <= n:
        while n % d == 0:
            out.add(d)
            n //= d
        d += 1
    if n > 1:
        out.add(n)
    return out


def section_product_check(h: Portrait, n: int, r: int | None = None) -> bool:
    """Check the section identity of a torsion element: for every level-n
    vertex, the product of the depth-(k-n) sections along the backward orbit
    of the top action is trivial."""
    order = h.order()
    if r is not None and r != order:
        raise ValueError(f"stated order {r} differs from actual order {order}")
    r = order
    if not 1 <= n <= h.depth:
        raise ValueError(f"level {n} out of range 1..{h.depth}")
    k = h.depth
    identity = Portrait.identity(h.shape.subtree_shape(h.shape.vertices_at_level(n)[0]))
    for v in h.shape.vertices_at_level(n):
        orbit_vertex = v
        # product over i=1..r of section at tau^(r-i)(v); rightmost factor first
        terms = []
        for _ in range(r):
            terms.append(h.section(orbit_vertex))
            orbit_vertex = h.apply(orbit_vertex)
        acc = identity
        for term in reversed(terms):
            acc = term * acc
        if not acc.is_identity():
            return False
    return True


# sampling ---------------------------------------------------------------------


def sample_uniform(q: StabChainQuotient, count: int, seed: int = 0) -> list[Portrait]:
    """Exactly uniform portraits from the stabilizer chain; one private RNG
    stream per call."""
    rng = random.Random(seed)
    return [q.sample_portrait(rng) for _ in range(count)]


@dataclass(frozen=True)
class TorsionEstimate:
    group: str
    depth: int
    order_cap: int
    draws: int
    hits: int
    estimate: float
    ci_low: float
    ci_high: float
    seed: int

    def contains(self, value: Fraction | float) -> bool:
        return self.ci_low <= float(value) <= self.ci_high


def _wilson_interval(hits: int, draws: int, z: float = Z95) -> tuple[float, float]:
    if draws == 0:
        return 0.0, 1.0
    phat = hits / draws
    denom = 1 + z * z / draws
    center = (phat + z * z / (2 * draws)) / denom
    half = z * math.sqrt(phat * (1 - phat) / draws + z * z / (4 * draws * draws)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def estimate_torsion_density(
    group: GroupDef,
    k: int,
    order_cap: int,
    count: int,
    seed: int = 0,
    chain: StabChainQuotient | None = None,
) -> TorsionEstimate:
    """Monte-Carlo fraction of elements of order <= order_cap, with a 95%
    binomial (Wilson) interval."""
    if order_cap < 1:
        raise ValueError("order cap must be >= 1")
    if count < 1:
        raise ValueError("draw count must be >= 1")
    q = chain if chain is not None else StabChainQuotient(group, k, seed)
    rng = random.Random(seed)
    hits = 0
    for _ in range(count):
        if perm_order(q.sample_perm(rng)) <= order_cap:
            hits += 1
    low, high = _wilson_interval(hits, count)
    return TorsionEstimate(
        group=group.name,
        depth=k,
        order_cap=order_cap,
        draws=count,
        hits=hits,
        estimate=hits / count,
        ci_low=low,
        ci_high=high,
        seed=seed,
    )


# emission -----------------------------------------------------------------------

DENSITY_CSV_FORMAT = "arbor.density.v1"
DENSITY_CSV_COLUMNS = (
    "format",
    "r",
    "n",
    "k",
    "count",
    "group_order",
    "ratio",
    "ratio_float",
    "bound_upper",
    "bound_alpha",
    "rist_provenance",
)


def _fraction_str(x: Fraction | None) -> str:
    if x is None:
        return ""
    return f"{x.numerator}/{x.denominator}"


def density_rows(records: Iterable[DensityRecord]) -> list[list[str]]:
    rows = [list(DENSITY_CSV_COLUMNS)]
    for rec in records:
        rows.append(
            [
                DENSITY_CSV_FORMAT,
                str(rec.r),
                str(rec.n),
                str(rec.k),
                str(rec.count),
                str(rec.group_order),
                _fraction_str(rec.ratio),
                repr(float(rec.ratio)),
                _fraction_str(rec.bound_upper),
                _fraction_str(rec.bound_alpha),
                rec.rist_provenance or "",
            ]
        )
    return rows


def record_to_dict(rec: DensityRecord) -> dict:
    return {
        "r": rec.r,
        "n": rec.n,
        "k": rec.k,
        "count": rec.count,
        "group_order": rec.group_order,
        "ratio": _fraction_str(rec.ratio),
        "ratio_float": float(rec.ratio),
        "bound_upper": _fraction_str(rec.bound_upper) or None,
        "bound_alpha": _fraction_str(rec.bound_alpha) or None,
        "rist_provenance": rec.rist_provenance,
    }


def ledger_to_dict(ledger: BoundLedger) -> dict:
    return {
        "record": record_to_dict(ledger.record),
        "level_order": ledger.level_order,
        "level_width": ledger.level_width,
        "upper_value": ledger.upper_value,
        "upper_holds": ledger.upper_holds,
        "lower_value": ledger.lower_value,
        "lower_holds": ledger.lower_holds,
        "rist_index": ledger.rist_index,
        "alpha_value": ledger.alpha_value,
        "alpha_bound": _fraction_str(ledger.alpha_bound),
        "alpha_holds": ledger.alpha_holds,
        "alpha_asserted": ledger.alpha_asserted,
        "rist_provenance": ledger.rist_provenance,
        "section_sizes": list(ledger.section_sizes),
        "rist_section_sizes": list(ledger.rist_section_sizes),
    }
