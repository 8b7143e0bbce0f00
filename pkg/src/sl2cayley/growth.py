"""Product sets, growth exponents, congruence covering and sumset covering.

Subsets of a product group are boolean masks over a GroupIndex; additive
triple sets are boolean arrays over Z/q1 x Z/q2 x Z/q3.  The covering
searches iterate product sets / sumsets until they stabilize (the identity,
resp. zero, always belongs, so the iterates are nested) and certify the
least power covering the best reachable congruence subgroup or sublattice.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .modarith import factorize
from .sl2core import GroupIndex, get_factor_group
from .walk import GroupMeasure, _get_tables


@dataclass
class GroupSubset:
    """Subset of a GroupIndex as a boolean membership mask."""

    group: GroupIndex
    mask: np.ndarray

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != (self.group.size,):
            raise ValueError("mask shape does not match index size")

    @classmethod
    def from_positions(cls, group: GroupIndex, positions) -> "GroupSubset":
        mask = np.zeros(group.size, dtype=bool)
        pos = np.asarray(list(positions), dtype=np.int64)
        if pos.size and (pos.min() < 0 or pos.max() >= group.size):
            raise IndexError("position out of range")
        mask[pos] = True
        return cls(group, mask)

    @property
    def size(self) -> int:
        return int(np.count_nonzero(self.mask))

    def positions(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def is_symmetric(self) -> bool:
        pos = self.positions()
        if pos.size == 0:
            return True
        return bool(np.all(self.mask[self.group.inverse_positions(pos)]))

    def contains(self, other: "GroupSubset") -> bool:
        return bool(np.all(self.mask[other.mask]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupSubset):
            return NotImplemented
        return self.group is other.group and np.array_equal(self.mask, other.mask)


def save_subset_csv(subset: GroupSubset, path) -> None:
    """Write the subset as a sorted index list (one position per row)."""
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["position"])
        for p in subset.positions():
            w.writerow([int(p)])


def load_subset_csv(group: GroupIndex, path) -> GroupSubset:
    import csv

    with open(path, newline="") as fh:
        positions = [int(row["position"]) for row in csv.DictReader(fh)]
    return GroupSubset.from_positions(group, positions)


def _product_set_tableless(group: GroupIndex, a_pos: np.ndarray,
                           b_pos: np.ndarray) -> np.ndarray:
    out = np.zeros(group.size, dtype=bool)
    for a in a_pos:
        pos = group.mul_positions(np.full(b_pos.size, a, dtype=np.int64), b_pos)
        out[pos] = True
    return out


def product_set(a: GroupSubset, b: GroupSubset) -> GroupSubset:
    """{x*y : x in a, y in b}, exactly."""
    if a.group is not b.group:
        raise ValueError("subsets live on different group indexes")
    a_pos, b_pos = a.positions(), b.positions()
    if a_pos.size == 0 or b_pos.size == 0:
        return GroupSubset(a.group, np.zeros(a.group.size, dtype=bool))
    tabs = _get_tables(a.group)
    if tabs is not None:
        mask = _kernels.product_set(tabs, a_pos, b_pos)
    else:
        mask = _product_set_tableless(a.group, a_pos, b_pos)
    return GroupSubset(a.group, mask)


def triple_product(a: GroupSubset) -> GroupSubset:
    return product_set(product_set(a, a), a)


@dataclass
class GrowthReport:
    size_a: int
    size_aaa: int
    exponent: float
    hypothesis_flags: dict = field(default_factory=dict)


def growth_exponent(a: GroupSubset, chi_power: GroupMeasure | None = None,
                    delta: float | None = None, epsilon: float | None = None
                    ) -> GrowthReport:
    """|A|, |AAA| and e = log|AAA| / log|A| (e = 1 for singletons).

    When a chi^(l) measure and (delta, epsilon) are supplied, the growth
    hypotheses are flagged: chi^(l)(A) > q^-delta with q = max modulus, and
    |A| < |Gamma|^(1-epsilon).
    """
    if a.size == 0:
        raise ValueError("subset must be nonempty")
    size_a = a.size
    size_aaa = triple_product(a).size
    e = 1.0 if size_a == 1 else math.log(size_aaa) / math.log(size_a)
    flags: dict = {}
    if chi_power is not None and delta is not None:
        if chi_power.group is not a.group:
            raise ValueError("chi_power must live on the subset's group index")
        mass = chi_power.mass_of_positions(a.positions())
        q_eff = max(a.group.moduli)
        flags["chi_mass"] = mass
        flags["chi_mass_exceeds_q_to_minus_delta"] = (
            float(mass) > q_eff ** (-delta))
    if epsilon is not None:
        full = a.group.full_order
        flags["size_below_group_power"] = size_a < full ** (1.0 - epsilon)
    return GrowthReport(size_a=size_a, size_aaa=size_aaa, exponent=e,
                        hypothesis_flags=flags)


def _exact_divisors(q: int) -> list[int]:
    """Divisors d with d || q: products of full prime-power components."""
    pairs = factorize(q).pairs
    out = []
    for bits in range(1 << len(pairs)):
        d = 1
        for i, (p, n) in enumerate(pairs):
            if (bits >> i) & 1:
                d *= p**n
        out.append(d)
    return sorted(set(out))


def _all_divisors(q: int) -> list[int]:
    pairs = factorize(q).pairs
    out = [1]
    for p, n in pairs:
        out = [d * p**e for d in out for e in range(n + 1)]
    return sorted(out)


def congruence_subgroup(group: GroupIndex, q_prime: tuple[int, int, int]
                        ) -> GroupSubset:
    """Triples congruent to the identity mod (q1', q2', q3').

    Each qi' must divide the component modulus.  Over the full product group
    the size is prod |SL2(Z/qi)| / |SL2(Z/qi')|; over a proper subgroup the
    returned set is the intersection with that subgroup.
    """
    moduli = group.moduli
    kernel_labels = []
    for f in range(3):
        q, qp = moduli[f], q_prime[f]
        if qp < 1 or q % qp != 0:
            raise ValueError(f"{qp} does not divide component modulus {q}")
        fg = group.factors[f]
        target = get_factor_group(qp)
        red = fg.reduction_labels(target)
        k = np.flatnonzero(red == target.identity)
        assert len(k) * target.order == fg.order
        kernel_labels.append(k)
    k1, k2, k3 = kernel_labels
    n2, n3 = group.factors[1].order, group.factors[2].order
    enc = ((k1[:, None, None] * n2 + k2[None, :, None]) * n3
           + k3[None, None, :]).ravel()
    pos = group.positions_of_enc(enc, strict=False)
    return GroupSubset.from_positions(group, pos[pos >= 0])


@dataclass
class CoverSearchResult:
    found: bool
    k_star: int | None
    q_prime: tuple[int, int, int] | None
    stabilized_at: int | None
    best_covered: tuple[int, int, int] | None
    identity_adjoined: bool = False
    # |A| relative to the actual group vs the (q1 q2 q3)^3 convention, which
    # over-counts (|SL2(Z/q)| < q^3) and can exceed 1 at tiny moduli
    densities: dict | None = None

    def __str__(self) -> str:
        if self.found:
            return (f"covered congruence subgroup mod {self.q_prime} "
                    f"at power {self.k_star}")
        return f"not found; best covered so far: {self.best_covered}"


def _divisor_triples(per_factor: list[list[int]]) -> list[tuple[int, int, int]]:
    triples = list(itertools.product(*per_factor))
    triples.sort(key=lambda t: (t[0] * t[1] * t[2], t))
    return triples


def bounded_generation_search(a: GroupSubset, k_max: int,
                              exact_divisor_mode: bool = True
                              ) -> CoverSearchResult:
    """Least power k with A^k covering the best congruence subgroup that the
    closure of A can cover at all.

    Iterates P_k = A^k (identity adjoined if absent, so the powers are
    nested) until stabilization, recording for every candidate divisor
    triple the first k at which its congruence subgroup is contained.  The
    certified triple minimizes q1'q2'q3' (ties lexicographic) among the
    triples covered by the stabilized closure; k_star is the first power
    covering it.  If the iteration has not stabilized by k_max, reports
    not-found plus the best triple covered so far.
    """
    group = a.group
    if not a.is_symmetric():
        raise ValueError("subset must be symmetric")
    adjoined = False
    mask = a.mask.copy()
    ident = group.identity_position()
    if not mask[ident]:
        mask[ident] = True
        adjoined = True
    base = GroupSubset(group, mask)

    divisors = [(_exact_divisors if exact_divisor_mode else _all_divisors)(q)
                for q in group.moduli]
    triples = _divisor_triples(divisors)
    cong = {t: congruence_subgroup(group, t) for t in triples}
    first_covered: dict[tuple[int, int, int], int] = {}

    p = base
    k = 1
    stabilized_at = None
    while True:
        for t in triples:
            if t not in first_covered and p.contains(cong[t]):
                first_covered[t] = k
        if k >= 2 and np.array_equal(p.mask, prev_mask):
            stabilized_at = k
            break
        if k >= k_max:
            break
        prev_mask = p.mask
        p = product_set(p, base)
        k += 1

    covered = [t for t in triples if t in first_covered]
    best = covered[0] if covered else None
    q1, q2, q3 = group.moduli
    densities = {
        "size": a.size,
        "relative_to_group": a.size / group.full_order,
        "relative_to_q_cubed": a.size / (q1 * q2 * q3) ** 3,
    }
    if stabilized_at is None:
        return CoverSearchResult(found=False, k_star=None, q_prime=None,
                                 stabilized_at=None, best_covered=best,
                                 identity_adjoined=adjoined, densities=densities)
    return CoverSearchResult(found=True, k_star=first_covered[best],
                             q_prime=best, stabilized_at=stabilized_at,
                             best_covered=best, identity_adjoined=adjoined,
                             densities=densities)


@dataclass
class ResidueTripleSet:
    """Subset of Z/q1 x Z/q2 x Z/q3 as a boolean array of shape (q1, q2, q3)."""

    moduli: tuple[int, int, int]
    mask: np.ndarray

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != tuple(self.moduli):
            raise ValueError("mask shape does not match moduli")

    @classmethod
    def from_elements(cls, moduli: tuple[int, int, int], elements) -> "ResidueTripleSet":
        mask = np.zeros(tuple(moduli), dtype=bool)
        for e in elements:
            mask[e[0] % moduli[0], e[1] % moduli[1], e[2] % moduli[2]] = True
        return cls(moduli, mask)

    @classmethod
    def full(cls, moduli: tuple[int, int, int]) -> "ResidueTripleSet":
        return cls(moduli, np.ones(tuple(moduli), dtype=bool))

    @property
    def size(self) -> int:
        return int(np.count_nonzero(self.mask))

    def elements(self) -> np.ndarray:
        return np.argwhere(self.mask)


def pointwise_product_set(a: ResidueTripleSet, b: ResidueTripleSet) -> ResidueTripleSet:
    """{(a1*b1, a2*b2, a3*b3) mod (q1,q2,q3)} over all pairs."""
    if a.moduli != b.moduli:
        raise ValueError("modulus mismatch")
    q = np.array(a.moduli, dtype=np.int64)
    ea, eb = a.elements(), b.elements()
    prod = (ea[:, None, :] * eb[None, :, :]) % q
    prod = prod.reshape(-1, 3)
    mask = np.zeros(tuple(a.moduli), dtype=bool)
    mask[prod[:, 0], prod[:, 1], prod[:, 2]] = True
    return ResidueTripleSet(a.moduli, mask)


def difference_set(a: ResidueTripleSet, b: ResidueTripleSet) -> ResidueTripleSet:
    if a.moduli != b.moduli:
        raise ValueError("modulus mismatch")
    q = np.array(a.moduli, dtype=np.int64)
    ea, eb = a.elements(), b.elements()
    diff = (ea[:, None, :] - eb[None, :, :]) % q
    diff = diff.reshape(-1, 3)
    mask = np.zeros(tuple(a.moduli), dtype=bool)
    mask[diff[:, 0], diff[:, 1], diff[:, 2]] = True
    return ResidueTripleSet(a.moduli, mask)


def sumset(a: ResidueTripleSet, b: ResidueTripleSet) -> ResidueTripleSet:
    """a + b by rolling a's mask over b's elements (exact, cyclic)."""
    if a.moduli != b.moduli:
        raise ValueError("modulus mismatch")
    out = np.zeros(tuple(a.moduli), dtype=bool)
    for e in b.elements():
        out |= np.roll(a.mask, shift=tuple(e), axis=(0, 1, 2))
    return ResidueTripleSet(a.moduli, out)


def _lattice_mask(moduli: tuple[int, int, int], d: tuple[int, int, int]) -> np.ndarray:
    mask = np.zeros(tuple(moduli), dtype=bool)
    mask[np.ix_(*(np.flatnonzero(np.arange(q) % di == 0)
                  for q, di in zip(moduli, d)))] = True
    return mask


def sumset_cover(a: ResidueTripleSet, b: ResidueTripleSet, m_max: int
                 ) -> CoverSearchResult:
    """Least m with the m-fold sumset of C = AB - AB covering the best
    divisor sublattice the additive closure of C can cover.

    Divisors here are ordinary (d | q), the sublattice is d1Z/q1 x d2Z/q2 x
    d3Z/q3, and minimality is by product then lexicographic order.  Since
    0 is in C, the sumsets are nested and stabilize to the subgroup C
    generates; not-found reports the best lattice covered by m_max.
    """
    if a.size == 0 or b.size == 0:
        raise ValueError("input sets must be nonempty")
    ab = pointwise_product_set(a, b)
    c = difference_set(ab, ab)
    moduli = a.moduli
    divisors = [_all_divisors(q) for q in moduli]
    triples = _divisor_triples(divisors)
    lattices = {t: _lattice_mask(moduli, t) for t in triples}
    first_covered: dict[tuple[int, int, int], int] = {}

    s = c
    m = 1
    stabilized_at = None
    while True:
        for t in triples:
            if t not in first_covered and bool(np.all(s.mask[lattices[t]])):
                first_covered[t] = m
        if m >= 2 and np.array_equal(s.mask, prev_mask):
            stabilized_at = m
            break
        if m >= m_max:
            break
        prev_mask = s.mask
        s = sumset(s, c)
        m += 1

    covered = [t for t in triples if t in first_covered]
    best = covered[0] if covered else None
    if stabilized_at is None:
        return CoverSearchResult(found=False, k_star=None, q_prime=None,
                                 stabilized_at=None, best_covered=best)
    return CoverSearchResult(found=True, k_star=first_covered[best],
                             q_prime=best, stabilized_at=stabilized_at,
                             best_covered=best)
