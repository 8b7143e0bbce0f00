"""Symmetric generating sets over Z and BFS generation of reduced subgroups.

A generating set is a multiset of triples of det-1 integer matrices, closed
under componentwise inversion.  Reduction mod (q1, q2, q3) followed by BFS
closure produces the finite vertex set of the Cayley graph; the discovery
order (parent position, then generator position) fixes the vertex numbering.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import CapExceededError
from .sl2core import (
    PRODUCT_CAP,
    GroupIndex,
    IntMatrix,
    ResidueMatrix,
    get_factor_group,
    int_det,
    int_mat_inv,
)

IntTriple = tuple[IntMatrix, IntMatrix, IntMatrix]


def _as_triple(raw) -> IntTriple:
    mats = []
    for m in raw:
        mat = tuple(tuple(int(x) for x in row) for row in m)
        if len(mat) != 2 or any(len(r) != 2 for r in mat):
            raise ValueError(f"not a 2x2 matrix: {m!r}")
        if int_det(mat) != 1:
            raise ValueError(f"matrix {mat} does not have determinant 1")
        mats.append(mat)
    if len(mats) != 3:
        raise ValueError("a generator must be a triple of matrices")
    return tuple(mats)


def triple_inverse(t: IntTriple) -> IntTriple:
    return tuple(int_mat_inv(m) for m in t)


@dataclass(frozen=True)
class GeneratingSet:
    """Multiset of integer-matrix triples; must satisfy S = S^-1 with multiplicity."""

    triples: tuple[IntTriple, ...]

    def __post_init__(self):
        if not self.triples:
            raise ValueError("generating set must be nonempty")

    def __len__(self) -> int:
        return len(self.triples)

    @classmethod
    def from_triples(cls, raw) -> "GeneratingSet":
        return cls(tuple(_as_triple(t) for t in raw))

    @classmethod
    def symmetrized(cls, raw) -> "GeneratingSet":
        """Adjoin inverses of the given triples (skipping self-inverse duplicates)."""
        triples = []
        for t in (_as_triple(x) for x in raw):
            triples.append(t)
            ti = triple_inverse(t)
            if ti != t:
                triples.append(ti)
        return cls(tuple(triples))

    @classmethod
    def from_json(cls, text: str) -> "GeneratingSet":
        data = json.loads(text)
        if not isinstance(data, list):
            raise ValueError("generating-set JSON must be an array of triples")
        s = cls.from_triples(data)
        report = validate_symmetric(s)
        if report is not None:
            raise ValueError(f"generating set is not symmetric: {report}")
        return s

    def to_json(self) -> str:
        return json.dumps([[list(map(list, m)) for m in t] for t in self.triples])

    def reduced_labels(self, moduli: tuple[int, int, int]) -> np.ndarray:
        """(k, 3) factor labels of the generators mod the given moduli."""
        factors = [get_factor_group(q) for q in moduli]
        out = np.empty((len(self.triples), 3), dtype=np.int64)
        for i, t in enumerate(self.triples):
            for f in range(3):
                q = moduli[f]
                m = t[f]
                out[i, f] = factors[f].label_of_entries(
                    m[0][0] % q, m[0][1] % q, m[1][0] % q, m[1][1] % q)
        return out


def validate_symmetric(s: GeneratingSet) -> str | None:
    """None if S = S^-1 with equal multiplicities, else a violation report."""
    counts = Counter(s.triples)
    for t, n in counts.items():
        ni = counts.get(triple_inverse(t), 0)
        if ni != n:
            return (f"triple {t} has multiplicity {n} but its inverse has "
                    f"multiplicity {ni}")
    return None


def require_symmetric(s: GeneratingSet) -> None:
    report = validate_symmetric(s)
    if report is not None:
        raise ValueError(f"generating set is not symmetric: {report}")


VISITED_CAP = 70_000_000  # byte-per-element scratch bitmap for the BFS


def generated_subgroup(s: GeneratingSet, moduli: tuple[int, int, int],
                       cap: int = PRODUCT_CAP) -> GroupIndex:
    """BFS closure of the reduced generators, as a GroupIndex in discovery order.

    Discovery order: identity first, then for each BFS level the new elements
    sorted by (parent position, generator position).  This matches a serial
    FIFO BFS and is independent of any parallelism.

    The cap bounds the materialized subgroup, not the ambient product: small
    subgroups of large products (the diagonal mod (8,8,8), say) stay cheap.
    Only the visited bitmap scales with the full product order.
    """
    factors = tuple(get_factor_group(q) for q in moduli)
    n1, n2, n3 = (f.order for f in factors)
    full = n1 * n2 * n3
    if full > VISITED_CAP:
        raise CapExceededError(
            f"product group order {full} exceeds the BFS scratch cap {VISITED_CAP}")
    gen_labels = s.reduced_labels(moduli)
    # Right-multiplication permutations per generator and factor.
    perms = []
    for i in range(len(gen_labels)):
        row = []
        for f in range(3):
            mat = factors[f].matrix_at(int(gen_labels[i, f]))
            row.append(factors[f].right_mult_perm(mat))
        perms.append(row)

    ident = (factors[0].identity * n2 + factors[1].identity) * n3 + factors[2].identity
    visited = np.zeros(full, dtype=bool)
    visited[ident] = True
    order = [np.array([ident], dtype=np.int64)]
    frontier = order[0]
    count = 1
    while frontier.size:
        i3 = frontier % n3
        r = frontier // n3
        i2 = r % n2
        i1 = r // n2
        cand = np.empty((frontier.size, len(perms)), dtype=np.int64)
        for j, (p1, p2, p3) in enumerate(perms):
            cand[:, j] = (p1[i1] * n2 + p2[i2]) * n3 + p3[i3]
        flat = cand.ravel()  # row-major: parent-major then generator
        new = flat[~visited[flat]]
        if new.size:
            # first occurrence in (parent, generator) order
            _, first = np.unique(new, return_index=True)
            new = new[np.sort(first)]
            visited[new] = True
            count += new.size
            if count > cap:
                raise CapExceededError(
                    f"generated subgroup exceeds the index cap {cap}")
        order.append(new)
        frontier = new
    enc = np.concatenate(order[:-1]) if order[-1].size == 0 else np.concatenate(order)
    labels = np.stack([enc // (n2 * n3), (enc // n3) % n2, enc % n3], axis=1)
    return GroupIndex(factors, labels)


def surjectivity_check(s: GeneratingSet, moduli: tuple[int, int, int],
                       cap: int = PRODUCT_CAP) -> tuple[bool, int, GroupIndex]:
    """Whether the reduced subgroup is all of the product group.

    Returns (surjective, index of the reached subgroup, the subgroup index).
    """
    g = generated_subgroup(s, moduli, cap=cap)
    return g.is_full, g.full_order // g.size, g
