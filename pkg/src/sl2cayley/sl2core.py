"""Exact arithmetic and enumeration in SL2(Z/qZ) and triple products thereof.

Two layers live here.  The object layer (ResidueMatrix, TripleElement) is for
small exact computations and the public API.  The indexed layer (FactorGroup,
GroupIndex) backs everything performance-sensitive: elements become integer
labels, group multiplication becomes table lookups, and downstream modules
(cayley, walk, growth) operate on numpy arrays of labels.

Element order is lexicographic in (a, b, c, d) for enumerated factor groups,
so vertex numbering is reproducible across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapExceededError
from .modarith import factorize

FACTOR_ENUM_CAP = 2_000_000
PRODUCT_CAP = 10_000_000

IntMatrix = tuple[tuple[int, int], tuple[int, int]]

INT_A: IntMatrix = ((1, 1), (0, 1))
INT_B: IntMatrix = ((1, 0), (1, 1))
INT_IDENTITY: IntMatrix = ((1, 0), (0, 1))


def int_mat_mul(x: IntMatrix, y: IntMatrix) -> IntMatrix:
    return (
        (x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]),
        (x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]),
    )


def int_mat_inv(x: IntMatrix) -> IntMatrix:
    """Inverse of an integer matrix with det 1: adjugate."""
    if int_det(x) != 1:
        raise ValueError(f"matrix {x} does not have determinant 1")
    return ((x[1][1], -x[0][1]), (-x[1][0], x[0][0]))


def int_det(x: IntMatrix) -> int:
    return x[0][0] * x[1][1] - x[0][1] * x[1][0]


@dataclass(frozen=True)
class ResidueMatrix:
    """A 2x2 matrix over Z/qZ with determinant 1, entries canonical in [0, q)."""

    q: int
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"modulus must be >= 1, got {self.q}")
        for e in (self.a, self.b, self.c, self.d):
            if not 0 <= e < max(self.q, 1):
                raise ValueError(f"entry {e} not reduced mod {self.q}")
        if (self.a * self.d - self.b * self.c) % self.q != 1 % self.q:
            raise ValueError(f"determinant of {self.entries} is not 1 mod {self.q}")

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    @classmethod
    def identity(cls, q: int) -> "ResidueMatrix":
        if q == 1:
            return cls(1, 0, 0, 0, 0)
        return cls(q, 1, 0, 0, 1)

    def __mul__(self, other: "ResidueMatrix") -> "ResidueMatrix":
        return mat_mul(self, other)

    def inv(self) -> "ResidueMatrix":
        return mat_inv(self)

    def is_identity(self) -> bool:
        return self == ResidueMatrix.identity(self.q)


def mat_mul(x: ResidueMatrix, y: ResidueMatrix) -> ResidueMatrix:
    if x.q != y.q:
        raise ValueError(f"modulus mismatch: {x.q} vs {y.q}")
    q = x.q
    return ResidueMatrix(
        q,
        (x.a * y.a + x.b * y.c) % q,
        (x.a * y.b + x.b * y.d) % q,
        (x.c * y.a + x.d * y.c) % q,
        (x.c * y.b + x.d * y.d) % q,
    )


def mat_inv(x: ResidueMatrix) -> ResidueMatrix:
    # det 1 makes the adjugate the inverse.
    q = x.q
    return ResidueMatrix(q, x.d % q, -x.b % q, -x.c % q, x.a % q)


def reduce_int_matrix(m: IntMatrix, q: int) -> ResidueMatrix:
    """Residue map on a det-1 integer matrix; functorial for the group law."""
    if int_det(m) != 1:
        raise ValueError(f"integer matrix {m} does not have determinant 1")
    return ResidueMatrix(q, m[0][0] % q, m[0][1] % q, m[1][0] % q, m[1][1] % q)


@dataclass(frozen=True)
class TripleElement:
    """An element of SL2(Z/q1) x SL2(Z/q2) x SL2(Z/q3)."""

    g1: ResidueMatrix
    g2: ResidueMatrix
    g3: ResidueMatrix

    @property
    def moduli(self) -> tuple[int, int, int]:
        return (self.g1.q, self.g2.q, self.g3.q)

    @property
    def components(self) -> tuple[ResidueMatrix, ResidueMatrix, ResidueMatrix]:
        return (self.g1, self.g2, self.g3)

    @classmethod
    def identity(cls, moduli: tuple[int, int, int]) -> "TripleElement":
        return cls(*(ResidueMatrix.identity(q) for q in moduli))

    def __mul__(self, other: "TripleElement") -> "TripleElement":
        return TripleElement(*(mat_mul(a, b) for a, b in zip(self.components, other.components)))

    def inv(self) -> "TripleElement":
        return TripleElement(*(mat_inv(g) for g in self.components))


def project(g: TripleElement, i: int) -> ResidueMatrix:
    """Component i (1-based) of a triple."""
    if i not in (1, 2, 3):
        raise ValueError(f"factor index must be 1, 2 or 3, got {i}")
    return g.components[i - 1]


def reduce_triple(
    g: TripleElement | tuple[IntMatrix, IntMatrix, IntMatrix],
    moduli: tuple[int, int, int],
) -> TripleElement:
    """Componentwise reduction of a triple (integer lift or coarser residues)."""
    comps = []
    if isinstance(g, TripleElement):
        for mat, q in zip(g.components, moduli):
            if mat.q % q != 0:
                raise ValueError(f"target modulus {q} does not divide source modulus {mat.q}")
            comps.append(ResidueMatrix(q, mat.a % q, mat.b % q, mat.c % q, mat.d % q))
    else:
        for mat, q in zip(g, moduli):
            comps.append(reduce_int_matrix(mat, q))
    return TripleElement(*comps)


def group_order(q: int) -> int:
    """|SL2(Z/qZ)| = q^3 prod_{p|q} (1 - p^-2), computed exactly."""
    if q < 1:
        raise ValueError(f"modulus must be >= 1, got {q}")
    n = q**3
    for p in factorize(q).primes:
        n = n * (p * p - 1) // (p * p)
    return n


def _enumerate_entries(q: int, cap: int) -> np.ndarray:
    """All (a,b,c,d) in [0,q)^4 with ad - bc = 1 mod q, lexicographic order."""
    if q == 1:
        return np.zeros((1, 4), dtype=np.int64)
    if group_order(q) > cap:
        raise CapExceededError(
            f"|SL2(Z/{q})| = {group_order(q)} exceeds enumeration cap {cap}"
        )
    rows = []
    r = np.arange(q, dtype=np.int64)
    b, c, d = np.meshgrid(r, r, r, indexing="ij")
    b, c, d = b.ravel(), c.ravel(), d.ravel()
    for a in range(q):
        mask = (a * d - b * c) % q == 1
        block = np.empty((int(mask.sum()), 4), dtype=np.int64)
        block[:, 0] = a
        block[:, 1] = b[mask]
        block[:, 2] = c[mask]
        block[:, 3] = d[mask]
        rows.append(block)
    return np.concatenate(rows, axis=0)


class FactorGroup:
    """Enumerated SL2(Z/qZ) with integer labels and vectorized arithmetic.

    Labels follow the lexicographic order of (a, b, c, d).  The encoded key
    ((a*q + b)*q + c)*q + d is therefore strictly increasing with the label,
    which makes label lookup a binary search.
    """

    def __init__(self, q: int, cap: int = FACTOR_ENUM_CAP):
        self.q = q
        self.elements = _enumerate_entries(q, cap)
        self.order = len(self.elements)
        qq = max(q, 1)
        e = self.elements
        self._enc = ((e[:, 0] * qq + e[:, 1]) * qq + e[:, 2]) * qq + e[:, 3]
        self.identity = self.label_of_entries(*ResidueMatrix.identity(q).entries)
        self.inverse = self._label_inverse()
        self._mul_table = None

    @property
    def mul_table(self):
        """Index multiplication table, built lazily; None for groups too
        large to afford the order^2 array."""
        if self._mul_table is None and self.order <= 4096:
            self._mul_table = self._build_mul_table()
        return self._mul_table

    def labels_of(self, a, b, c, d) -> np.ndarray:
        """Vectorized entry-tuple -> label lookup (entries already reduced)."""
        qq = max(self.q, 1)
        key = ((np.asarray(a, dtype=np.int64) * qq + b) * qq + c) * qq + d
        pos = np.searchsorted(self._enc, key)
        if np.any(self._enc[np.minimum(pos, self.order - 1)] != key):
            raise ValueError("entries do not define elements of the group")
        return pos.astype(np.int64)

    def label_of_entries(self, a: int, b: int, c: int, d: int) -> int:
        return int(self.labels_of(a, b, c, d))

    def label_of(self, m: ResidueMatrix) -> int:
        if m.q != self.q:
            raise ValueError(f"modulus mismatch: {m.q} vs {self.q}")
        return self.label_of_entries(*m.entries)

    def matrix_at(self, label: int) -> ResidueMatrix:
        a, b, c, d = (int(x) for x in self.elements[label])
        return ResidueMatrix(self.q, a, b, c, d)

    def _label_inverse(self) -> np.ndarray:
        q = max(self.q, 1)
        e = self.elements
        return self.labels_of(e[:, 3] % q, -e[:, 1] % q, -e[:, 2] % q, e[:, 0] % q)

    def mul_labels(self, i, j) -> np.ndarray:
        """Vectorized label multiplication (broadcasting over i, j)."""
        if self.mul_table is not None:
            return self.mul_table[i, j].astype(np.int64)
        q = max(self.q, 1)
        x = self.elements[np.asarray(i, dtype=np.int64)]
        y = self.elements[np.asarray(j, dtype=np.int64)]
        a = (x[..., 0] * y[..., 0] + x[..., 1] * y[..., 2]) % q
        b = (x[..., 0] * y[..., 1] + x[..., 1] * y[..., 3]) % q
        c = (x[..., 2] * y[..., 0] + x[..., 3] * y[..., 2]) % q
        d = (x[..., 2] * y[..., 1] + x[..., 3] * y[..., 3]) % q
        return self.labels_of(a, b, c, d)

    def _build_mul_table(self) -> np.ndarray:
        n = self.order
        q = max(self.q, 1)
        e = self.elements
        x = e[:, None, :]
        y = e[None, :, :]
        a = (x[..., 0] * y[..., 0] + x[..., 1] * y[..., 2]) % q
        b = (x[..., 0] * y[..., 1] + x[..., 1] * y[..., 3]) % q
        c = (x[..., 2] * y[..., 0] + x[..., 3] * y[..., 2]) % q
        d = (x[..., 2] * y[..., 1] + x[..., 3] * y[..., 3]) % q
        return self.labels_of(a, b, c, d).astype(np.int32).reshape(n, n)

    def right_mult_perm(self, s: ResidueMatrix) -> np.ndarray:
        """Permutation g -> g*s as a label array."""
        if s.q != self.q:
            raise ValueError("modulus mismatch")
        q = max(self.q, 1)
        e = self.elements
        a = (e[:, 0] * s.a + e[:, 1] * s.c) % q
        b = (e[:, 0] * s.b + e[:, 1] * s.d) % q
        c = (e[:, 2] * s.a + e[:, 3] * s.c) % q
        d = (e[:, 2] * s.b + e[:, 3] * s.d) % q
        return self.labels_of(a, b, c, d)

    def reduction_labels(self, target: "FactorGroup") -> np.ndarray:
        """Label map for the reduction SL2(Z/q) -> SL2(Z/q') with q' | q."""
        if target.q < 1 or self.q % target.q != 0:
            raise ValueError(f"{target.q} does not divide {self.q}")
        t = max(target.q, 1)
        e = self.elements
        return target.labels_of(e[:, 0] % t, e[:, 1] % t, e[:, 2] % t, e[:, 3] % t)


@lru_cache(maxsize=64)
def get_factor_group(q: int) -> FactorGroup:
    return FactorGroup(q)


def enumerate_group(q: int, cap: int = FACTOR_ENUM_CAP) -> list[ResidueMatrix]:
    """All elements of SL2(Z/qZ) in lexicographic entry order."""
    fg = FactorGroup(q, cap=cap)
    return [fg.matrix_at(i) for i in range(fg.order)]


class GroupIndex:
    """Bijection between a finite set of triples and [0, N).

    Stores per-factor labels as an (N, 3) array; the element at position i is
    the triple of factor elements with those labels.  Position order is
    whatever the constructor was given (BFS discovery order for generated
    subgroups, lexicographic for full products).
    """

    def __init__(self, factors: tuple[FactorGroup, FactorGroup, FactorGroup],
                 labels: np.ndarray):
        self.factors = factors
        self.labels = np.ascontiguousarray(labels, dtype=np.int64)
        self.size = len(self.labels)
        n2, n3 = factors[1].order, factors[2].order
        self._enc = (self.labels[:, 0] * n2 + self.labels[:, 1]) * n3 + self.labels[:, 2]
        self._order = np.argsort(self._enc, kind="stable")
        self._enc_sorted = self._enc[self._order]
        if self.size > 1 and np.any(self._enc_sorted[1:] == self._enc_sorted[:-1]):
            raise ValueError("duplicate elements in index")
        # full product: every encoding 0..N-1 occurs, lookup is direct indexing
        self._dense = self.size == self.full_order

    @property
    def moduli(self) -> tuple[int, int, int]:
        return tuple(f.q for f in self.factors)

    @property
    def full_order(self) -> int:
        return self.factors[0].order * self.factors[1].order * self.factors[2].order

    @property
    def is_full(self) -> bool:
        return self.size == self.full_order

    @classmethod
    def full_product(cls, moduli: tuple[int, int, int],
                     cap: int = PRODUCT_CAP) -> "GroupIndex":
        factors = tuple(get_factor_group(q) for q in moduli)
        n1, n2, n3 = (f.order for f in factors)
        if n1 * n2 * n3 > cap:
            raise CapExceededError(
                f"product group order {n1 * n2 * n3} exceeds cap {cap}")
        enc = np.arange(n1 * n2 * n3, dtype=np.int64)
        labels = np.stack([enc // (n2 * n3), (enc // n3) % n2, enc % n3], axis=1)
        return cls(factors, labels)

    def encode_labels(self, labels: np.ndarray) -> np.ndarray:
        n2, n3 = self.factors[1].order, self.factors[2].order
        return (labels[..., 0] * n2 + labels[..., 1]) * n3 + labels[..., 2]

    def positions_of_enc(self, enc: np.ndarray, strict: bool = True) -> np.ndarray:
        """Positions in this index of encoded elements; -1 for absent (strict=False)."""
        enc = np.asarray(enc, dtype=np.int64)
        if self._dense:
            found = (enc >= 0) & (enc < self.size)
            if strict:
                if not np.all(found):
                    raise KeyError("element not present in index")
                return self._order[enc]
            return np.where(found, self._order[np.where(found, enc, 0)], -1)
        pos = np.searchsorted(self._enc_sorted, enc)
        pos = np.minimum(pos, max(self.size - 1, 0))
        found = self._enc_sorted[pos] == enc
        if strict and not np.all(found):
            raise KeyError("element not present in index")
        out = self._order[pos]
        if not strict:
            out = np.where(found, out, -1)
        return out

    def index_of(self, g: TripleElement) -> int:
        labels = np.array([[f.label_of(c) for f, c in zip(self.factors, g.components)]],
                          dtype=np.int64)
        return int(self.positions_of_enc(self.encode_labels(labels))[0])

    def element_at(self, i: int) -> TripleElement:
        l1, l2, l3 = (int(x) for x in self.labels[i])
        return TripleElement(self.factors[0].matrix_at(l1),
                             self.factors[1].matrix_at(l2),
                             self.factors[2].matrix_at(l3))

    def __len__(self) -> int:
        return self.size

    def identity_position(self) -> int:
        return self.index_of(TripleElement.identity(self.moduli))

    def mul_positions(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        """Positions of products element_at(i) * element_at(j); KeyError if absent."""
        li = self.labels[np.asarray(i, dtype=np.int64)]
        lj = self.labels[np.asarray(j, dtype=np.int64)]
        out = np.empty(np.broadcast(li[..., 0], lj[..., 0]).shape + (3,), dtype=np.int64)
        for f in range(3):
            out[..., f] = self.factors[f].mul_labels(li[..., f], lj[..., f])
        return self.positions_of_enc(self.encode_labels(out))

    def inverse_positions(self, i: np.ndarray) -> np.ndarray:
        li = self.labels[np.asarray(i, dtype=np.int64)]
        out = np.empty_like(li)
        for f in range(3):
            out[..., f] = self.factors[f].inverse[li[..., f]]
        return self.positions_of_enc(self.encode_labels(out))
