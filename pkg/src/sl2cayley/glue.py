"""Approximate-homomorphism dichotomy and the Lie-bracket covering check.

The dichotomy: a map psi between finite groups either fails multiplicativity
on more than an epsilon fraction of pairs, or agrees with a genuine
homomorphism on all but a sqrt(epsilon) fraction of points.  Recovery is by
exhaustive search over generator images, which is the honest oracle at desk
scale; a table-driven extension check keeps each candidate linear in |G1|.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import CapExceededError
from .modarith import factorize
from .sl2core import GroupIndex
from .walk import _get_tables

PAIR_COUNT_MAX = 10_000
RECOVERY_SEARCH_MAX = 10_000_000
EPSILON_SUP = Fraction(1, 1600)


@dataclass
class MapTable:
    """Total map between two indexed finite groups, as an image array."""

    g1: GroupIndex
    g2: GroupIndex
    image: np.ndarray

    def __post_init__(self):
        self.image = np.asarray(self.image, dtype=np.int64)
        if self.image.shape != (self.g1.size,):
            raise ValueError("image must assign a value to every element of G1")
        if self.image.size and (self.image.min() < 0 or self.image.max() >= self.g2.size):
            raise ValueError("image values must be positions in G2")

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["source_index", "target_index"])
            for i, t in enumerate(self.image):
                w.writerow([i, int(t)])

    @classmethod
    def from_csv(cls, g1: GroupIndex, g2: GroupIndex, path: str | Path) -> "MapTable":
        image = np.full(g1.size, -1, dtype=np.int64)
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                image[int(row["source_index"])] = int(row["target_index"])
        if np.any(image < 0):
            raise ValueError("CSV does not cover every source element")
        return cls(g1, g2, image)


def _pairs_tableless(psi: MapTable) -> int:
    n = psi.g1.size
    img = psi.image
    total = 0
    ys = np.arange(n, dtype=np.int64)
    for x in range(n):
        xy = psi.g1.mul_positions(np.full(n, x, dtype=np.int64), ys)
        rhs = psi.g2.mul_positions(np.full(n, img[x], dtype=np.int64), img[ys])
        total += int(np.count_nonzero(img[xy] != rhs))
    return total


def multiplicativity_failures(psi: MapTable, threads: int = 1
                              ) -> tuple[int, Fraction]:
    """Exact count and fraction of pairs (x, y) with psi(xy) != psi(x)psi(y)."""
    n = psi.g1.size
    if n > PAIR_COUNT_MAX:
        raise CapExceededError(
            f"pair enumeration caps at |G1| = {PAIR_COUNT_MAX}, got {n}")
    t1, t2 = _get_tables(psi.g1), _get_tables(psi.g2)
    if t1 is not None and t2 is not None:
        count = _kernels.pair_failures(t1, psi.image, t2, threads=threads)
    else:
        count = _pairs_tableless(psi)
    return count, Fraction(count, n * n)


def group_bfs_words(group: GroupIndex, gen_positions: np.ndarray
                    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """BFS of the whole index from the identity through the generators.

    Returns (order, parent, gen_idx): positions in discovery order; for each
    non-identity discovered position p, parent[p] and gen_idx[p] satisfy
    element(p) = element(parent) * generator(gen_idx).  Raises when the
    generators do not reach every element.
    """
    n = group.size
    gen_positions = np.asarray(gen_positions, dtype=np.int64)
    ident = group.identity_position()
    parent = np.full(n, -1, dtype=np.int64)
    gen_idx = np.full(n, -1, dtype=np.int64)
    seen = np.zeros(n, dtype=bool)
    seen[ident] = True
    order = [ident]
    frontier = np.array([ident], dtype=np.int64)
    while frontier.size:
        new_list = []
        for j, s in enumerate(gen_positions):
            tgt = group.mul_positions(frontier, np.full(frontier.size, s,
                                                        dtype=np.int64))
            fresh = ~seen[tgt]
            if np.any(fresh):
                tpos = tgt[fresh]
                _, first = np.unique(tpos, return_index=True)
                keep = np.sort(first)
                tpos = tpos[keep]
                still = ~seen[tpos]
                tpos = tpos[still]
                seen[tpos] = True
                parent[tpos] = frontier[fresh][keep][still]
                gen_idx[tpos] = j
                new_list.append(tpos)
        frontier = np.concatenate(new_list) if new_list else np.array([], dtype=np.int64)
        order.extend(frontier.tolist())
    if len(order) != n:
        raise ValueError("generator list does not generate the group "
                         f"({len(order)} of {n} elements reached)")
    return np.array(order, dtype=np.int64), parent, gen_idx


@dataclass
class DichotomyResult:
    case: str  # "far" | "structured" | "violation-candidate"
    failures: int
    failure_ratio: Fraction
    agreement: int | None = None
    agreement_set: np.ndarray | None = None
    hom_gen_images: tuple[int, ...] | None = None
    hom_image: np.ndarray | None = None


def _best_homomorphism(g1: GroupIndex, g2: GroupIndex, psi_img: np.ndarray,
                       gen_positions: np.ndarray, chunk: int = 4096
                       ) -> tuple[int, tuple[int, ...], np.ndarray] | None:
    """Exhaustive generator-image search; returns the homomorphism agreeing
    with psi on the most points (first in lexicographic image order on ties),
    or None when no generator assignment extends to a homomorphism."""
    n1, n2 = g1.size, g2.size
    k = len(gen_positions)
    if n2**k > RECOVERY_SEARCH_MAX:
        raise CapExceededError(
            f"homomorphism search space {n2}^{k} exceeds {RECOVERY_SEARCH_MAX}")
    order, parent, gen_idx = group_bfs_words(g1, gen_positions)
    ident1, ident2 = g1.identity_position(), g2.identity_position()
    # products x * s_j for the relation check
    xs = np.arange(n1, dtype=np.int64)
    mul_with_gen = np.stack([
        g1.mul_positions(xs, np.full(n1, s, dtype=np.int64))
        for s in gen_positions], axis=1)  # (n1, k)

    best = None  # (agreement, images tuple, f)
    total = n2**k
    for start in range(0, total, chunk):
        count = min(chunk, total - start)
        lin = np.arange(start, start + count, dtype=np.int64)
        imgs = np.empty((count, k), dtype=np.int64)
        rem = lin
        for j in range(k - 1, -1, -1):
            imgs[:, j] = rem % n2
            rem = rem // n2
        f = np.empty((count, n1), dtype=np.int64)
        f[:, ident1] = ident2
        for p in order[1:]:
            f[:, p] = g2.mul_positions(f[:, parent[p]], imgs[:, gen_idx[p]])
        valid = np.ones(count, dtype=bool)
        for j in range(k):
            lhs = f[np.arange(count)[:, None], mul_with_gen[xs, j][None, :]]
            rhs = g2.mul_positions(f[:, xs], imgs[:, j][:, None])
            valid &= np.all(lhs == rhs, axis=1)
        if not np.any(valid):
            continue
        agree = np.sum(f == psi_img[None, :], axis=1)
        agree = np.where(valid, agree, -1)
        top = int(agree.max())
        if top < 0:
            continue
        idx = int(np.argmax(agree))  # first occurrence = lexicographically least
        if best is None or top > best[0]:
            best = (top, tuple(int(v) for v in imgs[idx]), f[idx].copy())
    return best


def dichotomy_test(psi: MapTable, epsilon: float | Fraction,
                   gen_positions, threads: int = 1) -> DichotomyResult:
    """Prop-6.1-shaped dichotomy decision for a map between finite groups.

    Case "far": fewer than (1-epsilon)|G1|^2 multiplicative pairs.  Case
    "structured": a homomorphism found agreeing with psi on more than
    (1-sqrt(epsilon))|G1| points; its agreement set and generator images are
    returned as the certificate.  Any other outcome is reported as
    "violation-candidate", which (for epsilon in range) indicates a bug and
    is asserted against in the verification suites.
    """
    eps = Fraction(epsilon)
    if not 0 < eps < EPSILON_SUP:
        raise ValueError(f"epsilon must lie in (0, 1/1600), got {epsilon}")
    n1 = psi.g1.size
    failures, ratio = multiplicativity_failures(psi, threads=threads)
    agreeing_pairs = n1 * n1 - failures
    if agreeing_pairs < (1 - eps) * n1 * n1:
        return DichotomyResult(case="far", failures=failures, failure_ratio=ratio)
    gen_positions = np.asarray(gen_positions, dtype=np.int64)
    found = _best_homomorphism(psi.g1, psi.g2, psi.image, gen_positions)
    if found is not None:
        agreement, images, f = found
        if agreement > (1 - math.sqrt(float(eps))) * n1:
            return DichotomyResult(
                case="structured", failures=failures, failure_ratio=ratio,
                agreement=agreement,
                agreement_set=np.flatnonzero(f == psi.image),
                hom_gen_images=images, hom_image=f)
    return DichotomyResult(case="violation-candidate", failures=failures,
                           failure_ratio=ratio,
                           agreement=found[0] if found else None)


@dataclass(frozen=True)
class LieVector:
    """Traceless integer 2x2 matrix in coordinates (x, y, z) <-> [[x, y], [z, -x]]."""

    x: int
    y: int
    z: int

    @classmethod
    def from_matrix(cls, m) -> "LieVector":
        if m[0][0] + m[1][1] != 0:
            raise ValueError(f"matrix {m} is not traceless")
        return cls(int(m[0][0]), int(m[0][1]), int(m[1][0]))

    def to_matrix(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((self.x, self.y), (self.z, -self.x))

    @property
    def is_primitive(self) -> bool:
        return math.gcd(self.x, self.y, self.z) == 1

    def coords(self) -> tuple[int, int, int]:
        return (self.x, self.y, self.z)


def _bracket(a, b):
    return (
        (a[0][0] * b[0][0] + a[0][1] * b[1][0] - (b[0][0] * a[0][0] + b[0][1] * a[1][0]),
         a[0][0] * b[0][1] + a[0][1] * b[1][1] - (b[0][0] * a[0][1] + b[0][1] * a[1][1])),
        (a[1][0] * b[0][0] + a[1][1] * b[1][0] - (b[1][0] * a[0][0] + b[1][1] * a[1][0]),
         a[1][0] * b[0][1] + a[1][1] * b[1][1] - (b[1][0] * a[0][1] + b[1][1] * a[1][1])),
    )


_LIE_BASIS = (((1, 0), (0, -1)), ((0, 1), (0, 0)), ((0, 0), (1, 0)))


def ad_matrix(v: LieVector) -> list[list[int]]:
    """3x3 integer matrix of a -> [v, a] in the (x, y, z) coordinates."""
    cols = []
    for e in _LIE_BASIS:
        br = _bracket(v.to_matrix(), e)
        assert br[0][0] + br[1][1] == 0
        cols.append((br[0][0], br[0][1], br[1][0]))
    return [[cols[j][i] for j in range(3)] for i in range(3)]


def elementary_divisors_3xn(rows: list[list[int]]) -> tuple[int, int, int]:
    """Elementary divisors d1 | d2 | d3 of an integer 3 x n matrix via
    determinantal divisors: d_k = D_k / D_{k-1} with D_k the gcd of all
    k x k minors (0 when the rank is below k)."""
    m = [list(map(int, r)) for r in rows]
    if len(m) != 3:
        raise ValueError("expected 3 rows")
    n = len(m[0])
    d1 = 0
    for r in m:
        for x in r:
            d1 = math.gcd(d1, x)
    d2 = 0
    for r1, r2 in itertools.combinations(range(3), 2):
        for c1, c2 in itertools.combinations(range(n), 2):
            d2 = math.gcd(d2, m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1])
    d3 = 0
    for c1, c2, c3 in itertools.combinations(range(n), 3):
        det = (m[0][c1] * (m[1][c2] * m[2][c3] - m[1][c3] * m[2][c2])
               - m[0][c2] * (m[1][c1] * m[2][c3] - m[1][c3] * m[2][c1])
               + m[0][c3] * (m[1][c1] * m[2][c2] - m[1][c2] * m[2][c1]))
        d3 = math.gcd(d3, det)
    e1 = d1
    e2 = d2 // d1 if d1 else 0
    e3 = d3 // d2 if d2 else 0
    return e1, e2, e3


def commutator_cover_check(v: LieVector, w: LieVector, q: int
                           ) -> tuple[bool, dict]:
    """Whether [v, V] + [w, V] contains 2V mod q (V = traceless matrices).

    Decided via the elementary divisors of the 3x6 integer matrix of
    (a, b) -> [v, a] + [w, b]: the image mod q contains 2V iff every
    elementary divisor's gcd with q divides 2.  Preconditions: v, w
    primitive and linearly independent mod every prime dividing q.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if not v.is_primitive or not w.is_primitive:
        raise ValueError("v and w must be primitive (gcd of coordinates 1)")
    vx, vy, vz = v.coords()
    wx, wy, wz = w.coords()
    minors = (vx * wy - vy * wx, vx * wz - vz * wx, vy * wz - vz * wy)
    g = math.gcd(*minors)
    for p in factorize(q).primes:
        if g % p == 0:
            raise ValueError(f"v and w are linearly dependent mod p = {p}")

    rows = [ra + rb for ra, rb in zip(ad_matrix(v), ad_matrix(w))]
    divisors = elementary_divisors_3xn(rows)
    gcds = [math.gcd(abs(d), q) for d in divisors]
    ok = all(2 % g_ == 0 for g_ in gcds)
    certificate = {
        "elementary_divisors": [abs(d) for d in divisors],
        "divisor_gcds_with_q": gcds,
        "target_scale": 2,
        "q": q,
    }
    return ok, certificate
