"""Pure numpy implementations of the hot kernels.

These mirror sl2cayley._kernels._core (the Cython extension) exactly; the
dispatcher in __init__ picks whichever is available.  Semantics, not speed,
is the contract here: every function must produce bit-identical results to
the compiled twin.
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"

_POP16 = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.int8)


def _popcount(a: np.ndarray) -> np.ndarray:
    a = a.astype(np.int64)
    return (_POP16[a & 0xFFFF].astype(np.int64)
            + _POP16[(a >> 16) & 0xFFFF]
            + _POP16[(a >> 32) & 0xFFFF])


def _mul_positions(tabs, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    l1 = tabs.mul1[tabs.labels[i, 0], tabs.labels[j, 0]].astype(np.int64)
    l2 = tabs.mul2[tabs.labels[i, 1], tabs.labels[j, 1]].astype(np.int64)
    l3 = tabs.mul3[tabs.labels[i, 2], tabs.labels[j, 2]].astype(np.int64)
    keys = (l1 * tabs.n2 + l2) * tabs.n3 + l3
    if tabs.dense:
        return tabs.order[keys]
    return tabs.order[np.searchsorted(tabs.enc_sorted, keys)]


def convolve_i64(tabs, supp1: np.ndarray, num1: np.ndarray,
                 supp2: np.ndarray, num2: np.ndarray) -> np.ndarray:
    """Group-algebra product: out[z*y] += num1[y] * num2[z] over the supports.

    num1 is indexed along supp1 (the measure f), num2 along supp2 (g); the
    result is the numerator vector of f*g on the whole index.
    """
    out = np.zeros(tabs.size, dtype=np.int64)
    if len(supp1) <= len(supp2):
        for t, y in enumerate(supp1):
            pos = _mul_positions(tabs, supp2, np.full(len(supp2), y, dtype=np.int64))
            np.add.at(out, pos, num1[t] * num2)
    else:
        for t, z in enumerate(supp2):
            pos = _mul_positions(tabs, np.full(len(supp1), z, dtype=np.int64), supp1)
            np.add.at(out, pos, num2[t] * num1)
    return out


def walk_matvec(neigh: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Sum of w over right-translates: out[i] = sum_j w[neigh[i, j]].

    Accumulates column by column so the floating-point rounding matches the
    compiled kernel's left-to-right loop bit for bit."""
    out = w[neigh[:, 0]].astype(np.float64, copy=True)
    for j in range(1, neigh.shape[1]):
        out += w[neigh[:, j]]
    return out


def product_set(tabs, a_pos: np.ndarray, b_pos: np.ndarray) -> np.ndarray:
    """Membership mask of {a*b : a in A, b in B} over the index."""
    out = np.zeros(tabs.size, dtype=bool)
    if len(a_pos) == 0 or len(b_pos) == 0:
        return out
    for a in a_pos:
        pos = _mul_positions(tabs, np.full(len(b_pos), a, dtype=np.int64), b_pos)
        out[pos] = True
    return out


def pair_failures(tabs1, psi: np.ndarray, tabs2) -> int:
    """Count pairs (x, y) with psi(x*y) != psi(x)*psi(y)."""
    n = tabs1.size
    psi = np.asarray(psi, dtype=np.int64)
    total = 0
    ally = np.arange(n, dtype=np.int64)
    psi_y = psi[ally]
    for x in range(n):
        xy = _mul_positions(tabs1, np.full(n, x, dtype=np.int64), ally)
        rhs = _mul_positions(tabs2, np.full(n, psi[x], dtype=np.int64), psi_y)
        total += int(np.count_nonzero(psi[xy] != rhs))
    return total


def cheeger_scan(neigh: np.ndarray, lo_bits: int, hi_lo: int, hi_hi: int
                 ) -> tuple[int, int, int]:
    """Exhaustive Cheeger scan over subsets containing vertex 0.

    Free vertices are 1..N-1; bit t of a mask is membership of vertex t+1.
    The scan covers masks whose high part (bits >= lo_bits) lies in
    [hi_lo, hi_hi).  Returns (boundary, size, witness_mask) of the best
    eligible cut, where witness_mask is the full N-bit vertex mask of the
    side with at most N/2 vertices (ties resolved to the smaller mask).
    Comparison is exact: b1/m1 < b2/m2 via cross-multiplication, ties by
    smaller witness mask.

    This fallback evaluates each high part against all 2^lo_bits low parts
    with a meet-in-the-middle decomposition of the boundary count.
    """
    n, k = neigh.shape
    lo_count = 1 << lo_bits
    full_mask = (1 << n) - 1

    # Directed edges (u -> v), loops dropped.
    uu = np.repeat(np.arange(n, dtype=np.int64), k)
    vv = neigh.astype(np.int64).ravel()
    keep = uu != vv
    uu, vv = uu[keep], vv[keep]

    lo_vals = np.arange(lo_count, dtype=np.int64)
    pop_lo = _popcount(lo_vals)

    def member_lo(vertex: int) -> np.ndarray:
        # membership of a low-block vertex over all lo masks; vertex 0 pinned in A
        if vertex == 0:
            return np.ones(lo_count, dtype=np.int64)
        return (lo_vals >> (vertex - 1)) & 1

    def is_lo(v: int) -> bool:
        return v == 0 or (v - 1) < lo_bits

    lo_edges = [(int(u), int(v)) for u, v in zip(uu, vv) if is_lo(int(u)) and is_lo(int(v))]
    other_edges = [(int(u), int(v)) for u, v in zip(uu, vv)
                   if not (is_lo(int(u)) and is_lo(int(v)))]

    b_lo = np.zeros(lo_count, dtype=np.int64)
    for u, v in lo_edges:
        b_lo += member_lo(u) * (1 - member_lo(v))

    best = None  # (boundary, m, witness_mask)
    for hi in range(hi_lo, hi_hi):
        pop_hi = bin(hi).count("1")

        def member(vertex: int):
            if is_lo(vertex):
                return member_lo(vertex)
            return (hi >> (vertex - 1 - lo_bits)) & 1

        b = b_lo.copy()
        for u, v in other_edges:
            b += member(u) * (1 - member(v))
        s = 1 + pop_lo + pop_hi
        m = np.minimum(s, n - s)
        ratio = np.where(m > 0, b / np.maximum(m, 1), np.inf)
        rmin = ratio.min()
        if not np.isfinite(rmin):
            continue
        cands = np.flatnonzero(ratio == rmin)
        a_mask = 1 | ((lo_vals[cands] | (hi << lo_bits)) << 1)
        comp = ~a_mask & full_mask
        sz = s[cands]
        wit = np.where(sz < n - sz, a_mask,
                       np.where(sz > n - sz, comp, np.minimum(a_mask, comp)))
        j = int(np.argmin(wit))
        cand = (int(b[cands[j]]), int(m[cands[j]]), int(wit[j]))
        if best is None or _ratio_less(cand, best):
            best = cand
    if best is None:
        raise ValueError("no eligible subset in scan range")
    return best


def _ratio_less(x: tuple[int, int, int], y: tuple[int, int, int]) -> bool:
    lhs = x[0] * y[1]
    rhs = y[0] * x[1]
    if lhs != rhs:
        return lhs < rhs
    return x[2] < y[2]


def merge_cheeger(results) -> tuple[int, int, int]:
    best = None
    for r in results:
        if best is None or _ratio_less(r, best):
            best = r
    return best
