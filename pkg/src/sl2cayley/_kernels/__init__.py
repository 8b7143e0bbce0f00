"""Kernel backend selection: compiled Cython core with a pure numpy fallback.

The compiled module is used when importable unless SL2CAYLEY_FORCE_PURE=1 is
set.  Both backends satisfy the same contracts and produce bit-identical
results; only throughput differs (see benchmarks/bench_kernels.py).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import pure

_FORCE_PURE = os.environ.get("SL2CAYLEY_FORCE_PURE", "") in ("1", "true", "yes")

if not _FORCE_PURE:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = pure
else:
    _impl = pure

BACKEND: str = _impl.BACKEND


def backends() -> dict[str, object]:
    """All importable backends, keyed by name (for parity tests/benchmarks)."""
    out = {"pure": pure}
    try:
        from . import _core
        out["compiled"] = _core
    except ImportError:
        pass
    return out


@dataclass
class GroupTables:
    """Contiguous arrays describing a GroupIndex, in kernel-ready form."""

    labels: np.ndarray      # (N, 3) int64, per-factor labels
    mul1: np.ndarray        # factor multiplication tables, int32
    mul2: np.ndarray
    mul3: np.ndarray
    n2: int                 # orders of factors 2 and 3 (encoding radices)
    n3: int
    enc_sorted: np.ndarray  # (N,) int64, sorted encodings
    order: np.ndarray       # (N,) int64, position of enc_sorted[i] in the index
    size: int
    dense: bool             # full product group: lookup = order[key], no search

    @classmethod
    def from_group_index(cls, gi) -> "GroupTables":
        tables = [f.mul_table for f in gi.factors]
        if any(t is None for t in tables):
            raise ValueError(
                "kernel tables need factor multiplication tables "
                f"(factor orders {[f.order for f in gi.factors]} exceed the table cap)")
        return cls(
            labels=np.ascontiguousarray(gi.labels, dtype=np.int64),
            mul1=np.ascontiguousarray(tables[0], dtype=np.int32),
            mul2=np.ascontiguousarray(tables[1], dtype=np.int32),
            mul3=np.ascontiguousarray(tables[2], dtype=np.int32),
            n2=gi.factors[1].order,
            n3=gi.factors[2].order,
            enc_sorted=np.ascontiguousarray(gi._enc_sorted, dtype=np.int64),
            order=np.ascontiguousarray(gi._order, dtype=np.int64),
            size=gi.size,
            dense=bool(gi._dense),
        )


def convolve_i64(tabs, supp1, num1, supp2, num2):
    return _impl.convolve_i64(tabs, supp1, num1, supp2, num2)


def walk_matvec(neigh, w):
    return _impl.walk_matvec(neigh, w)


def product_set(tabs, a_pos, b_pos):
    return _impl.product_set(tabs, a_pos, b_pos)


def pair_failures(tabs1, psi, tabs2, threads: int = 1) -> int:
    n = tabs1.size
    if BACKEND == "pure":
        return pure.pair_failures(tabs1, psi, tabs2)
    if threads <= 1 or n < 256:
        return _impl.pair_failures(tabs1, psi, tabs2, 0, n)
    bounds = np.linspace(0, n, 2 * threads + 1, dtype=np.int64)
    with ThreadPoolExecutor(max_workers=threads) as ex:
        parts = list(ex.map(
            lambda ab: _impl.pair_failures(tabs1, psi, tabs2, int(ab[0]), int(ab[1])),
            zip(bounds[:-1], bounds[1:])))
    return int(sum(parts))


def cheeger_scan(neigh: np.ndarray, threads: int = 1) -> tuple[int, int, int]:
    """Exhaustive min-ratio cut over subsets containing vertex 0.

    Returns (boundary, size, witness_mask); the masks and tie-breaks are
    identical across backends, thread counts and partitionings because the
    global optimum of (ratio, witness) does not depend on how the mask space
    is partitioned.
    """
    n = neigh.shape[0]
    free = n - 1
    if BACKEND == "pure":
        lo_bits = min(free, 20)
        hi_parts = 1 << (free - lo_bits)
        return pure.cheeger_scan(neigh, lo_bits, 0, hi_parts)
    hi_bits = 0
    if free > 16:
        hi_bits = free - 16
    lo_bits = free - hi_bits
    hi_parts = 1 << hi_bits
    if threads <= 1 or hi_parts == 1:
        return _impl.cheeger_scan(neigh, lo_bits, 0, hi_parts)
    chunk = max(1, hi_parts // (4 * threads))
    ranges = [(h, min(h + chunk, hi_parts)) for h in range(0, hi_parts, chunk)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        parts = list(ex.map(
            lambda ab: _impl.cheeger_scan(neigh, lo_bits, ab[0], ab[1]), ranges))
    return pure.merge_cheeger(parts)
