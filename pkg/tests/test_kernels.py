"""Backend parity: the compiled kernels must match the pure twins bit-for-bit."""

import numpy as np
import pytest

from sl2cayley import _kernels
from sl2cayley._kernels import GroupTables, backends, cheeger_scan, pair_failures
from sl2cayley.sl2core import GroupIndex

IMPLS = backends()
HAVE_COMPILED = "compiled" in IMPLS

needs_compiled = pytest.mark.skipif(not HAVE_COMPILED,
                                    reason="compiled kernels unavailable")


@pytest.fixture(scope="module")
def tabs():
    return GroupTables.from_group_index(GroupIndex.full_product((3, 2, 2)))


def random_neigh(rng, n, pairs):
    neigh = np.empty((n, 2 * pairs), dtype=np.int32)
    for j in range(pairs):
        perm = rng.permutation(n)
        neigh[:, 2 * j] = perm
        neigh[:, 2 * j + 1] = np.argsort(perm)
    return neigh


@needs_compiled
def test_convolve_parity(tabs):
    rng = np.random.default_rng(41)
    n = tabs.size
    for _ in range(5):
        s1 = np.unique(rng.integers(0, n, size=12)).astype(np.int64)
        s2 = np.unique(rng.integers(0, n, size=30)).astype(np.int64)
        n1 = rng.integers(1, 50, size=len(s1)).astype(np.int64)
        n2 = rng.integers(1, 50, size=len(s2)).astype(np.int64)
        a = IMPLS["pure"].convolve_i64(tabs, s1, n1, s2, n2)
        b = IMPLS["compiled"].convolve_i64(tabs, s1, n1, s2, n2)
        assert np.array_equal(a, b)


@needs_compiled
def test_walk_matvec_parity():
    rng = np.random.default_rng(42)
    neigh = random_neigh(rng, 500, 3)
    w = rng.standard_normal(500)
    a = IMPLS["pure"].walk_matvec(neigh, w)
    b = IMPLS["compiled"].walk_matvec(neigh, w)
    assert np.array_equal(a, b)


@needs_compiled
def test_product_set_parity(tabs):
    rng = np.random.default_rng(43)
    n = tabs.size
    for _ in range(5):
        a = np.unique(rng.integers(0, n, size=40)).astype(np.int64)
        b = np.unique(rng.integers(0, n, size=25)).astype(np.int64)
        pa = IMPLS["pure"].product_set(tabs, a, b)
        pb = IMPLS["compiled"].product_set(tabs, a, b)
        assert np.array_equal(pa, pb)


@needs_compiled
def test_pair_failures_parity(tabs):
    rng = np.random.default_rng(44)
    n = tabs.size
    psi = rng.integers(0, n, size=n).astype(np.int64)
    want = IMPLS["pure"].pair_failures(tabs, psi, tabs)
    got = IMPLS["compiled"].pair_failures(tabs, psi, tabs, 0, n)
    assert got == want
    assert pair_failures(tabs, psi, tabs, threads=3) == want


@needs_compiled
def test_cheeger_scan_parity():
    rng = np.random.default_rng(45)
    for _ in range(6):
        n = int(rng.integers(5, 13))
        neigh = random_neigh(rng, n, int(rng.integers(1, 4)))
        free = n - 1
        lo = min(free, 20)
        want = IMPLS["pure"].cheeger_scan(neigh, lo, 0, 1 << (free - lo))
        got = IMPLS["compiled"].cheeger_scan(neigh, lo, 0, 1 << max(free - lo, 0))
        assert got == want


def test_cheeger_threads_invariance():
    rng = np.random.default_rng(46)
    neigh = random_neigh(rng, 18, 3)
    results = {t: cheeger_scan(neigh, threads=t) for t in (1, 2, 8)}
    assert results[1] == results[2] == results[8]


def test_backend_flag_exposed():
    assert _kernels.BACKEND in ("pure", "compiled")


def test_tables_reject_large_factors():
    # SL2(Z/17) has order 4896 > 4096: no multiplication table
    gi = GroupIndex.full_product((17, 1, 1))
    with pytest.raises(ValueError):
        GroupTables.from_group_index(gi)
