# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: group-algebra convolution, walk matvec, product
sets, pair-failure counting and the exhaustive Cheeger scan.

Must stay semantically identical to sl2cayley._kernels.pure.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


cdef inline Py_ssize_t _pos(const long long[::1] enc_sorted,
                            const long long[::1] order,
                            bint dense, long long key) noexcept nogil:
    if dense:
        return <Py_ssize_t> order[key]
    cdef Py_ssize_t lo = 0, hi = enc_sorted.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if enc_sorted[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    return <Py_ssize_t> order[lo]


cdef inline Py_ssize_t _mulpos(const long long[:, ::1] labels,
                               const int[:, ::1] mul1,
                               const int[:, ::1] mul2,
                               const int[:, ::1] mul3,
                               long long n2, long long n3,
                               const long long[::1] enc_sorted,
                               const long long[::1] order, bint dense,
                               Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef long long l1 = mul1[labels[i, 0], labels[j, 0]]
    cdef long long l2 = mul2[labels[i, 1], labels[j, 1]]
    cdef long long l3 = mul3[labels[i, 2], labels[j, 2]]
    return _pos(enc_sorted, order, dense, (l1 * n2 + l2) * n3 + l3)


def convolve_i64(tabs, supp1, num1, supp2, num2):
    """out[z*y] += num1[y] * num2[z]; see the pure twin for the contract."""
    cdef const long long[:, ::1] labels = tabs.labels
    cdef const int[:, ::1] mul1 = tabs.mul1
    cdef const int[:, ::1] mul2 = tabs.mul2
    cdef const int[:, ::1] mul3 = tabs.mul3
    cdef long long n2 = tabs.n2, n3 = tabs.n3
    cdef const long long[::1] enc_sorted = tabs.enc_sorted
    cdef const long long[::1] order = tabs.order
    cdef bint dense = tabs.dense
    out_arr = np.zeros(tabs.size, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef const long long[::1] s1 = np.ascontiguousarray(supp1, dtype=np.int64)
    cdef const long long[::1] n1v = np.ascontiguousarray(num1, dtype=np.int64)
    cdef const long long[::1] s2 = np.ascontiguousarray(supp2, dtype=np.int64)
    cdef const long long[::1] n2v = np.ascontiguousarray(num2, dtype=np.int64)
    cdef Py_ssize_t a, b
    cdef long long f
    with nogil:
        if s1.shape[0] <= s2.shape[0]:
            for a in range(s1.shape[0]):
                f = n1v[a]
                for b in range(s2.shape[0]):
                    out[_mulpos(labels, mul1, mul2, mul3, n2, n3, enc_sorted,
                                order, dense, <Py_ssize_t> s2[b], <Py_ssize_t> s1[a])] += f * n2v[b]
        else:
            for b in range(s2.shape[0]):
                f = n2v[b]
                for a in range(s1.shape[0]):
                    out[_mulpos(labels, mul1, mul2, mul3, n2, n3, enc_sorted,
                                order, dense, <Py_ssize_t> s2[b], <Py_ssize_t> s1[a])] += f * n1v[a]
    return out_arr


def walk_matvec(neigh, w):
    cdef const int[:, ::1] nb = np.ascontiguousarray(neigh, dtype=np.int32)
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    out_arr = np.empty(nb.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double acc
    with nogil:
        for i in range(nb.shape[0]):
            acc = 0.0
            for j in range(nb.shape[1]):
                acc += wv[nb[i, j]]
            out[i] = acc
    return out_arr


def product_set(tabs, a_pos, b_pos):
    cdef const long long[:, ::1] labels = tabs.labels
    cdef const int[:, ::1] mul1 = tabs.mul1
    cdef const int[:, ::1] mul2 = tabs.mul2
    cdef const int[:, ::1] mul3 = tabs.mul3
    cdef long long n2 = tabs.n2, n3 = tabs.n3
    cdef const long long[::1] enc_sorted = tabs.enc_sorted
    cdef const long long[::1] order = tabs.order
    cdef bint dense = tabs.dense
    out_arr = np.zeros(tabs.size, dtype=bool)
    cdef cnp.uint8_t[::1] out = out_arr.view(np.uint8)
    cdef const long long[::1] av = np.ascontiguousarray(a_pos, dtype=np.int64)
    cdef const long long[::1] bv = np.ascontiguousarray(b_pos, dtype=np.int64)
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(av.shape[0]):
            for j in range(bv.shape[0]):
                out[_mulpos(labels, mul1, mul2, mul3, n2, n3, enc_sorted,
                            order, dense, <Py_ssize_t> av[i], <Py_ssize_t> bv[j])] = 1
    return out_arr


def pair_failures(tabs1, psi, tabs2, Py_ssize_t x_lo, Py_ssize_t x_hi):
    cdef const long long[:, ::1] la1 = tabs1.labels
    cdef const int[:, ::1] a1 = tabs1.mul1
    cdef const int[:, ::1] a2 = tabs1.mul2
    cdef const int[:, ::1] a3 = tabs1.mul3
    cdef long long n2a = tabs1.n2, n3a = tabs1.n3
    cdef const long long[::1] ea = tabs1.enc_sorted
    cdef const long long[::1] oa = tabs1.order
    cdef bint da = tabs1.dense
    cdef const long long[:, ::1] lb1 = tabs2.labels
    cdef const int[:, ::1] b1 = tabs2.mul1
    cdef const int[:, ::1] b2 = tabs2.mul2
    cdef const int[:, ::1] b3 = tabs2.mul3
    cdef long long n2b = tabs2.n2, n3b = tabs2.n3
    cdef const long long[::1] eb = tabs2.enc_sorted
    cdef const long long[::1] ob = tabs2.order
    cdef bint db = tabs2.dense
    cdef const long long[::1] p = np.ascontiguousarray(psi, dtype=np.int64)
    cdef Py_ssize_t x, y, n = tabs1.size
    cdef Py_ssize_t xy, rhs
    cdef long long total = 0
    with nogil:
        for x in range(x_lo, x_hi):
            for y in range(n):
                xy = _mulpos(la1, a1, a2, a3, n2a, n3a, ea, oa, da, x, y)
                rhs = _mulpos(lb1, b1, b2, b3, n2b, n3b, eb, ob, db,
                              <Py_ssize_t> p[x], <Py_ssize_t> p[y])
                if p[xy] != rhs:
                    total += 1
    return int(total)


def cheeger_scan(neigh, int lo_bits, long long hi_lo, long long hi_hi):
    """Gray-code exhaustive scan; contract identical to the pure twin."""
    cdef const int[:, ::1] nb = np.ascontiguousarray(neigh, dtype=np.int32)
    cdef Py_ssize_t n = nb.shape[0], k = nb.shape[1]
    cdef long long full_mask = (<long long> 1 << n) - 1
    member_arr = np.zeros(n, dtype=np.int8)
    cdef signed char[::1] member = member_arr
    cdef long long hi, i, g, lo_count = <long long> 1 << lo_bits
    cdef long long b, s, m, t, u, w, a_mask, comp, wit, sz
    cdef long long best_b = -1, best_m = 1, best_wit = 0
    cdef Py_ssize_t j, v
    with nogil:
        for hi in range(hi_lo, hi_hi):
            # initial membership: vertex 0 plus the hi-block bits
            for v in range(n):
                member[v] = 0
            member[0] = 1
            s = 1
            for v in range(n - 1 - lo_bits):
                if (hi >> v) & 1:
                    member[1 + lo_bits + v] = 1
                    s += 1
            b = 0
            for v in range(n):
                if member[v]:
                    for j in range(k):
                        if not member[nb[v, j]]:
                            b += 1
            g = 0
            for i in range(lo_count):
                if i > 0:
                    # flip the vertex given by the Gray-code step
                    t = 0
                    while not (i >> t) & 1:
                        t += 1
                    g ^= (<long long> 1) << t
                    w = t + 1
                    if member[w]:
                        member[w] = 0
                        s -= 1
                        for j in range(k):
                            u = nb[w, j]
                            if u != w:
                                if member[u]:
                                    b += 1
                                else:
                                    b -= 1
                    else:
                        member[w] = 1
                        s += 1
                        for j in range(k):
                            u = nb[w, j]
                            if u != w:
                                if member[u]:
                                    b -= 1
                                else:
                                    b += 1
                sz = s
                m = sz if sz <= n - sz else n - sz
                if m == 0:
                    continue
                if best_b >= 0 and b * best_m > best_b * m:
                    continue
                a_mask = 1 | ((g | (hi << lo_bits)) << 1)
                comp = (~a_mask) & full_mask
                if sz < n - sz:
                    wit = a_mask
                elif sz > n - sz:
                    wit = comp
                else:
                    wit = a_mask if a_mask < comp else comp
                if best_b < 0 or b * best_m < best_b * m or wit < best_wit:
                    best_b = b
                    best_m = m
                    best_wit = wit
    if best_b < 0:
        raise ValueError("no eligible subset in scan range")
    return int(best_b), int(best_m), int(best_wit)
