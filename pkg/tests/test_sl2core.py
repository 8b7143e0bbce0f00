import numpy as np
import pytest

from sl2cayley.errors import CapExceededError
from sl2cayley.sl2core import (
    INT_A,
    INT_B,
    FactorGroup,
    GroupIndex,
    ResidueMatrix,
    TripleElement,
    enumerate_group,
    get_factor_group,
    group_order,
    int_mat_inv,
    int_mat_mul,
    mat_inv,
    mat_mul,
    project,
    reduce_int_matrix,
    reduce_triple,
)


def brute_count(q):
    # independent oracle: scan all q^4 entry tuples
    count = 0
    for a in range(q):
        for b in range(q):
            for c in range(q):
                for d in range(q):
                    if (a * d - b * c) % q == 1 % q:
                        count += 1
    return count


def test_mat_examples():
    u = ResidueMatrix(5, 1, 1, 0, 1)
    assert mat_inv(u) == ResidueMatrix(5, 1, 4, 0, 1)
    x = ResidueMatrix(7, 2, 3, 3, 5)
    assert mat_mul(x, ResidueMatrix.identity(7)) == x
    a2 = reduce_int_matrix(INT_A, 2)
    b2 = reduce_int_matrix(INT_B, 2)
    assert mat_mul(a2, b2) == ResidueMatrix(2, 0, 1, 1, 1)


def test_mat_mul_modulus_mismatch():
    with pytest.raises(ValueError):
        mat_mul(ResidueMatrix.identity(2), ResidueMatrix.identity(3))


def test_reduce_int_matrix():
    assert reduce_int_matrix(((1, 5), (0, 1)), 5).is_identity()
    assert reduce_int_matrix(((2, 1), (1, 1)), 3) == ResidueMatrix(3, 2, 1, 1, 1)
    assert reduce_int_matrix(((-1, 0), (0, -1)), 2).is_identity()
    with pytest.raises(ValueError):
        reduce_int_matrix(((2, 0), (0, 1)), 5)


def test_enumeration_counts_small():
    assert len(enumerate_group(2)) == brute_count(2) == 6
    assert len(enumerate_group(3)) == brute_count(3) == 24
    assert len(enumerate_group(4)) == brute_count(4) == 48


def test_group_order_closed_form_matches_enumeration():
    for q in range(1, 17):
        assert group_order(q) == get_factor_group(q).order
    assert group_order(1) == 1
    assert group_order(6) == 144


def test_enumeration_cap():
    with pytest.raises(CapExceededError):
        FactorGroup(2, cap=5)


def test_enumeration_is_lexicographic():
    e = get_factor_group(5).elements
    keys = [tuple(row) for row in e]
    assert keys == sorted(keys)


def test_group_axioms_exhaustive_inverses():
    for q in range(2, 6):
        fg = get_factor_group(q)
        ident = fg.identity
        for i in range(fg.order):
            assert int(fg.mul_labels(i, int(fg.inverse[i]))) == ident
            assert int(fg.mul_labels(int(fg.inverse[i]), i)) == ident


def test_group_axioms_associativity_random():
    rng = np.random.default_rng(42)
    for q in (4, 5):
        fg = get_factor_group(q)
        i, j, k = (rng.integers(0, fg.order, size=10_000) for _ in range(3))
        left = fg.mul_labels(fg.mul_labels(i, j), k)
        right = fg.mul_labels(i, fg.mul_labels(j, k))
        assert np.array_equal(left, right)


def random_word(rng, length):
    m = ((1, 0), (0, 1))
    for _ in range(length):
        g = INT_A if rng.integers(0, 2) else INT_B
        if rng.integers(0, 2):
            g = int_mat_inv(g)
        m = int_mat_mul(m, g)
    return m


def test_reduce_is_homomorphism_on_random_words():
    rng = np.random.default_rng(7)
    q = 12
    for _ in range(10_000):
        x = random_word(rng, int(rng.integers(1, 8)))
        y = random_word(rng, int(rng.integers(1, 8)))
        lhs = reduce_int_matrix(int_mat_mul(x, y), q)
        rhs = mat_mul(reduce_int_matrix(x, q), reduce_int_matrix(y, q))
        assert lhs == rhs


def test_crt_isomorphism_small_coprime_pairs():
    rng = np.random.default_rng(3)
    for q1, q2 in ((2, 3), (2, 5), (3, 4), (3, 5), (4, 7), (7, 8)):
        big = get_factor_group(q1 * q2)
        f1, f2 = get_factor_group(q1), get_factor_group(q2)
        assert big.order == f1.order * f2.order
        r1 = big.reduction_labels(f1)
        r2 = big.reduction_labels(f2)
        # componentwise reduction is injective (cardinality) and multiplicative
        pairs = set(zip(r1.tolist(), r2.tolist()))
        assert len(pairs) == big.order
        i = rng.integers(0, big.order, size=1000)
        j = rng.integers(0, big.order, size=1000)
        prod = big.mul_labels(i, j)
        assert np.array_equal(r1[prod], f1.mul_labels(r1[i], r1[j]))
        assert np.array_equal(r2[prod], f2.mul_labels(r2[i], r2[j]))


def test_project_and_reduce_triple():
    t = TripleElement(
        reduce_int_matrix(INT_A, 4),
        reduce_int_matrix(INT_B, 6),
        reduce_int_matrix(int_mat_mul(INT_A, INT_B), 10),
    )
    assert project(t, 2) == reduce_int_matrix(INT_B, 6)
    with pytest.raises(ValueError):
        project(t, 0)
    small = reduce_triple(t, (2, 3, 2))
    assert small.moduli == (2, 3, 2)
    assert small.g1 == reduce_int_matrix(INT_A, 2)
    trivial = reduce_triple(t, (1, 1, 1))
    assert trivial == TripleElement.identity((1, 1, 1))
    assert reduce_triple(t, t.moduli) == t
    with pytest.raises(ValueError):
        reduce_triple(t, (3, 3, 3))


def test_reduce_triple_from_integer_lift():
    lift = (INT_A, INT_B, INT_A)
    t = reduce_triple(lift, (2, 3, 2))
    assert t.g1 == reduce_int_matrix(INT_A, 2)
    assert t.g2 == reduce_int_matrix(INT_B, 3)
    assert t.g3 == reduce_int_matrix(INT_A, 2)


def test_triple_group_law():
    t = TripleElement.identity((2, 3, 5))
    g = reduce_triple((INT_A, INT_B, INT_A), (2, 3, 5))
    assert g * t == g
    assert g * g.inv() == TripleElement.identity((2, 3, 5))


def test_group_index_full_product_roundtrip():
    gi = GroupIndex.full_product((2, 3, 2))
    assert gi.size == 6 * 24 * 6
    assert gi.is_full
    for i in (0, 1, 100, gi.size - 1):
        assert gi.index_of(gi.element_at(i)) == i
    ident = gi.identity_position()
    assert gi.element_at(ident) == TripleElement.identity((2, 3, 2))


def test_group_index_product_cap():
    with pytest.raises(CapExceededError):
        GroupIndex.full_product((8, 8, 8))


def test_group_index_mul_and_inverse_positions():
    gi = GroupIndex.full_product((3, 2, 2))
    rng = np.random.default_rng(11)
    i = rng.integers(0, gi.size, size=200)
    j = rng.integers(0, gi.size, size=200)
    prod = gi.mul_positions(i, j)
    for a, b, p in zip(i[:20], j[:20], prod[:20]):
        assert gi.element_at(int(a)) * gi.element_at(int(b)) == gi.element_at(int(p))
    inv = gi.inverse_positions(i)
    ident = gi.identity_position()
    assert np.all(gi.mul_positions(i, inv) == ident)


def test_modulus_one_factor():
    fg = get_factor_group(1)
    assert fg.order == 1
    gi = GroupIndex.full_product((6, 1, 1))
    assert gi.size == 144
