import itertools

import numpy as np
import pytest

from sl2cayley.genset import generated_subgroup
from sl2cayley.growth import (
    GroupSubset,
    ResidueTripleSet,
    bounded_generation_search,
    congruence_subgroup,
    difference_set,
    growth_exponent,
    pointwise_product_set,
    product_set,
    sumset,
    sumset_cover,
    triple_product,
)
from sl2cayley.presets import get_preset
from sl2cayley.sl2core import GroupIndex
from sl2cayley.walk import chi_S, power


@pytest.fixture(scope="module")
def gamma2():
    return GroupIndex.full_product((2, 2, 2))


@pytest.fixture(scope="module")
def gamma3():
    return GroupIndex.full_product((3, 3, 3))


def product_oracle(group, a_pos, b_pos):
    """Explicit pairwise products, deduplicated (independent route)."""
    a = np.asarray(a_pos, dtype=np.int64)
    b = np.asarray(b_pos, dtype=np.int64)
    return set(np.unique(group.mul_positions(a[:, None], b[None, :])).tolist())


def test_product_with_identity(gamma2):
    rng = np.random.default_rng(1)
    a = GroupSubset.from_positions(gamma2, rng.choice(216, size=30, replace=False))
    ident = GroupSubset.from_positions(gamma2, [gamma2.identity_position()])
    assert product_set(a, ident) == a
    assert product_set(ident, a) == a


def test_subgroup_is_product_stable(gamma2):
    diag = generated_subgroup(get_preset("DIAGONAL"), (2, 2, 2))
    pos = gamma2.positions_of_enc(gamma2.encode_labels(diag.labels))
    h = GroupSubset.from_positions(gamma2, pos)
    assert product_set(h, h) == h


def test_product_matches_pairwise_oracle(gamma2):
    rng = np.random.default_rng(2)
    a_pos = rng.choice(216, size=10, replace=False)
    b_pos = rng.choice(216, size=14, replace=False)
    a = GroupSubset.from_positions(gamma2, a_pos)
    b = GroupSubset.from_positions(gamma2, b_pos)
    got = set(product_set(a, b).positions().tolist())
    assert got == product_oracle(gamma2, a_pos, b_pos)


def test_product_monotone(gamma2):
    rng = np.random.default_rng(3)
    for _ in range(5):
        a_pos = rng.choice(216, size=12, replace=False)
        a_big = np.union1d(a_pos, rng.choice(216, size=8, replace=False))
        b_pos = rng.choice(216, size=9, replace=False)
        small = product_set(GroupSubset.from_positions(gamma2, a_pos),
                            GroupSubset.from_positions(gamma2, b_pos))
        big = product_set(GroupSubset.from_positions(gamma2, a_big),
                          GroupSubset.from_positions(gamma2, b_pos))
        assert big.contains(small)


def test_symmetric_triple_product_is_symmetric(gamma2):
    rng = np.random.default_rng(4)
    pos = rng.choice(216, size=20, replace=False)
    pos = np.union1d(pos, gamma2.inverse_positions(np.asarray(pos, dtype=np.int64)))
    a = GroupSubset.from_positions(gamma2, pos)
    assert a.is_symmetric()
    aaa = triple_product(a)
    assert aaa.is_symmetric()


def test_growth_exponent_full_group_flagged(gamma2):
    full = GroupSubset(gamma2, np.ones(gamma2.size, dtype=bool))
    rep = growth_exponent(full, epsilon=0.1)
    assert rep.exponent == 1.0
    assert rep.hypothesis_flags["size_below_group_power"] is False


def test_growth_exponent_subgroup_exactly_one(gamma2):
    diag = generated_subgroup(get_preset("DIAGONAL"), (2, 2, 2))
    pos = gamma2.positions_of_enc(gamma2.encode_labels(diag.labels))
    h = GroupSubset.from_positions(gamma2, pos)
    rep = growth_exponent(h)
    assert rep.exponent == 1.0 and rep.size_aaa == rep.size_a == 6


def test_growth_exponent_singleton(gamma2):
    ident = GroupSubset.from_positions(gamma2, [gamma2.identity_position()])
    rep = growth_exponent(ident)
    assert rep.exponent == 1.0


def test_growth_exponent_ball_with_hypotheses(twisted333):
    s = get_preset("TWISTED")
    group = twisted333.group  # surjective: the full product group in BFS order
    chi2 = power(chi_S(s, group), 2)
    gen_pos = group.positions_of_enc(
        group.encode_labels(s.reduced_labels((3, 3, 3))))
    ball = GroupSubset.from_positions(
        group, np.union1d(gen_pos, [group.identity_position()]))
    ball2 = product_set(ball, ball)
    rep = growth_exponent(ball2, chi_power=chi2, delta=0.5, epsilon=0.1)
    assert rep.size_a == ball2.size
    assert rep.exponent > 1.0
    assert rep.hypothesis_flags["chi_mass_exceeds_q_to_minus_delta"]
    assert rep.hypothesis_flags["size_below_group_power"]
    oracle = product_oracle(group, ball2.positions(), ball2.positions())
    assert set(product_set(ball2, ball2).positions().tolist()) == oracle


def test_congruence_subgroup_sizes(gamma2):
    full = congruence_subgroup(gamma2, (1, 1, 1))
    assert full.size == gamma2.size
    ident_only = congruence_subgroup(gamma2, (2, 2, 2))
    assert ident_only.size == 1
    g4 = GroupIndex.full_product((4, 4, 4))
    ker = congruence_subgroup(g4, (2, 2, 2))
    assert ker.size == (48 // 6) ** 3 == 512
    with pytest.raises(ValueError):
        congruence_subgroup(g4, (3, 1, 1))


def test_congruence_subgroup_vs_object_oracle():
    g4 = GroupIndex.full_product((4, 4, 4))
    ker = congruence_subgroup(g4, (2, 2, 2))
    count = 0
    for i in ker.positions()[:50]:
        e = g4.element_at(int(i))
        for m in e.components:
            assert (m.a % 2, m.b % 2, m.c % 2, m.d % 2) == (1, 0, 0, 1)
        count += 1
    assert count == 50


def test_bounded_generation_full_group(gamma2):
    full = GroupSubset(gamma2, np.ones(gamma2.size, dtype=bool))
    res = bounded_generation_search(full, k_max=3)
    assert res.found and res.k_star == 1 and res.q_prime == (1, 1, 1)


def test_bounded_generation_dense_subset_certified(gamma2):
    rng = np.random.default_rng(9)
    pos = rng.choice(216, size=200, replace=False)
    pos = np.union1d(pos, gamma2.inverse_positions(np.asarray(pos, dtype=np.int64)))
    a = GroupSubset.from_positions(gamma2, pos)
    res = bounded_generation_search(a, k_max=5)
    assert res.found
    # certificate re-verified through the explicit power oracle
    mask = a.mask.copy()
    mask[gamma2.identity_position()] = True
    powers = [GroupSubset(gamma2, mask)]
    for _ in range(res.k_star - 1):
        powers.append(product_set(powers[-1], powers[0]))
    cong = congruence_subgroup(gamma2, res.q_prime)
    assert powers[res.k_star - 1].contains(cong)
    if res.k_star > 1:
        assert not powers[res.k_star - 2].contains(cong)


def test_bounded_generation_subgroup_stabilizes(gamma2):
    diag = generated_subgroup(get_preset("DIAGONAL"), (2, 2, 2))
    pos = gamma2.positions_of_enc(gamma2.encode_labels(diag.labels))
    h = GroupSubset.from_positions(gamma2, pos)
    res = bounded_generation_search(h, k_max=4)
    assert res.found and res.stabilized_at == 2
    # the diagonal covers only the trivial congruence subgroup
    assert res.q_prime == (2, 2, 2) and res.k_star == 1


def test_bounded_generation_requires_symmetric(gamma3):
    a = GroupSubset.from_positions(gamma3, [5])
    if a.is_symmetric():  # position 5 could be an involution; pick another
        a = GroupSubset.from_positions(gamma3, [5, 6])
    if not a.is_symmetric():
        with pytest.raises(ValueError):
            bounded_generation_search(a, k_max=2)


def test_bounded_generation_not_found_reports_best(gamma2):
    # a tiny symmetric set far from covering anything beyond the identity
    a = GroupSubset.from_positions(gamma2, [gamma2.identity_position()])
    res = bounded_generation_search(a, k_max=3)
    # {1} stabilizes instantly: covered best is the identity congruence triple
    assert res.found and res.q_prime == (2, 2, 2) and res.k_star == 1


def sumset_oracle(moduli, cells, m):
    """m-fold sumset by explicit tuple arithmetic."""
    cur = {tuple(c) for c in cells}
    base = {tuple(c) for c in cells}
    for _ in range(m - 1):
        cur = {tuple((a[i] + b[i]) % moduli[i] for i in range(3))
               for a in cur for b in base}
    return cur


def test_residue_set_ops():
    mod = (4, 3, 2)
    a = ResidueTripleSet.from_elements(mod, [(1, 1, 1), (2, 0, 1)])
    b = ResidueTripleSet.from_elements(mod, [(3, 2, 1)])
    ab = pointwise_product_set(a, b)
    assert set(map(tuple, ab.elements())) == {(3, 2, 1), (2, 0, 1)}
    d = difference_set(ab, ab)
    assert (0, 0, 0) in set(map(tuple, d.elements()))
    s = sumset(a, a)
    assert set(map(tuple, s.elements())) == {
        (2, 2, 0), (3, 1, 0), (0, 0, 0)}


def test_sumset_cover_full_sets():
    mod = (3, 3, 3)
    full = ResidueTripleSet.full(mod)
    res = sumset_cover(full, full, m_max=3)
    assert res.found and res.k_star == 1 and res.q_prime == (1, 1, 1)


def test_sumset_cover_zero_sets():
    mod = (4, 3, 2)
    zero = ResidueTripleSet.from_elements(mod, [(0, 0, 0)])
    res = sumset_cover(zero, zero, m_max=3)
    assert res.found and res.q_prime == mod


def test_sumset_cover_random_halves_vs_oracle():
    mod = (5, 5, 5)
    rng = np.random.default_rng(12)
    total = 125

    def sample():
        flat = rng.choice(total, size=62, replace=False)
        mask = np.zeros(total, dtype=bool)
        mask[flat] = True
        return ResidueTripleSet(mod, mask.reshape(mod))

    a, b = sample(), sample()
    res = sumset_cover(a, b, m_max=6)
    assert res.found
    ab = pointwise_product_set(a, b)
    c = difference_set(ab, ab)
    cells = [tuple(e) for e in c.elements()]
    # oracle: the certified lattice appears at m_star and not at m_star - 1
    lattice = {(x, y, z) for x in range(0, 5, res.q_prime[0])
               for y in range(0, 5, res.q_prime[1])
               for z in range(0, 5, res.q_prime[2])}
    got = sumset_oracle(mod, cells, res.k_star)
    assert lattice <= got
    if res.k_star > 1:
        assert not lattice <= sumset_oracle(mod, cells, res.k_star - 1)


def test_sumset_monotone_and_stabilizes():
    mod = (4, 2, 2)
    rng = np.random.default_rng(13)
    flat = rng.choice(16, size=5, replace=False)
    mask = np.zeros(16, dtype=bool)
    mask[flat] = True
    a = ResidueTripleSet(mod, mask.reshape(mod))
    ab = pointwise_product_set(a, a)
    c = difference_set(ab, ab)
    prev = c
    for m in range(2, 8):
        cur = sumset(prev, c)
        assert bool(np.all(cur.mask | ~prev.mask))  # monotone
        if np.array_equal(cur.mask, prev.mask):
            break
        prev = cur
    else:
        pytest.fail("sumset did not stabilize")
