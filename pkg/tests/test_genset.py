import json

import numpy as np
import pytest

from sl2cayley.errors import CapExceededError
from sl2cayley.genset import (
    GeneratingSet,
    generated_subgroup,
    surjectivity_check,
    validate_symmetric,
)
from sl2cayley.presets import get_preset
from sl2cayley.sl2core import INT_A, INT_B, get_factor_group, int_mat_mul


def bfs_oracle(triples, moduli):
    """Set-of-tuples BFS over object-level arithmetic (independent route).

    Elements are triples of flat (a, b, c, d) entry tuples."""
    def red(m, q):
        return (m[0][0] % q, m[0][1] % q, m[1][0] % q, m[1][1] % q)

    def mul(x, y, q):
        a, b, c, d = x
        e, f, g, h = y
        return ((a * e + b * g) % q, (a * f + b * h) % q,
                (c * e + d * g) % q, (c * f + d * h) % q)

    gens = [tuple(red(m, q) for m, q in zip(t, moduli)) for t in triples]
    ident = tuple(red(((1, 0), (0, 1)), q) for q in moduli)
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for e in frontier:
            for g in gens:
                t = tuple(mul(a, b, q) for a, b, q in zip(e, g, moduli))
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
        frontier = nxt
    return seen


def test_validate_symmetric():
    s = GeneratingSet.symmetrized([(INT_A, INT_A, INT_A)])
    assert validate_symmetric(s) is None
    lone = GeneratingSet.from_triples([(INT_A, INT_A, INT_A)])
    report = validate_symmetric(lone)
    assert report is not None and "multiplicity" in report
    ident = ((1, 0), (0, 1))
    assert validate_symmetric(
        GeneratingSet.from_triples([(ident, ident, ident)])) is None


def test_multiplicity_matters():
    t = (INT_A, INT_A, INT_A)
    ti = tuple(((1, -1), (0, 1)) for _ in range(3))
    s = GeneratingSet.from_triples([t, t, ti])
    assert validate_symmetric(s) is not None


def test_determinant_enforced():
    with pytest.raises(ValueError):
        GeneratingSet.from_triples([(((2, 0), (0, 1)), INT_A, INT_A)])


def test_identity_subgroup():
    ident = ((1, 0), (0, 1))
    s = GeneratingSet.from_triples([(ident, ident, ident)])
    sub = generated_subgroup(s, (2, 2, 2))
    assert sub.size == 1


def test_diagonal_subgroup_order_6():
    sub = generated_subgroup(get_preset("DIAGONAL"), (2, 2, 2))
    assert sub.size == 6
    ok, index, _ = surjectivity_check(get_preset("DIAGONAL"), (2, 2, 2))
    assert not ok and index == 36


def test_bfs_matches_object_level_oracle():
    s = get_preset("TWISTED")
    for moduli in ((2, 2, 2), (2, 3, 2)):
        sub = generated_subgroup(s, moduli)
        oracle = bfs_oracle(s.triples, moduli)
        assert sub.size == len(oracle)
        got = {tuple(m.entries for m in sub.element_at(i).components)
               for i in range(sub.size)}
        assert got == oracle


def test_discovery_order_identity_first_then_generators():
    s = get_preset("DIAGONAL")
    sub = generated_subgroup(s, (3, 3, 3))
    assert sub.element_at(0).g1.is_identity()
    labels = s.reduced_labels((3, 3, 3))
    first = [tuple(sub.labels[i]) for i in range(1, 1 + len(labels))]
    assert first == [tuple(row) for row in labels]


def test_subgroup_is_closed_and_lagrange():
    s = get_preset("TWISTED")
    sub = generated_subgroup(s, (2, 2, 2))
    n = sub.size
    rng = np.random.default_rng(5)
    i = rng.integers(0, n, size=2000)
    j = rng.integers(0, n, size=2000)
    sub.mul_positions(i, j)  # raises if any product left the subgroup
    full = sub.full_order
    assert full % n == 0


def test_closure_exhaustive_small():
    sub = generated_subgroup(get_preset("DIAGONAL"), (3, 3, 3))
    n = sub.size
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    sub.mul_positions(i.ravel(), j.ravel())


def test_monotone_under_reduction():
    s = get_preset("TWISTED")
    big = generated_subgroup(s, (4, 4, 4))
    small = generated_subgroup(s, (2, 2, 2))
    # image of the coarse subgroup under reduction = fine subgroup
    f4 = get_factor_group(4)
    f2 = get_factor_group(2)
    red = f4.reduction_labels(f2)
    reduced_labels = red[big.labels]
    enc = small.encode_labels(reduced_labels)
    image = set(small.positions_of_enc(enc).tolist())
    assert image == set(range(small.size))


def test_surjectivity_battery():
    s = get_preset("TWISTED")
    for moduli in ((2, 2, 2), (3, 3, 3), (2, 3, 5)):
        ok, index, sub = surjectivity_check(s, moduli)
        assert ok and index == 1 and sub.is_full


def lift_det1(m, q):
    """Integer lift with determinant exactly 1 (small search; always exists)."""
    import itertools

    for da, db, dc, dd in itertools.product((0, -q, q), repeat=4):
        cand = ((m.a + da, m.b + db), (m.c + dc, m.d + dd))
        if cand[0][0] * cand[1][1] - cand[0][1] * cand[1][0] == 1:
            return cand
    raise AssertionError(f"no small det-1 lift of {m}")


def test_full_group_generating_set_is_surjective():
    fg = get_factor_group(2)
    ident = ((1, 0), (0, 1))
    triples = [(lift_det1(fg.matrix_at(i), 2), ident, ident)
               for i in range(fg.order)]
    s = GeneratingSet.symmetrized(triples)
    ok, index, _ = surjectivity_check(s, (2, 1, 1))
    assert ok and index == 1


def test_cap_exceeded_mid_bfs():
    with pytest.raises(CapExceededError):
        generated_subgroup(get_preset("TWISTED"), (3, 3, 3), cap=1000)


def test_cap_exceeded_scratch_bitmap():
    with pytest.raises(CapExceededError):
        generated_subgroup(get_preset("TWISTED"), (50, 50, 1))


def test_json_roundtrip():
    s = get_preset("TWISTED")
    text = s.to_json()
    back = GeneratingSet.from_json(text)
    assert back.triples == s.triples
    data = json.loads(text)
    data.pop()  # drop one inverse: breaks symmetry
    with pytest.raises(ValueError):
        GeneratingSet.from_json(json.dumps(data))


def test_dense_random_preset_is_symmetric_and_seeded():
    a = get_preset("DENSE-RANDOM", seed=123)
    b = get_preset("DENSE-RANDOM", seed=123)
    c = get_preset("DENSE-RANDOM", seed=124)
    assert a.triples == b.triples
    assert a.triples != c.triples
    assert validate_symmetric(a) is None
    for t in a.triples:
        for m in t:
            assert all(abs(x) <= 3 for row in m for x in row)


def test_small_subgroup_of_large_product_allowed():
    # the diagonal mod (8,8,8) has 384 elements inside a 5.7e7 product
    sub = generated_subgroup(get_preset("DIAGONAL"), (8, 8, 8))
    assert sub.size == 384
