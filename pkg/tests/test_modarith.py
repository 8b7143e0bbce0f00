import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sl2cayley.modarith import (
    MAX_MODULUS,
    Factorization,
    alpha_part,
    crt_combine,
    crt_combine_general,
    crt_split,
    exact_divides,
    factorize,
)


def test_factorize_examples():
    assert factorize(12).pairs == ((2, 2), (3, 1))
    assert factorize(1).pairs == ()
    assert factorize(360).pairs == ((2, 3), (3, 2), (5, 1))


def test_factorize_rejects_bad_input():
    with pytest.raises(ValueError):
        factorize(0)
    with pytest.raises(ValueError):
        factorize(-5)
    with pytest.raises(ValueError):
        factorize(MAX_MODULUS + 1)
    with pytest.raises(TypeError):
        factorize(2.0)


def test_factorize_large_semiprime():
    # near the 63-bit cap: forces the Pollard rho path
    p, q = 2147483647, 2147483629
    f = factorize(p * q)
    assert f.pairs == ((q, 1), (p, 1))
    f = factorize(2**62)
    assert f.pairs == ((2, 62),)


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=1, max_value=10**12))
def test_factorize_roundtrip(q):
    f = factorize(q)
    assert math.prod(p**n for p, n in f.pairs) == q
    assert all(factorize(p).pairs == ((p, 1),) for p, _ in f.pairs)
    assert list(f.primes) == sorted(f.primes)


def test_factorization_validates():
    with pytest.raises(ValueError):
        Factorization(value=12, pairs=((3, 1), (2, 2)))  # unsorted
    with pytest.raises(ValueError):
        Factorization(value=10, pairs=((2, 1),))  # wrong product


def test_exact_divides_examples():
    assert exact_divides(4, 12)
    assert not exact_divides(2, 12)
    for n in (1, 2, 97, 360):
        assert exact_divides(1, n)


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=1, max_value=5000),
       st.integers(min_value=1, max_value=5000),
       st.integers(min_value=1, max_value=5000))
def test_exact_divides_order_properties(a, b, c):
    assert exact_divides(a, a)
    if exact_divides(a, b) and exact_divides(b, c):
        assert exact_divides(a, c)
    if exact_divides(a, b) and exact_divides(b, a):
        assert a == b


def test_alpha_part_examples():
    assert alpha_part(8, Fraction(1, 2)) == 2
    assert alpha_part(1, Fraction(1, 3)) == 1
    assert alpha_part(72, Fraction(2, 3)) == 12


def test_alpha_part_rejects_bad_alpha():
    with pytest.raises(ValueError):
        alpha_part(8, Fraction(0))
    with pytest.raises(ValueError):
        alpha_part(8, Fraction(3, 2))
    with pytest.raises(TypeError):
        alpha_part(8, 0.5)


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=1, max_value=10**6),
       st.fractions(min_value=Fraction(1, 100), max_value=1))
def test_alpha_part_prime_structure(q, alpha):
    # alpha_part(q, 1) = q; each prime power p^floor(n*alpha) divides exactly
    part = alpha_part(q, alpha)
    assert alpha_part(q, 1) == q
    assert q % part == 0
    for p, n in factorize(q).pairs:
        e = (n * alpha.numerator) // alpha.denominator
        if e == 0:
            assert part % p != 0
        else:
            assert part % p**e == 0 and part % p**(e + 1) != 0


def test_crt_examples():
    f12 = factorize(12)
    assert crt_split(7, f12) == [3, 1]
    assert crt_combine([3, 1], f12) == 7
    assert crt_split(0, f12) == [0, 0]
    with pytest.raises(ValueError):
        crt_combine([1], f12)


def test_crt_combine_general_rejects_noncoprime():
    with pytest.raises(ValueError):
        crt_combine_general([1, 2], [4, 6])
    assert crt_combine_general([3, 1], [4, 3]) == 7


def test_crt_roundtrip_exhaustive_to_1000():
    for q in range(1, 1001):
        f = factorize(q)
        for x in range(q):
            assert crt_combine(crt_split(x, f), f) == x
