"""Integer factorization, exact-divisor calculus and CRT split/combine.

Moduli are capped at 2**63 - 1.  Fractional exponents are exact rationals
throughout so that floor(n * alpha) is unambiguous at boundaries.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

MAX_MODULUS = 2**63 - 1

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@dataclass(frozen=True)
class Factorization:
    """Prime-power decomposition: pairs (p, n) with p strictly increasing, n >= 1."""

    value: int
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, n in self.pairs:
            if p <= last or n < 1:
                raise ValueError(f"malformed factorization {self.pairs!r}")
            last = p
            prod *= p**n
        if prod != self.value:
            raise ValueError(f"pairs {self.pairs!r} do not multiply to {self.value}")

    def exponent_of(self, p: int) -> int:
        for q, n in self.pairs:
            if q == p:
                return n
        return 0

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.pairs)


def _is_probable_prime(n: int) -> bool:
    # Deterministic Miller-Rabin for n < 3.3e24 with the fixed base set.
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int, rng: random.Random) -> int:
    # Brent's cycle variant; n must be odd composite with no small factors.
    while True:
        y = rng.randrange(1, n)
        c = rng.randrange(1, n)
        m = 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factorize(q: int) -> Factorization:
    """Prime-power decomposition of q, 1 <= q <= 2**63 - 1.

    Trial division by small primes, then deterministic Miller-Rabin plus
    Pollard rho (seeded; deterministic) for the remaining cofactor.
    """
    if not isinstance(q, int) or isinstance(q, bool):
        raise TypeError(f"modulus must be an int, got {type(q).__name__}")
    if q < 1:
        raise ValueError(f"modulus must be positive, got {q}")
    if q > MAX_MODULUS:
        raise ValueError(f"modulus {q} exceeds cap {MAX_MODULUS}")
    value = q
    exps: dict[int, int] = {}
    for p in range(2, 10000):
        if p * p > q:
            break
        while q % p == 0:
            exps[p] = exps.get(p, 0) + 1
            q //= p
    stack = [q] if q > 1 else []
    rng = random.Random(0x5EED)
    while stack:
        n = stack.pop()
        if n == 1:
            continue
        if _is_probable_prime(n):
            exps[n] = exps.get(n, 0) + 1
            continue
        d = _pollard_rho(n, rng)
        stack.append(d)
        stack.append(n // d)
    pairs = tuple(sorted(exps.items()))
    return Factorization(value=value, pairs=pairs)


def exact_divides(a: int, b: int) -> bool:
    """True iff every prime power exactly dividing a also exactly divides b."""
    if a < 1 or b < 1:
        raise ValueError("arguments must be positive")
    for p, n in factorize(a).pairs:
        pn = p**n
        if b % pn != 0 or b % (pn * p) == 0:
            return False
    return True


def alpha_part(q: int, alpha: Fraction | int) -> int:
    """The divisor prod p**floor(n*alpha) over prime powers p**n exactly dividing q.

    alpha must be an exact rational in (0, 1]; floats are rejected because the
    floor would become representation-dependent at boundaries.
    """
    if isinstance(alpha, float):
        raise TypeError("alpha must be an exact rational (Fraction or int), not float")
    alpha = Fraction(alpha)
    if alpha <= 0 or alpha > 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    out = 1
    for p, n in factorize(q).pairs:
        e = (n * alpha.numerator) // alpha.denominator
        out *= p**e
    return out


def crt_split(x: int, factors: Factorization) -> list[int]:
    """Residues of x modulo each prime power of the factorization."""
    return [x % p**n for p, n in factors.pairs]


def crt_combine(residues: list[int], factors: Factorization) -> int:
    """Inverse of crt_split: the unique residue mod q matching all components.

    Raises if the component count mismatches; the prime-power moduli of a
    Factorization are pairwise coprime by construction.
    """
    if len(residues) != len(factors.pairs):
        raise ValueError("residue count does not match factor count")
    q = factors.value
    x = 0
    for r, (p, n) in zip(residues, factors.pairs):
        m = p**n
        rest = q // m
        x = (x + r * rest * pow(rest, -1, m)) % q
    return x


def crt_combine_general(residues: list[int], moduli: list[int]) -> int:
    """CRT for explicit pairwise-coprime moduli; rejects non-coprime inputs."""
    if len(residues) != len(moduli):
        raise ValueError("residue count does not match modulus count")
    for i in range(len(moduli)):
        for j in range(i + 1, len(moduli)):
            if math.gcd(moduli[i], moduli[j]) != 1:
                raise ValueError(f"moduli {moduli[i]} and {moduli[j]} are not coprime")
    q = math.prod(moduli)
    x = 0
    for r, m in zip(residues, moduli):
        rest = q // m
        x = (x + r * rest * pow(rest, -1, m)) % q
    return x
