"""Exact self-convolution measures and non-concentration functionals.

Measures are stored as integer numerator vectors over a common denominator
(both arbitrary precision when needed), so probability conservation and
symmetry are exact identities rather than tolerances.  The fast path keeps
numerators in int64 and runs through the convolution kernel; once the mass
bound (sum of numerators) no longer fits, everything falls back to python
integers transparently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .cayley import CayleyGraph, build_cayley
from .genset import GeneratingSet, require_symmetric
from .sl2core import GroupIndex
from .spectral import SpectralGap, spectral_gap

_I64_SAFE = 2**62


def _same_index(a: GroupIndex, b: GroupIndex) -> bool:
    return a is b or (a.moduli == b.moduli and np.array_equal(a.labels, b.labels))


def _exact_sum(nums: np.ndarray) -> int:
    """Exact sum of a nonnegative numerator vector, immune to int64 wrap."""
    if nums.dtype == np.int64:
        if float(nums.sum(dtype=np.float64)) < 2**62:
            return int(nums.sum())
        return int(nums.astype(object).sum())
    return int(nums.sum()) if nums.size else 0


class GroupMeasure:
    """Exact nonnegative measure on a GroupIndex: numerators over one denominator."""

    def __init__(self, group: GroupIndex, nums, den: int):
        self.group = group
        if isinstance(nums, np.ndarray) and nums.dtype == np.int64:
            self.nums = nums
        else:
            self.nums = np.array([int(x) for x in nums], dtype=object)
        if len(self.nums) != group.size:
            raise ValueError("numerator vector does not match index size")
        self.den = int(den)
        if self.den <= 0:
            raise ValueError("denominator must be positive")
        self._canonicalize()

    def _canonicalize(self):
        if self.nums.dtype == np.int64:
            if np.any(self.nums < 0):
                raise ValueError("measure masses must be nonnegative")
            g = math.gcd(int(np.gcd.reduce(self.nums)) if self.nums.size else 0, self.den)
            if g > 1:
                self.nums = self.nums // g
                self.den //= g
        else:
            g = self.den
            for x in self.nums:
                if x < 0:
                    raise ValueError("measure masses must be nonnegative")
                g = math.gcd(g, x)
            if g > 1:
                self.nums = np.array([x // g for x in self.nums], dtype=object)
                self.den //= g
            # drop back to the fast representation when it fits again
            if all(x < _I64_SAFE for x in self.nums):
                self.nums = self.nums.astype(np.int64)

    @property
    def size(self) -> int:
        return self.group.size

    def mass_at(self, i: int) -> Fraction:
        return Fraction(int(self.nums[i]), self.den)

    def total(self) -> Fraction:
        return Fraction(_exact_sum(self.nums), self.den)

    def mass_of_positions(self, positions) -> Fraction:
        pos = np.asarray(positions, dtype=np.int64)
        return Fraction(_exact_sum(self.nums[pos]), self.den)

    def support_positions(self) -> np.ndarray:
        if self.nums.dtype == np.int64:
            return np.flatnonzero(self.nums)
        return np.array([i for i, x in enumerate(self.nums) if x != 0], dtype=np.int64)

    def as_float(self) -> np.ndarray:
        if self.nums.dtype == np.int64:
            return self.nums / float(self.den)
        return np.array([float(Fraction(int(x), self.den)) for x in self.nums])

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupMeasure):
            return NotImplemented
        if not _same_index(self.group, other.group):
            return False
        if self.den != other.den or len(self.nums) != len(other.nums):
            return False
        return all(int(a) == int(b) for a, b in zip(self.nums, other.nums))

    def __repr__(self) -> str:
        return (f"GroupMeasure(N={self.size}, den={self.den}, "
                f"support={len(self.support_positions())})")


def delta(group: GroupIndex, position: int | None = None) -> GroupMeasure:
    nums = np.zeros(group.size, dtype=np.int64)
    nums[group.identity_position() if position is None else position] = 1
    return GroupMeasure(group, nums, 1)


def chi_S(s: GeneratingSet, group: GroupIndex) -> GroupMeasure:
    """Pushforward of the uniform measure on S to the reduced group:
    mass(g) = multiplicity of g among the reduced generators / |S|."""
    require_symmetric(s)
    labels = s.reduced_labels(group.moduli)
    pos = group.positions_of_enc(group.encode_labels(labels))
    nums = np.zeros(group.size, dtype=np.int64)
    np.add.at(nums, pos, 1)
    return GroupMeasure(group, nums, len(s))


def uniform(group: GroupIndex) -> GroupMeasure:
    return GroupMeasure(group, np.ones(group.size, dtype=np.int64), group.size)


def _convolve_big(group: GroupIndex, supp1, nums1, supp2, nums2) -> np.ndarray:
    out = np.zeros(group.size, dtype=object)
    out[:] = 0
    if len(supp1) <= len(supp2):
        outer, inner, swap = supp1, supp2, False
    else:
        outer, inner, swap = supp2, supp1, True
    for t in outer:
        if swap:
            pos = group.mul_positions(np.full(len(inner), t, dtype=np.int64), inner)
            contrib = nums2[t] * nums1[inner]
        else:
            pos = group.mul_positions(inner, np.full(len(inner), t, dtype=np.int64))
            contrib = nums1[t] * nums2[inner]
        np.add.at(out, pos, contrib)
    return out


def convolve(mu: GroupMeasure, nu: GroupMeasure) -> GroupMeasure:
    """Exact convolution (mu * nu)(x) = sum_y mu(y) nu(x y^-1)."""
    if not _same_index(mu.group, nu.group):
        raise ValueError("measures live on different group indexes")
    group = mu.group
    supp1 = mu.support_positions()
    supp2 = nu.support_positions()
    den = mu.den * nu.den
    # every output numerator is at most (sum nums1) * (sum nums2)
    fast = (mu.nums.dtype == np.int64 and nu.nums.dtype == np.int64
            and _exact_sum(mu.nums) * _exact_sum(nu.nums) < _I64_SAFE)
    if fast:
        tabs = _get_tables(group)
        if tabs is not None:
            out = _kernels.convolve_i64(tabs, supp1, mu.nums[supp1],
                                        supp2, nu.nums[supp2])
            return GroupMeasure(group, out, den)
    nums1 = mu.nums if mu.nums.dtype == object else mu.nums.astype(object)
    nums2 = nu.nums if nu.nums.dtype == object else nu.nums.astype(object)
    out = _convolve_big(group, supp1, nums1, supp2, nums2)
    return GroupMeasure(group, out, den)


def _get_tables(group: GroupIndex):
    tabs = getattr(group, "_kernel_tables", None)
    if tabs is None and not getattr(group, "_kernel_tables_failed", False):
        try:
            tabs = _kernels.GroupTables.from_group_index(group)
            group._kernel_tables = tabs
        except ValueError:
            group._kernel_tables_failed = True
    return tabs


def power(mu: GroupMeasure, l: int) -> GroupMeasure:
    """l-fold self-convolution, exactly.

    Strategy is cost-based: repeated squaring densifies the support, so for
    sparse measures (chi_S in particular) a left fold of convolutions by mu
    is far cheaper; both produce identical exact results, so the cheaper
    plan is chosen.
    """
    if l < 1:
        raise ValueError(f"power needs l >= 1, got {l}")
    if l == 1:
        return mu
    n = mu.group.size
    s0 = len(mu.support_positions())
    cost_fold = (l - 1) * s0 * n
    cost_square = 2 * max(1, l.bit_length()) * n * n
    if cost_fold <= cost_square:
        acc = mu
        for _ in range(l - 1):
            acc = convolve(acc, mu)
        return acc
    # binary exponentiation
    acc = None
    base = mu
    k = l
    while k:
        if k & 1:
            acc = base if acc is None else convolve(acc, base)
        k >>= 1
        if k:
            base = convolve(base, base)
    return acc


def l2_distance_to_uniform(mu: GroupMeasure) -> float:
    """||mu - uniform||_2 over the measure's own index (counting-measure l2)."""
    n = mu.size
    den = mu.den
    if mu.nums.dtype == np.int64 and den * n < 2**53:
        # n_i * N and den both below 2**53: the differences are exact floats
        d = mu.nums.astype(np.float64) * n - float(den)
        return float(np.sqrt(np.dot(d, d)) / (den * n))
    total = 0
    for x in mu.nums:
        t = int(x) * n - den
        total += t * t
    return math.sqrt(total) / (den * n)


@dataclass
class DecayRow:
    l: int
    distance: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.distance <= self.bound + 1e-9


@dataclass
class DecayReport:
    moduli: tuple[int, int, int]
    lambda_star: float
    rows: list[DecayRow]

    @property
    def all_ok(self) -> bool:
        return all(r.ok for r in self.rows)


def decay_check(s: GeneratingSet, moduli: tuple[int, int, int] | int, l_max: int,
                graph: CayleyGraph | None = None,
                gap: SpectralGap | None = None) -> DecayReport:
    """Compare ||chi^(l) - uniform||_2 against lambda_star^l for l = 1..l_max.

    The exact walk distribution is evolved by successive convolution with
    chi_S; lambda_star is the measured two-sided bound max|lambda| on the
    mean-zero subspace of the same graph.
    """
    if isinstance(moduli, int):
        moduli = (moduli, moduli, moduli)
    if graph is None:
        graph = build_cayley(s, moduli)
    if gap is None:
        gap = spectral_gap(graph, mode="auto")
    chi = chi_S(s, graph.group)
    rows = []
    acc = chi
    for l in range(1, l_max + 1):
        if l > 1:
            acc = convolve(acc, chi)
        rows.append(DecayRow(l=l, distance=l2_distance_to_uniform(acc),
                             bound=gap.lambda_star**l))
    return DecayReport(moduli=moduli, lambda_star=gap.lambda_star, rows=rows)


@dataclass(frozen=True)
class LinearForm:
    """Primitive integer linear form on the 12 matrix entries of a triple."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != 12:
            raise ValueError("a linear form needs 12 coefficients")
        if math.gcd(*self.coeffs) != 1:
            raise ValueError(f"form {self.coeffs} is not primitive "
                             "(gcd of coefficients must be 1)")

    def factor_values(self, group: GroupIndex, q_mod: int) -> np.ndarray:
        """Per-element value of the form mod q_mod, over the whole index."""
        total = np.zeros(group.size, dtype=np.int64)
        for f in range(3):
            e = group.factors[f].elements
            cf = self.coeffs[4 * f:4 * f + 4]
            vals = (cf[0] * e[:, 0] + cf[1] * e[:, 1]
                    + cf[2] * e[:, 2] + cf[3] * e[:, 3]) % q_mod
            total = (total + vals[group.labels[:, f]]) % q_mod
        return total


def _require_divisible(group: GroupIndex, q_mod: int):
    if q_mod < 1:
        raise ValueError("modulus Q must be >= 1")
    for q in group.moduli:
        if q % q_mod != 0:
            raise ValueError(
                f"Q = {q_mod} must divide every component modulus, got {group.moduli}")


def linear_form_profile(mu: GroupMeasure, form: LinearForm, q_mod: int
                        ) -> list[Fraction]:
    """Masses of the level sets {L(g) = n mod Q} for n = 0..Q-1 (exact)."""
    _require_divisible(mu.group, q_mod)
    vals = form.factor_values(mu.group, q_mod)
    if mu.nums.dtype == np.int64:
        sums = np.zeros(q_mod, dtype=np.int64)
        np.add.at(sums, vals, mu.nums)
        return [Fraction(int(x), mu.den) for x in sums]
    sums = [0] * q_mod
    for v, x in zip(vals, mu.nums):
        sums[int(v)] += int(x)
    return [Fraction(x, mu.den) for x in sums]


def mass_on_linear_form(mu: GroupMeasure, form: LinearForm, q_mod: int,
                        n: int) -> Fraction:
    """mu({g : L(g) = n mod Q}), exactly."""
    return linear_form_profile(mu, form, q_mod)[n % q_mod]


def _as_int_matrix(m) -> tuple[tuple[int, int], tuple[int, int]]:
    mat = tuple(tuple(int(x) for x in row) for row in m)
    if len(mat) != 2 or any(len(r) != 2 for r in mat):
        raise ValueError(f"not a 2x2 matrix: {m!r}")
    return mat


@dataclass(frozen=True)
class TraceFormData:
    """Conjugation trace forms kappa_i(g) = Tr(g xi_i g^-1 eta_i) mod Q.

    All six matrices must be traceless and nonvanishing mod every prime
    dividing Q.
    """

    xi: tuple
    eta: tuple
    q_mod: int

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(_as_int_matrix(m) for m in self.xi))
        object.__setattr__(self, "eta", tuple(_as_int_matrix(m) for m in self.eta))
        if len(self.xi) != 3 or len(self.eta) != 3:
            raise ValueError("xi and eta must be triples of matrices")
        for name, mats in (("xi", self.xi), ("eta", self.eta)):
            for i, m in enumerate(mats):
                if m[0][0] + m[1][1] != 0:
                    raise ValueError(f"{name}[{i + 1}] = {m} is not traceless")
        from .modarith import factorize
        for p in factorize(self.q_mod).primes:
            for name, mats in (("xi", self.xi), ("eta", self.eta)):
                for i, m in enumerate(mats):
                    if all(x % p == 0 for row in m for x in row):
                        raise ValueError(
                            f"{name}[{i + 1}] vanishes mod p = {p} dividing Q = {self.q_mod}")

    def kappa_values(self, group: GroupIndex, factor: int) -> np.ndarray:
        """kappa_{factor+1} over all elements of that factor group, mod Q."""
        q = self.q_mod
        e = group.factors[factor].elements
        a, b, c, d = (e[:, i] % q for i in range(4))
        x = np.array(self.xi[factor], dtype=np.int64) % q
        y = np.array(self.eta[factor], dtype=np.int64) % q
        # m = g xi g^-1 with g^-1 = [[d, -b], [-c, a]]
        g = np.stack([np.stack([a, b], axis=-1), np.stack([c, d], axis=-1)], axis=-2)
        ginv = np.stack([np.stack([d, (-b) % q], axis=-1),
                         np.stack([(-c) % q, a], axis=-1)], axis=-2)
        m = np.einsum("nij,jk,nkl->nil", g, x, ginv) % q
        # trace(m @ y)
        tr = (m[:, 0, 0] * y[0, 0] + m[:, 0, 1] * y[1, 0]
              + m[:, 1, 0] * y[0, 1] + m[:, 1, 1] * y[1, 1]) % q
        return tr


def trace_form_values(d: TraceFormData, group: GroupIndex) -> np.ndarray:
    """kappa_1(g1) + kappa_2(g2) + kappa_3(g3) mod Q per index position."""
    _require_divisible(group, d.q_mod)
    total = np.zeros(group.size, dtype=np.int64)
    for f in range(3):
        k = d.kappa_values(group, f)
        total = (total + k[group.labels[:, f]]) % d.q_mod
    return total


def mass_on_trace_form(mu: GroupMeasure, d: TraceFormData) -> Fraction:
    """mu({(g1,g2,g3) : sum kappa_i(g_i) = 0 mod Q}), exactly."""
    vals = trace_form_values(d, mu.group)
    return mu.mass_of_positions(np.flatnonzero(vals == 0))


@dataclass
class NonConcentrationRow:
    l: int
    q_mod: int
    max_mass: Fraction
    argmax_n: int
    bound: float
    exponent: float  # -log(max mass)/log Q, the measured concentration exponent
    profile: list  # per-residue masses, index n -> Fraction

    @property
    def ok(self) -> bool:
        return float(self.max_mass) <= self.bound + 1e-9


def nonconcentration_sweep(s: GeneratingSet, form: LinearForm, q_mod: int,
                           l_values, graph: CayleyGraph | None = None,
                           gap: SpectralGap | None = None
                           ) -> list[NonConcentrationRow]:
    """Level-set mass sweep for chi^(l) against the Cauchy-Schwarz bound
    maxlevel/N + sqrt(maxlevel) * lambda_star^l."""
    moduli = (q_mod, q_mod, q_mod)
    if graph is None:
        graph = build_cayley(s, moduli)
    if not graph.group.is_full:
        raise ValueError("non-concentration sweep needs a surjective preset "
                         "(uniform lives on the full product group)")
    if gap is None:
        gap = spectral_gap(graph, mode="auto")
    vals = form.factor_values(graph.group, q_mod)
    level_sizes = np.bincount(vals, minlength=q_mod)
    max_level = int(level_sizes.max())
    n_total = graph.group.size
    chi = chi_S(s, graph.group)
    rows = []
    acc = None
    l_values = sorted(set(int(l) for l in l_values))
    cur = 0
    for l in l_values:
        while cur < l:
            acc = chi if acc is None else convolve(acc, chi)
            cur += 1
        profile = linear_form_profile(acc, form, q_mod)
        max_mass = max(profile)
        argmax_n = profile.index(max_mass)
        bound = max_level / n_total + math.sqrt(max_level) * gap.lambda_star**l
        expo = (-math.log(float(max_mass)) / math.log(q_mod)
                if 0 < float(max_mass) < 1 and q_mod > 1 else 0.0)
        rows.append(NonConcentrationRow(l=l, q_mod=q_mod, max_mass=max_mass,
                                        argmax_n=argmax_n, bound=bound,
                                        exponent=expo, profile=profile))
    return rows
