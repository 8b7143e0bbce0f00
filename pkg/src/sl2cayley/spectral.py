"""Spectrum of the normalized walk operator and Cheeger-inequality bounds.

The walk operator averages over the generating multiset: (Tf)(v) is the mean
of f over the |S| right-translates of v.  With S symmetric the operator is
self-adjoint and its spectrum lives in [-1, 1]; the top eigenvalue 1 belongs
to the constant vector.  Dense mode computes the full spectrum with
numpy.linalg.eigh; iterative mode runs a residual-certified Lanczos
recurrence on the mean-zero subspace, which is what scales to the
six-figure vertex counts of the bigger presets.

Floating point (binary64) is used for spectra only; everything else in the
package stays exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .cayley import CayleyGraph
from .errors import ConvergenceError

DENSE_MAX_VERTICES = 5000
AUTO_DENSE_THRESHOLD = 2048
RESIDUAL_TOL = 1e-9
LANCZOS_STEP_CAP = 2000
_START_SEED = 0x51CA71E


@dataclass
class Spectrum:
    """Eigenvalues of the walk operator, sorted descending."""

    eigenvalues: np.ndarray
    residual_tol: float
    restricted_to_mean_zero: bool
    mode: str

    @property
    def top(self) -> float:
        return float(self.eigenvalues[0])


@dataclass
class SpectralGap:
    """Two-sided gap data on the mean-zero subspace."""

    n: int
    degree: int
    lambda2: float
    lambda_min: float
    bipartite: bool
    mode: str

    @property
    def lambda_star(self) -> float:
        return max(abs(self.lambda2), abs(self.lambda_min))

    @property
    def gap(self) -> float:
        return 1.0 - self.lambda_star


def dense_walk_matrix(g: CayleyGraph) -> np.ndarray:
    """The N x N walk operator as a dense float matrix (rows average
    neighbor values; symmetric because S is symmetric)."""
    n, k = g.size, g.degree
    t = np.zeros((n, n), dtype=np.float64)
    rows = np.repeat(np.arange(n), k)
    np.add.at(t, (rows, g.neighbors.ravel()), 1.0)
    t /= k
    return t


def apply_walk(g: CayleyGraph, w: np.ndarray) -> np.ndarray:
    return _kernels.walk_matvec(g.neighbors, np.asarray(w, dtype=np.float64)) / g.degree


def evolve_delta(g: CayleyGraph, l: int, start: int | None = None) -> np.ndarray:
    """T^l applied to the point mass at `start` (default: the identity vertex)."""
    v = np.zeros(g.size, dtype=np.float64)
    v[g.group.identity_position() if start is None else start] = 1.0
    for _ in range(l):
        v = apply_walk(g, v)
    return v


def is_bipartite(g: CayleyGraph) -> tuple[bool, np.ndarray]:
    """Two-color the multigraph by BFS; returns (bipartite, colors)."""
    color = np.full(g.size, -1, dtype=np.int8)
    color[0] = 0
    frontier = np.array([0], dtype=np.int64)
    while frontier.size:
        nb = g.neighbors[frontier]
        loops = nb == frontier[:, None]
        if np.any(loops):
            return False, color
        want = (1 - color[frontier])[:, None].repeat(g.degree, axis=1)
        flat_nb = nb.ravel()
        flat_want = want.ravel().astype(np.int8)
        known = color[flat_nb] >= 0
        if np.any(color[flat_nb[known]] != flat_want[known]):
            return False, color
        new = flat_nb[~known]
        if new.size:
            _, first = np.unique(new, return_index=True)
            new = new[np.sort(first)]
            color[new] = flat_want[~known][np.sort(first)]
        frontier = new
    return True, color


def spectrum(g: CayleyGraph, mode: str = "dense") -> Spectrum:
    """Eigenvalues of the walk operator.

    dense: full spectrum, N <= 5000, eigenpair residuals checked to 1e-9.
    iterative: only the mean-zero extremes (lambda2, lambda_min) via
    spectral_gap; returned as a two-entry restricted spectrum.
    """
    if mode == "dense":
        if g.size > DENSE_MAX_VERTICES:
            raise ValueError(
                f"dense mode caps at N = {DENSE_MAX_VERTICES}, got {g.size}")
        t = dense_walk_matrix(g)
        vals, vecs = np.linalg.eigh(t)
        resid = t @ vecs - vecs * vals
        worst = float(np.max(np.linalg.norm(resid, axis=0))) if g.size else 0.0
        if worst > RESIDUAL_TOL:
            raise ConvergenceError(
                f"dense eigensolve residual {worst:.3e} exceeds {RESIDUAL_TOL}")
        order = np.argsort(vals, kind="stable")[::-1]
        return Spectrum(eigenvalues=vals[order], residual_tol=RESIDUAL_TOL,
                        restricted_to_mean_zero=False, mode="dense")
    if mode == "iterative":
        sg = spectral_gap(g, mode="iterative")
        return Spectrum(eigenvalues=np.array([sg.lambda2, sg.lambda_min]),
                        residual_tol=RESIDUAL_TOL,
                        restricted_to_mean_zero=True, mode="iterative")
    raise ValueError(f"unknown mode {mode!r}")


class _LanczosState:
    """Three-term Lanczos recurrence for T on the mean-zero subspace.

    No basis is stored: orthogonality against the constant vector is
    re-imposed every step, plus one local reorthogonalization against the
    two most recent vectors.  Starting from the fixed seeded vector the run
    is fully deterministic, so a second pass replays the identical vector
    sequence, which is how Ritz vectors get reconstructed without holding
    the basis in memory.
    """

    def __init__(self, g: CayleyGraph):
        n = g.size
        rng = np.random.default_rng(_START_SEED)
        self.ones = np.full(n, 1.0 / math.sqrt(n))
        v = rng.standard_normal(n)
        v -= (self.ones @ v) * self.ones
        v /= np.linalg.norm(v)
        self.v = v
        self.v_prev = np.zeros(n)
        self.beta_prev = 0.0

    def step(self, g: CayleyGraph) -> tuple[float, float, bool]:
        w = apply_walk(g, self.v)
        w -= self.beta_prev * self.v_prev
        alpha = float(self.v @ w)
        w -= alpha * self.v
        w -= (self.v @ w) * self.v
        w -= (self.v_prev @ w) * self.v_prev
        w -= (self.ones @ w) * self.ones
        beta = float(np.linalg.norm(w))
        if beta < 1e-14:
            return alpha, beta, True
        self.v_prev, self.v = self.v, w / beta
        self.beta_prev = beta
        return alpha, beta, False


def _tridiag_eigh(alphas, betas):
    m = len(alphas)
    t = np.zeros((m, m))
    t[np.arange(m), np.arange(m)] = alphas
    if m > 1:
        idx = np.arange(m - 1)
        t[idx, idx + 1] = betas[:m - 1]
        t[idx + 1, idx] = betas[:m - 1]
    return np.linalg.eigh(t)


def _lanczos_extremes(g: CayleyGraph, tol: float = RESIDUAL_TOL,
                      max_steps: int = LANCZOS_STEP_CAP) -> tuple[float, float]:
    """(max, min) eigenvalue of T on mean-zero functions, residual-certified.

    Runs until the extreme Ritz residual bounds |beta_m s_m| drop below tol
    (checked every 25 steps), then reconstructs the two extreme Ritz vectors
    in a deterministic second pass and verifies their explicit walk-operator
    residuals; reports non-convergence rather than a truncated answer.
    """
    n = g.size
    limit = min(max_steps, n)
    st = _LanczosState(g)
    alphas: list[float] = []
    betas: list[float] = []
    exhausted = False
    while len(alphas) < limit:
        alpha, beta, exhausted = st.step(g)
        alphas.append(alpha)
        if exhausted:
            break
        betas.append(beta)
        m = len(alphas)
        if m % 25 == 0 or m == limit:
            vals, vecs = _tridiag_eigh(alphas, betas)
            res_hi = abs(beta * vecs[m - 1, -1])
            res_lo = abs(beta * vecs[m - 1, 0])
            if res_hi <= 0.5 * tol and res_lo <= 0.5 * tol:
                break
    m = len(alphas)
    vals, vecs = _tridiag_eigh(alphas, betas)
    if exhausted:
        # invariant Krylov subspace: the tridiagonal spectrum is exact
        return float(vals[-1]), float(vals[0])
    s_hi, s_lo = vecs[:, -1], vecs[:, 0]
    ritz_hi = np.zeros(n)
    ritz_lo = np.zeros(n)
    replay = _LanczosState(g)
    for j in range(m):
        ritz_hi += s_hi[j] * replay.v
        ritz_lo += s_lo[j] * replay.v
        if j < m - 1:
            replay.step(g)
    out = []
    for ritz in (ritz_hi, ritz_lo):
        nv = float(np.linalg.norm(ritz))
        if nv < 1e-8:
            raise ConvergenceError("Ritz vector reconstruction collapsed")
        ritz /= nv
        tv = apply_walk(g, ritz)
        rho = float(ritz @ tv)
        resid = float(np.linalg.norm(tv - rho * ritz))
        if resid > tol:
            raise ConvergenceError(
                f"iterative eigensolve residual {resid:.3e} exceeds {tol} "
                f"after {m} Lanczos steps (cap {max_steps})")
        out.append(rho)
    return out[0], out[1]


def spectral_gap(g: CayleyGraph, mode: str = "auto") -> SpectralGap:
    """lambda2, lambda_min and the two-sided gap on mean-zero functions.

    The gap is 1 - max|lambda| over the mean-zero spectrum: positive iff the
    graph is connected and non-bipartite.  Bipartiteness is detected
    structurally (exact two-coloring), so lambda_min = -1 is exact there.
    """
    n = g.size
    if n < 2:
        raise ValueError("spectral gap needs at least 2 vertices "
                         "(the mean-zero subspace is trivial)")
    if mode == "auto":
        mode = "dense" if n <= AUTO_DENSE_THRESHOLD else "iterative"
    bip, colors = is_bipartite(g)
    if mode == "dense":
        spec = spectrum(g, mode="dense")
        vals = spec.eigenvalues
        if n >= 2 and vals[1] > 1.0 - 1e-12:
            raise ValueError("walk operator has a repeated top eigenvalue; "
                             "the graph is disconnected")
        lam2 = float(vals[1])
        lam_min = float(vals[-1])
        return SpectralGap(n=n, degree=g.degree, lambda2=lam2,
                           lambda_min=lam_min, bipartite=bip, mode="dense")
    if mode != "iterative":
        raise ValueError(f"unknown mode {mode!r}")
    lam2, lam_min = _lanczos_extremes(g)
    if bip:
        # the two-coloring certifies -1 exactly
        lam_min = -1.0
    lam2 = min(lam2, 1.0)
    lam_min = max(lam_min, -1.0)
    return SpectralGap(n=n, degree=g.degree, lambda2=lam2,
                       lambda_min=lam_min, bipartite=bip, mode="iterative")


def cheeger_bounds(g: CayleyGraph, gap: SpectralGap | None = None,
                   mode: str = "auto") -> tuple[float, float]:
    """Alon-Milman sandwich for the edge-count Cheeger constant:
    k(1 - lambda2)/2 <= h <= k*sqrt(2(1 - lambda2))."""
    if gap is None:
        gap = spectral_gap(g, mode=mode)
    k = g.degree
    one_minus = max(0.0, 1.0 - gap.lambda2)
    return k * one_minus / 2.0, k * math.sqrt(2.0 * one_minus)
