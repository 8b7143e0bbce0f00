"""Cayley multigraph construction and boundary/Cheeger combinatorics.

Vertices are the BFS-generated subgroup (see genset); for each generator j
the neighbor table stores v * s_j.  Boundary counts are multigraph-exact:
multiple generators reaching the same neighbor contribute multiple edges,
and loops (identity generators) count toward the degree but never toward a
boundary.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import _kernels
from .genset import GeneratingSet, generated_subgroup, require_symmetric
from .sl2core import PRODUCT_CAP, GroupIndex

EXACT_CHEEGER_MAX_VERTICES = 24


@dataclass
class CayleyGraph:
    """k-regular Cayley multigraph on a GroupIndex.

    neighbors[v, j] is the vertex v * s_j; k = len(gens) counts multiplicity.
    """

    group: GroupIndex
    gens: GeneratingSet
    neighbors: np.ndarray  # (N, k) int32

    @property
    def size(self) -> int:
        return self.group.size

    @property
    def degree(self) -> int:
        return self.neighbors.shape[1]

    @property
    def moduli(self) -> tuple[int, int, int]:
        return self.group.moduli

    def loop_count_at(self, v: int) -> int:
        return int(np.count_nonzero(self.neighbors[v] == v))

    def edge_rows(self):
        """Directed edge rows (u, v, generator_index); each undirected
        non-loop edge appears twice via the inverse-paired generator."""
        for u in range(self.size):
            for j in range(self.degree):
                yield u, int(self.neighbors[u, j]), j

    def export(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "edges.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["u", "v", "generator_index"])
            for row in self.edge_rows():
                w.writerow(row)
        header = {
            "moduli": list(self.moduli),
            "num_generators": self.degree,
            "num_vertices": self.size,
        }
        with open(out / "header.json", "w") as fh:
            json.dump(header, fh, sort_keys=True, indent=2)
            fh.write("\n")


def build_cayley(s: GeneratingSet, moduli: tuple[int, int, int],
                 cap: int = PRODUCT_CAP) -> CayleyGraph:
    """Cayley multigraph of the reduced generating set on its BFS subgroup."""
    require_symmetric(s)
    group = generated_subgroup(s, moduli, cap=cap)
    gen_labels = s.reduced_labels(moduli)
    n = group.size
    neigh = np.empty((n, len(gen_labels)), dtype=np.int32)
    labels = group.labels
    for j in range(len(gen_labels)):
        tgt = np.empty((n, 3), dtype=np.int64)
        for f in range(3):
            tgt[:, f] = group.factors[f].mul_labels(
                labels[:, f], np.full(n, gen_labels[j, f], dtype=np.int64))
        neigh[:, j] = group.positions_of_enc(group.encode_labels(tgt))
    return CayleyGraph(group=group, gens=s, neighbors=neigh)


def _as_vertex_array(g: CayleyGraph, a) -> np.ndarray:
    arr = np.unique(np.asarray(list(a) if not isinstance(a, np.ndarray) else a,
                               dtype=np.int64))
    if arr.size and (arr[0] < 0 or arr[-1] >= g.size):
        raise IndexError(f"vertex ids must lie in [0, {g.size})")
    return arr


def boundary_size(g: CayleyGraph, a) -> int:
    """Number of multigraph edges with exactly one endpoint in a."""
    arr = _as_vertex_array(g, a)
    if arr.size == 0 or arr.size == g.size:
        return 0
    member = np.zeros(g.size, dtype=bool)
    member[arr] = True
    # directed edges leaving a equal the undirected crossing count
    # (generator/inverse pairing matches directed edges one-to-one)
    return int(np.count_nonzero(~member[g.neighbors[arr]]))


def cheeger_ratio(g: CayleyGraph, a) -> Fraction:
    """|boundary(a)| / |a| as an exact rational; requires 0 < |a| <= N/2."""
    arr = _as_vertex_array(g, a)
    if arr.size == 0:
        raise ValueError("subset must be nonempty")
    if 2 * arr.size > g.size:
        raise ValueError(f"subset size {arr.size} exceeds half of {g.size}")
    return Fraction(boundary_size(g, arr), arr.size)


def exact_cheeger(g: CayleyGraph, threads: int = 1) -> tuple[Fraction, tuple[int, ...]]:
    """Exact Cheeger constant by exhaustive subset scan (N <= 24).

    Returns (h, witness vertices).  The witness is the minimizer whose
    membership mask, read as an integer with bit i for vertex i, is smallest.
    """
    n = g.size
    if n > EXACT_CHEEGER_MAX_VERTICES:
        raise ValueError(
            f"exact Cheeger needs N <= {EXACT_CHEEGER_MAX_VERTICES} "
            f"(got N = {n}); use spectral cheeger_bounds instead")
    if n < 2:
        raise ValueError("graph must have at least 2 vertices")
    b, m, mask = _kernels.cheeger_scan(g.neighbors, threads=threads)
    witness = tuple(v for v in range(n) if (mask >> v) & 1)
    return Fraction(b, m), witness
