"""Built-in generating sets.

These are artifacts of this tool, chosen for good coverage of behaviours:
DIAGONAL is a deliberately non-surjective control (all three components move
in lockstep), TWISTED uses componentwise-distinct words in A, B and fills the
full product group at every modulus we materialize, DENSE-RANDOM is a seeded
random symmetric set with small entries.
"""

from __future__ import annotations

import numpy as np

from .genset import GeneratingSet
from .sl2core import INT_A, INT_B, int_mat_mul

_AB = int_mat_mul(INT_A, INT_B)
_BB = int_mat_mul(INT_B, INT_B)

DEFAULT_RANDOM_SEED = 20240601

PRESET_NAMES = ("DIAGONAL", "TWISTED", "DENSE-RANDOM")


def diagonal() -> GeneratingSet:
    return GeneratingSet.symmetrized([
        (INT_A, INT_A, INT_A),
        (INT_B, INT_B, INT_B),
    ])


def twisted() -> GeneratingSet:
    # Words per factor chosen so the exponent vectors span every abelianized
    # factor triple (the reduced subgroup fills the product group) while the
    # word-length parities admit no common sign character (the Cayley graphs
    # stay non-bipartite, so the walk has a two-sided gap).
    return GeneratingSet.symmetrized([
        (INT_A, INT_B, _AB),
        (INT_B, _AB, INT_A),
        (_AB, INT_A, _BB),
        (INT_A, INT_A, INT_B),
    ])


def dense_random(seed: int = DEFAULT_RANDOM_SEED, count: int = 3) -> GeneratingSet:
    """Seeded symmetric set of `count` random triples with entries in [-3, 3]."""
    rng = np.random.default_rng(seed)
    triples = []
    while len(triples) < count:
        mats = []
        while len(mats) < 3:
            a, b, c, d = (int(x) for x in rng.integers(-3, 4, size=4))
            if a * d - b * c == 1:
                mats.append(((a, b), (c, d)))
        triples.append(tuple(mats))
    return GeneratingSet.symmetrized(triples)


def get_preset(name: str, seed: int = DEFAULT_RANDOM_SEED) -> GeneratingSet:
    key = name.strip().upper().replace("_", "-")
    if key == "DIAGONAL":
        return diagonal()
    if key == "TWISTED":
        return twisted()
    if key == "DENSE-RANDOM":
        return dense_random(seed)
    raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")


# (preset, moduli) pairs exercised by the verification suites.  N is the
# vertex count of the resulting Cayley graph, listed for budget filtering.
PRESET_BATTERY = (
    ("DIAGONAL", (2, 2, 2)),    # N = 6
    ("DIAGONAL", (3, 3, 3)),    # N = 24
    ("DIAGONAL", (4, 4, 4)),    # N = 48
    ("DIAGONAL", (5, 5, 5)),    # N = 120
    ("TWISTED", (2, 2, 2)),     # N = 216
    ("TWISTED", (3, 3, 3)),     # N = 13824
    ("DENSE-RANDOM", (2, 2, 2)),
)

# Surjective TWISTED graphs used by the walk-decay suites.
DECAY_BATTERY = (
    ("TWISTED", (2, 2, 2)),
    ("TWISTED", (3, 3, 3)),
    ("TWISTED", (4, 4, 4)),
    ("TWISTED", (5, 5, 5)),
)
