"""Serialization helpers: canonical JSON, rational encoding, config hashing.

Output files must be bit-identical for identical (config, seed) regardless
of thread count, so everything goes through canonical_json: sorted keys,
fixed separators, rationals as "num/den" strings, floats via repr (shortest
round-trip form).
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__


def jsonable(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    return obj


def canonical_json(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()[:16]


def fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def write_summary(path: str | Path, payload: dict, config: dict) -> None:
    """JSON summary with the config hash and tool version embedded."""
    doc = dict(payload)
    doc["config_hash"] = config_hash(config)
    doc["tool_version"] = __version__
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(json.dumps(jsonable(doc), sort_keys=True, indent=2))
        fh.write("\n")


def write_csv(path: str | Path, header: list[str], rows) -> None:
    import csv

    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([jsonable(x) if isinstance(x, (Fraction, np.generic)) else x
                        for x in row])
