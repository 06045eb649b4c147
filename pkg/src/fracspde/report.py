"""Serialization helpers shared by the library reports and the CLI."""
from __future__ import annotations

import hashlib
import json
import math
from fractions import Fraction

import numpy as np


def plain(obj):
    """Convert numpy scalars/arrays, Fractions and tuples to JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float, Fraction)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def canonical_json(obj):
    return json.dumps(plain(obj), sort_keys=True, separators=(",", ":"))


def config_hash(obj):
    """sha256 of the canonical JSON of a resolved configuration."""
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def fmt(x, digits=12):
    """Number with `digits` significant digits (integers and strings pass through)."""
    if isinstance(x, (bool, np.bool_, str)) or x is None:
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return repr(x)
    return f"{x:.{digits}g}"
