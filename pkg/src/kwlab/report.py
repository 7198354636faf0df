"""Deterministic JSON serialization for verification reports.

Floats are printed with 17 significant digits, complex numbers as [re, im]
pairs, numpy scalars and arrays unwrapped; key order is preserved, so equal
inputs serialize to identical bytes.
"""

from __future__ import annotations

import numpy as np


def _fmt_float(x):
    return float(format(float(x), ".17g"))


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_fmt_float(obj.real), _fmt_float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def render(obj):
    import json
    return json.dumps(jsonable(obj), indent=2, sort_keys=False)


def make_report(suite, fixture, seed, checks):
    """Assemble a verification report; overall pass iff every check passes."""
    allpass = all(c["pass"] for c in checks)
    return {
        "suite": suite,
        "fixture": fixture,
        "seed": seed,
        "checks": checks,
        "pass": allpass,
    }


def check(name, residual, threshold):
    residual = float(residual)
    return {
        "name": name,
        "residual": residual,
        "threshold": float(threshold),
        "pass": residual < threshold,
    }
