"""JSON wire formats for matrices and vector families.

A matrix serializes to ``{"rows": r, "cols": c, "complex": bool, "data":
[...]}`` with ``data`` a flat row-major list: plain floats for real matrices,
``[re, im]`` pairs for complex ones.  Floats use Python's shortest
round-trip representation.
"""

from __future__ import annotations

import json

import numpy as np

from .linalg import VectorFamily, as_matrix


def matrix_to_json(m) -> dict:
    a = as_matrix(m)
    rows, cols = a.shape
    if np.iscomplexobj(a):
        data = [[float(z.real), float(z.imag)] for z in a.ravel()]
        return {"rows": rows, "cols": cols, "complex": True, "data": data}
    data = [float(x) for x in a.ravel()]
    return {"rows": rows, "cols": cols, "complex": False, "data": data}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows = int(obj["rows"])
        cols = int(obj["cols"])
        is_complex = bool(obj["complex"])
        data = obj["data"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix object: {exc}") from exc
    if rows < 1 or cols < 1:
        raise ValueError("matrix dimensions must be positive")
    if len(data) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, got {len(data)}")
    if is_complex:
        flat = np.array([complex(re, im) for re, im in data], dtype=complex)
    else:
        flat = np.array([float(x) for x in data], dtype=float)
    return as_matrix(flat.reshape(rows, cols))


def family_to_json(family: VectorFamily) -> dict:
    return {
        "vectors": matrix_to_json(family.vectors),
        "unit_norm": bool(family.unit_norm),
    }


def family_from_json(obj: dict) -> VectorFamily:
    try:
        vectors = matrix_from_json(obj["vectors"])
        unit_norm = bool(obj["unit_norm"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed family object: {exc}") from exc
    return VectorFamily(vectors, unit_norm=unit_norm)


def dumps(obj) -> str:
    """Deterministic JSON text used for report bodies and fixtures."""
    return json.dumps(obj, indent=2)


def loads(text: str):
    return json.loads(text)
