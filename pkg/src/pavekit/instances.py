"""Seeded instance generation for the CLI and test corpora.

Every kind yields a unit-norm family that is deterministic in (spec, seed)
and self-checked against its condition target: generation retries with a
deterministically shrunk perturbation until B/A <= condition_target * 1.1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linalg import VectorFamily
from .riesz import riesz_bounds
from .rng import SplitMix64
from .serialize import matrix_from_json

KINDS = ("orthonormal", "perturbed_orthonormal", "random_riesz", "gram_file")

MAX_RETRIES = 1000
CONDITION_SLACK = 1.1


@dataclass(frozen=True)
class InstanceSpec:
    """What to generate: kind, size, conditioning and seed."""

    kind: str
    n: int = 1
    condition_target: float = 1.0
    seed: int = 0
    path: Optional[str] = None  # gram_file only

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.kind != "gram_file":
            if self.n < 1:
                raise ValueError("n must be positive")
            if self.condition_target < 1.0:
                raise ValueError("condition_target must be >= 1")
        elif not self.path:
            raise ValueError("gram_file instances need a path")


def _unit_rows(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise ValueError("cannot normalize a zero vector")
    return m / norms


def _condition(family: VectorFamily) -> float:
    b = riesz_bounds(family)
    return b.condition


def _perturbed_orthonormal(n: int, target: float, rng: SplitMix64) -> VectorFamily:
    if target == 1.0:
        return VectorFamily(np.eye(n), unit_norm=True)
    noise = rng.normals(n, n) / math.sqrt(n)
    # ||tE|| ~ 2t for normalized Gaussian noise; aim kappa ~ (1+s)/(1-s)
    t = (target - 1.0) / (target + 1.0) / 2.0
    for _ in range(MAX_RETRIES):
        vectors = _unit_rows(np.eye(n) + t * noise)
        family = VectorFamily(vectors, unit_norm=True)
        try:
            if _condition(family) <= target * CONDITION_SLACK:
                return family
        except ValueError:
            pass
        t *= 0.7
    raise ValueError("condition target unreachable after bounded retries")


def _haar_factor(rng: SplitMix64, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normals(n, n))
    # fix the column phases so the factor is canonical for the stream
    signs = np.where(np.diagonal(r) >= 0.0, 1.0, -1.0)
    return q * signs


def _random_riesz(n: int, target: float, rng: SplitMix64) -> VectorFamily:
    spread = float(target)
    for _ in range(MAX_RETRIES):
        u = _haar_factor(rng, n)
        v = _haar_factor(rng, n)
        exponents = np.array([rng.uniform() - 0.5 for _ in range(n)])
        sigma = spread**exponents  # singular values in [1/sqrt(c), sqrt(c)]
        vectors = _unit_rows(u @ np.diag(sigma) @ v.T)
        family = VectorFamily(vectors, unit_norm=True)
        try:
            if _condition(family) <= target * CONDITION_SLACK:
                return family
        except ValueError:
            pass
        spread = 1.0 + 0.8 * (spread - 1.0)
    raise ValueError("condition target unreachable after bounded retries")


def _from_gram_file(path: str) -> VectorFamily:
    import json

    with open(path) as fh:
        g = matrix_from_json(json.load(fh))
    if g.shape[0] != g.shape[1]:
        raise ValueError("Gram matrix must be square")
    if np.max(np.abs(g - g.conj().T)) > 1e-10:
        raise ValueError("Gram matrix must be Hermitian")
    if np.max(np.abs(np.diagonal(g).real - 1.0)) > 1e-8:
        raise ValueError("Gram matrix must have unit diagonal")
    evs, basis = np.linalg.eigh((g + g.conj().T) / 2.0)
    if evs[0] < -1e-10:
        raise ValueError("Gram matrix must be positive semidefinite")
    vectors = basis @ np.diag(np.sqrt(np.clip(evs, 0.0, None)))
    return VectorFamily(_unit_rows(vectors), unit_norm=True)


def generate(spec: InstanceSpec) -> VectorFamily:
    """Deterministic family for a spec; see the module docstring."""
    if spec.kind == "orthonormal":
        return VectorFamily(np.eye(spec.n), unit_norm=True)
    if spec.kind == "gram_file":
        return _from_gram_file(spec.path)
    rng = SplitMix64(spec.seed)
    if spec.kind == "perturbed_orthonormal":
        return _perturbed_orthonormal(spec.n, float(spec.condition_target), rng)
    return _random_riesz(spec.n, float(spec.condition_target), rng)
