"""Riesz basis bounds and the predicates built on them.

For a finite family the optimal Riesz bounds are the square roots of the
extreme Gram eigenvalues: A^2 |a|^2 <= |sum a_i f_i|^2 <= B^2 |a|^2 holds for
all coefficient vectors a, with equality approached at the extreme
eigenvectors of the Gram matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import RANK_TOL, VectorFamily, gram, projection_residual


@dataclass(frozen=True)
class RieszBounds:
    """Lower/upper Riesz bounds (A, B), 0 < A <= B."""

    lower: float
    upper: float

    def __post_init__(self):
        if not (0.0 < self.lower <= self.upper):
            raise ValueError("bounds must satisfy 0 < lower <= upper")

    @property
    def condition(self) -> float:
        return self.upper / self.lower


@dataclass(frozen=True)
class EpsRieszCheck:
    """Outcome of a single epsilon-Riesz test, with achieved bounds."""

    epsilon: float
    lower: float
    upper: float
    passed: bool

    @property
    def margin(self) -> float:
        """min distance of the achieved bounds to the [1-eps, 1+eps] walls."""
        return min(self.lower - (1.0 - self.epsilon), (1.0 + self.epsilon) - self.upper)


@dataclass(frozen=True)
class EpsRieszReport:
    """Per-block epsilon-Riesz results for a partitioned family."""

    epsilon: float
    blocks: tuple[tuple[int, float, float, bool], ...]  # (block id, lower, upper, pass)

    @property
    def passed(self) -> bool:
        return all(ok for _, _, _, ok in self.blocks)

    def to_json(self) -> dict:
        return {
            "epsilon": float(self.epsilon),
            "blocks": [
                {"id": int(j), "lower": float(a), "upper": float(b), "pass": bool(ok)}
                for j, a, b, ok in self.blocks
            ],
        }


def _gram_extremes(family: VectorFamily) -> tuple[float, float]:
    evs = np.linalg.eigvalsh(gram(family))
    return float(evs[0]), float(evs[-1])


def riesz_bounds(family: VectorFamily) -> RieszBounds:
    """Optimal Riesz bounds of a linearly independent family.

    Raises for a family that is rank deficient at working precision.
    """
    lo, hi = _gram_extremes(family)
    upper = math.sqrt(max(hi, 0.0))
    lower_sq = max(lo, 0.0)
    if math.sqrt(lower_sq) <= RANK_TOL * upper:
        raise ValueError("lower Riesz bound is zero")
    return RieszBounds(math.sqrt(lower_sq), upper)


def _require_unit_norm(family: VectorFamily):
    norms = np.linalg.norm(family.vectors, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-10):
        raise ValueError("family must be unit-norm")


def is_eps_riesz(family: VectorFamily, epsilon: float, tol: float = 1e-9) -> EpsRieszCheck:
    """Test whether a unit-norm family is an epsilon-Riesz basic sequence.

    A rank-deficient family fails with achieved lower bound 0 instead of
    raising.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    _require_unit_norm(family)
    eps = float(epsilon)
    try:
        bounds = riesz_bounds(family)
        lower, upper = bounds.lower, bounds.upper
    except ValueError:
        _, hi = _gram_extremes(family)
        lower, upper = 0.0, math.sqrt(max(hi, 0.0))
    ok = (lower >= 1.0 - eps - tol) and (upper <= 1.0 + eps + tol)
    return EpsRieszCheck(epsilon=eps, lower=lower, upper=upper, passed=ok)


def eps_riesz_report(family: VectorFamily, blocks, epsilon: float) -> EpsRieszReport:
    """Run is_eps_riesz on each nonempty index block of a family."""
    entries = []
    for j, block in enumerate(blocks):
        idx = list(block)
        if not idx:
            continue
        check = is_eps_riesz(family.subfamily(idx), epsilon)
        entries.append((j, check.lower, check.upper, check.passed))
    return EpsRieszReport(epsilon=float(epsilon), blocks=tuple(entries))


def eps_minimality_values(family: VectorFamily) -> np.ndarray:
    """Per-vector projection norms |P_i f_i| onto the span of the others.

    The family is epsilon-minimal exactly when all entries are <= epsilon.
    """
    return np.array([projection_residual(family, i) for i in range(family.size)])


def is_eps_minimal(family: VectorFamily, epsilon: float) -> tuple[bool, np.ndarray]:
    """Epsilon-minimality predicate, returning the achieved values."""
    values = eps_minimality_values(family)
    return bool(np.all(values <= epsilon)), values
