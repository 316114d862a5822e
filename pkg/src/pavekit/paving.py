"""Diagonal compressions and paving search.

A paving of a zero-diagonal matrix T at level epsilon is a partition {A_j}
with ||Q_A_j T Q_A_j|| <= epsilon * ||T|| for every block, where Q_A is the
0/1 diagonal projection onto the coordinates in A.  The compression norm
equals the spectral norm of the principal submatrix T[A, A].

Both search routines accept an optional ``reference_norm`` override: the
acceptance target is always ``epsilon * reference_norm``, with the reference
defaulting to ||T||.  Passing ``reference_norm=1.0`` turns ``epsilon`` into
an absolute norm target, which is how the reduction pipeline paves
triangular coefficient blocks to epsilon/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linalg import operator_norm, require_square
from .partition import Partition

# Absolute tolerance for accepting a diagonal as zero.
DIAGONAL_TOL = 1e-14
# Slack added to the paving target when judging pass/fail.
PASS_TOL = 1e-9
# Exhaustive paving guard.
BRUTE_FORCE_MAX = 12


@dataclass(frozen=True)
class PavingCertificate:
    """A partition together with recomputed per-block compression norms."""

    partition: Partition
    epsilon_target: float
    reference_norm: float
    block_norms: tuple[float, ...]
    passes: bool
    method: str  # "brute_force" | "heuristic"
    matrix_id: Optional[str] = None

    @property
    def target(self) -> float:
        return self.epsilon_target * self.reference_norm

    @property
    def max_norm(self) -> float:
        return max(self.block_norms)

    @property
    def margin(self) -> float:
        return self.target - self.max_norm

    def to_json(self) -> dict:
        return {
            "epsilon": float(self.epsilon_target),
            "reference_norm": float(self.reference_norm),
            "partition": self.partition.to_json(),
            "block_norms": [float(x) for x in self.block_norms],
            "pass": bool(self.passes),
            "method": self.method,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PavingCertificate":
        try:
            return cls(
                partition=Partition.from_json(obj["partition"]),
                epsilon_target=float(obj["epsilon"]),
                reference_norm=float(obj["reference_norm"]),
                block_norms=tuple(float(x) for x in obj["block_norms"]),
                passes=bool(obj["pass"]),
                method=str(obj["method"]),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed paving certificate: {exc}") from exc


def strip_diagonal(t) -> np.ndarray:
    """Copy of a square matrix with the diagonal set to exactly zero."""
    a = require_square(t)
    out = a.copy()
    np.fill_diagonal(out, 0.0)
    return out


def require_zero_diagonal(t) -> np.ndarray:
    a = require_square(t)
    if a.shape[0] and float(np.max(np.abs(np.diagonal(a)))) > DIAGONAL_TOL:
        raise ValueError("pave the zero-diagonal part")
    return a


def compress(t, block) -> np.ndarray:
    """Q_A T Q_A: entries kept iff both row and column lie in the block."""
    a = require_square(t)
    n = a.shape[0]
    idx = sorted(int(i) for i in block)
    if idx and not (0 <= idx[0] and idx[-1] < n):
        raise ValueError(f"block index out of range 0..{n - 1}")
    if len(set(idx)) != len(idx):
        raise ValueError("block contains a repeated index")
    out = np.zeros_like(a)
    if idx:
        ix = np.ix_(idx, idx)
        out[ix] = a[ix]
    return out


def paving_norm(t, p: Partition) -> tuple[float, list[float]]:
    """Max and per-block compression norms of a partition."""
    a = require_square(t)
    if p.n != a.shape[0]:
        raise ValueError(f"partition of {p.n} indices does not match {a.shape[0]}-dim matrix")
    per_block = [operator_norm(compress(a, b)) if b else 0.0 for b in p.blocks]
    return max(per_block), per_block


def _submatrix_norm(a: np.ndarray, idx: list[int]) -> float:
    if not idx:
        return 0.0
    sub = a[np.ix_(idx, idx)]
    return float(np.linalg.svd(sub, compute_uv=False)[0])


def _certificate(
    t: np.ndarray,
    p: Partition,
    epsilon: float,
    reference: float,
    method: str,
    matrix_id: Optional[str],
) -> PavingCertificate:
    _, per_block = paving_norm(t, p)
    passes = max(per_block) <= epsilon * reference + PASS_TOL
    return PavingCertificate(
        partition=p,
        epsilon_target=float(epsilon),
        reference_norm=float(reference),
        block_norms=tuple(per_block),
        passes=passes,
        method=method,
        matrix_id=matrix_id,
    )


def brute_force_paving(
    t,
    epsilon: float,
    r_max: int,
    reference_norm: Optional[float] = None,
    matrix_id: Optional[str] = None,
) -> Optional[PavingCertificate]:
    """Smallest-r paving found by exhaustive search; None if r_max is too small.

    Enumerates canonical assignments depth-first in lexicographic order;
    compression norms only grow when a block gains an index, so any block
    already above the target prunes its subtree.  Among pavings at the
    minimal r the lexicographically smallest assignment vector is returned.
    Guarded to n <= 12.
    """
    a = require_zero_diagonal(t)
    n = a.shape[0]
    if r_max < 1:
        raise ValueError("r_max must be a positive integer")
    if n > BRUTE_FORCE_MAX:
        raise ValueError("instance too large for exhaustive paving")
    reference = operator_norm(a) if reference_norm is None else float(reference_norm)
    target = epsilon * reference + PASS_TOL

    labels = [0] * n
    members: list[list[int]] = []

    def descend(i: int, r: int) -> bool:
        if i == n:
            return True
        limit = min(len(members) + 1, r)
        for b in range(limit):
            if b == len(members):
                members.append([])
            members[b].append(i)
            labels[i] = b
            ok = _submatrix_norm(a, members[b]) <= target and descend(i + 1, r)
            members[b].pop()
            if not members[b] and b == len(members) - 1:
                members.pop()
            if ok:
                return True
        return False

    for r in range(1, min(r_max, n) + 1):
        if descend(0, r):
            p = Partition.from_assignment(labels, r=r)
            return _certificate(a, p, epsilon, reference, "brute_force", matrix_id)
    return None


def _block_norms(a: np.ndarray, members: list[list[int]]) -> list[float]:
    return [_submatrix_norm(a, m) for m in members]


def _search_key(norms: list[float]) -> tuple[float, float]:
    return max(norms), sum(x * x for x in norms)


def heuristic_paving(
    t,
    epsilon: float,
    reference_norm: Optional[float] = None,
    matrix_id: Optional[str] = None,
    max_moves: int = 100000,
) -> PavingCertificate:
    """Paving by iterative deepening on r with a min-max local search.

    For r = 1, 2, 4, 8, ... (capped at n) a single-index-move local search
    minimizes (max block norm, sum of squared block norms) from a round-robin
    start; the first r whose local optimum meets the target is returned.
    Always terminates: r = n gives singletons with zero compression norm.
    """
    a = require_zero_diagonal(t)
    n = a.shape[0]
    reference = operator_norm(a) if reference_norm is None else float(reference_norm)
    target = epsilon * reference + PASS_TOL

    r = 1
    while True:
        labels = [i % r for i in range(n)]
        members: list[list[int]] = [[] for _ in range(r)]
        for i, lab in enumerate(labels):
            members[lab].append(i)
        norms = _block_norms(a, members)

        moved = True
        moves = 0
        while moved and moves < max_moves:
            moved = False
            cur_max, cur_sq = _search_key(norms)
            for i in range(n):
                src = labels[i]
                for dst in range(r):
                    if dst == src:
                        continue
                    new_src = [l for l in members[src] if l != i]
                    new_dst = members[dst] + [i]
                    ns, nd = _submatrix_norm(a, new_src), _submatrix_norm(a, new_dst)
                    trial = norms.copy()
                    trial[src], trial[dst] = ns, nd
                    t_max, t_sq = _search_key(trial)
                    better = t_max < cur_max - 1e-12 or (
                        t_max <= cur_max + 1e-12 and t_sq < cur_sq - 1e-12
                    )
                    if better:
                        members[src] = new_src
                        members[dst] = sorted(new_dst)
                        labels[i] = dst
                        norms = trial
                        moved = True
                        moves += 1
                        break
                if moved:
                    break

        if max(norms) <= target:
            p = Partition(n=n, blocks=tuple(tuple(m) for m in members))
            return _certificate(a, p, epsilon, reference, "heuristic", matrix_id)
        if r >= n:
            # unreachable: singletons always meet a nonnegative target
            raise RuntimeError("paving search failed at r = n")
        r = min(2 * r, n)
