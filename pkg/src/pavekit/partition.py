"""Set partitions of {0,...,n-1} and the within-block correlation search.

The objective for a Gram matrix G and partition {A_j} is

    sum_j sum_{i in A_j} sum_{l in A_j, l != i} |G[i, l]|^2

(ordered pairs, so each unordered pair counts twice).  A partition that is
locally minimal under single-index moves satisfies, for every block j, every
i in A_j and every other block k:

    sum_{l in A_j, l != i} |G[i, l]|^2  <=  sum_{l in A_k} |G[i, l]|^2

which is the exchange property the downstream bounds rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .linalg import require_hermitian

# A move is applied only if it improves the objective by more than this.
MOVE_THRESHOLD = 1e-15
# Guard for the exhaustive oracle: r^k assignments.
BRUTE_FORCE_MAX = 14


@dataclass(frozen=True)
class Partition:
    """Exact partition of {0,...,n-1} into labeled, possibly empty blocks."""

    n: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("partition ground set must be nonempty")
        blocks = tuple(tuple(sorted(int(i) for i in b)) for b in self.blocks)
        if len(blocks) < 1:
            raise ValueError("partition needs at least one block")
        seen: set[int] = set()
        for b in blocks:
            for i in b:
                if not 0 <= i < self.n:
                    raise ValueError(f"index {i} out of range 0..{self.n - 1}")
                if i in seen:
                    raise ValueError(f"index {i} appears in two blocks")
                seen.add(i)
        if len(seen) != self.n:
            raise ValueError("blocks do not cover the ground set")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_assignment(cls, labels, r: Optional[int] = None) -> "Partition":
        """Build from a label vector; block j collects indices with label j."""
        labels = [int(x) for x in labels]
        nblocks = (max(labels) + 1) if r is None else r
        blocks = [[] for _ in range(nblocks)]
        for i, lab in enumerate(labels):
            blocks[lab].append(i)
        return cls(n=len(labels), blocks=tuple(tuple(b) for b in blocks))

    @property
    def r(self) -> int:
        return len(self.blocks)

    def assignment(self) -> np.ndarray:
        """Label vector: entry i is the block index containing i."""
        labels = np.empty(self.n, dtype=int)
        for j, b in enumerate(self.blocks):
            for i in b:
                labels[i] = j
        return labels

    def nonempty_blocks(self) -> list[tuple[int, ...]]:
        return [b for b in self.blocks if b]

    def refines(self, coarser: "Partition") -> bool:
        """True if every block here sits inside a single block of `coarser`."""
        if self.n != coarser.n:
            return False
        coarse = coarser.assignment()
        return all(len({coarse[i] for i in b}) <= 1 for b in self.blocks)

    def to_json(self) -> dict:
        """Wire format: 1-based indices, ascending within each block."""
        return {"n": self.n, "blocks": [[i + 1 for i in b] for b in self.blocks]}

    @classmethod
    def from_json(cls, obj: dict) -> "Partition":
        try:
            n = int(obj["n"])
            blocks = tuple(tuple(int(i) - 1 for i in b) for b in obj["blocks"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed partition object: {exc}") from exc
        return cls(n=n, blocks=blocks)


class MoveRecord(NamedTuple):
    index: int
    from_block: int
    to_block: int
    delta: float


@dataclass(frozen=True)
class LocalSearchTrace:
    """Record of a local-search run: strictly improving moves only."""

    initial_objective: float
    moves: tuple[MoveRecord, ...]
    final_objective: float

    @property
    def move_count(self) -> int:
        return len(self.moves)


def _pair_weights(g: np.ndarray) -> np.ndarray:
    """|G|^2 with zeroed diagonal, the per-pair contribution table."""
    w = np.abs(g) ** 2
    np.fill_diagonal(w, 0.0)
    return w


def _check_sizes(g: np.ndarray, p: Partition):
    if p.n != g.shape[0]:
        raise ValueError(
            f"partition of {p.n} indices does not match {g.shape[0]}x{g.shape[1]} matrix"
        )


def partition_objective(g, p: Partition) -> float:
    """Within-block squared-correlation objective (ordered pairs)."""
    a = require_hermitian(g)
    _check_sizes(a, p)
    w = _pair_weights(a)
    total = 0.0
    for b in p.blocks:
        if len(b) > 1:
            idx = np.asarray(b)
            total += float(w[np.ix_(idx, idx)].sum())
    return total


def _correlation_table(w: np.ndarray, labels: np.ndarray, r: int) -> np.ndarray:
    """corr[i, j] = sum of w[i, l] over l currently in block j."""
    k = w.shape[0]
    corr = np.zeros((k, r))
    for j in range(r):
        members = np.flatnonzero(labels == j)
        if members.size:
            corr[:, j] = w[:, members].sum(axis=1)
    return corr


def _first_improving_move(corr: np.ndarray, labels: np.ndarray, r: int):
    for i in range(corr.shape[0]):
        a = labels[i]
        base = corr[i, a]
        for b in range(r):
            if b == a:
                continue
            delta = 2.0 * (corr[i, b] - base)
            if delta < -MOVE_THRESHOLD:
                return i, a, b, delta
    return None


def hkw_local_search(
    g, r: int, initial: Optional[Partition] = None
) -> tuple[Partition, LocalSearchTrace]:
    """Local minimum of the partition objective under single-index moves.

    Scans indices in increasing order and target blocks in increasing label
    order, applying the first strictly improving move and restarting the scan,
    until no move improves.  Default start is the round-robin assignment
    i -> i mod r.  The output satisfies the exchange property for every
    (block, index, other block) triple within 1e-10.
    """
    a = require_hermitian(g)
    k = a.shape[0]
    if r < 1:
        raise ValueError("r must be a positive integer")
    if initial is None:
        labels = np.arange(k) % r
    else:
        _check_sizes(a, initial)
        if initial.r > r:
            raise ValueError(f"initial partition has {initial.r} blocks, more than r={r}")
        labels = initial.assignment()
    w = _pair_weights(a)

    corr = _correlation_table(w, labels, r)
    initial_objective = float(corr[np.arange(k), labels].sum())
    moves: list[MoveRecord] = []
    while True:
        found = _first_improving_move(corr, labels, r)
        if found is None:
            # rebuild the table to shed incremental drift; stop only when a
            # fresh scan also finds nothing
            corr = _correlation_table(w, labels, r)
            if _first_improving_move(corr, labels, r) is None:
                break
            continue
        i, src, dst, delta = found
        labels[i] = dst
        corr[:, src] -= w[:, i]
        corr[:, dst] += w[:, i]
        moves.append(MoveRecord(int(i), int(src), int(dst), float(delta)))

    result = Partition.from_assignment(labels, r=r)
    final_objective = float(corr[np.arange(k), labels].sum())
    margin = step1_margin(a, result)
    if margin < -1e-10:
        raise RuntimeError(f"local search exited without the exchange property ({margin})")
    return result, LocalSearchTrace(
        initial_objective=initial_objective,
        moves=tuple(moves),
        final_objective=final_objective,
    )


def step1_margin(g, p: Partition) -> float:
    """Worst slack of the exchange property over all (block, index, block).

    Returns min over blocks j, i in A_j, k != j of
    sum_{l in A_k} |G[i, l]|^2 - sum_{l in A_j, l != i} |G[i, l]|^2.
    Nonnegative (within 1e-10) certifies the property; +inf when r = 1.
    """
    a = require_hermitian(g)
    _check_sizes(a, p)
    if p.r == 1:
        return math.inf
    w = _pair_weights(a)
    labels = p.assignment()
    corr = _correlation_table(w, labels, p.r)
    worst = math.inf
    for i in range(p.n):
        own = corr[i, labels[i]]
        for b in range(p.r):
            if b != labels[i]:
                worst = min(worst, float(corr[i, b] - own))
    return worst


def brute_force_min_partition(g, r: int) -> Partition:
    """Global minimizer of the partition objective over <= r labeled blocks.

    Enumerates canonical assignments (restricted growth strings) depth-first
    in lexicographic order with cost pruning; ties resolve to the
    lexicographically smallest assignment vector.  Guarded to k <= 14.
    """
    a = require_hermitian(g)
    k = a.shape[0]
    if r < 1:
        raise ValueError("r must be a positive integer")
    if k > BRUTE_FORCE_MAX:
        raise ValueError("instance too large for exhaustive oracle")
    w = _pair_weights(a)

    best_cost = math.inf
    best_labels: Optional[list[int]] = None
    labels = [0] * k
    members: list[list[int]] = [[] for _ in range(r)]

    def descend(i: int, used: int, cost: float):
        nonlocal best_cost, best_labels
        if cost >= best_cost:
            return
        if i == k:
            best_cost = cost
            best_labels = labels.copy()
            return
        limit = min(used + 1, r)
        for b in range(limit):
            inc = 2.0 * sum(w[i, l] for l in members[b])
            if cost + inc >= best_cost:
                continue
            labels[i] = b
            members[b].append(i)
            descend(i + 1, max(used, b + 1), cost + inc)
            members[b].pop()

    descend(0, 0, 0.0)
    assert best_labels is not None
    return Partition.from_assignment(best_labels, r=r)
