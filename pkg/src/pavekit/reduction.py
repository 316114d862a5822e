"""The constructive pipeline from a unit-norm Riesz family to an
epsilon-Riesz partition, with a numerical certificate per stage.

Given bounds (A, B) and a target epsilon, the pipeline

  1. picks r with B^4/(A^4 r) <= epsilon/2 (capped at the family size),
  2. finds a partition locally minimal for the within-block correlation
     objective, which certifies the exchange property,
  3. checks the per-index correlation bound B^2/r and the in-block
     projection bound B^4/(A^4 r),
  4. Gram-Schmidts each block and checks the diagonal mass
     |K[m, m]|^2 >= 1 - epsilon/2,
  5. paves the zero-diagonal lower-triangular part of each block's
     coefficient matrix to the absolute target epsilon/2 and refines the
     partition accordingly,

then re-verifies every final block as epsilon-Riesz directly from its Gram
eigenvalues.  Every inequality's achieved margin lands in the report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .linalg import VectorFamily, gram, gram_schmidt, operator_norm, projection_residual
from .partition import Partition, hkw_local_search, step1_margin
from .paving import BRUTE_FORCE_MAX, PavingCertificate, brute_force_paving, heuristic_paving
from .riesz import RieszBounds, eps_riesz_report, riesz_bounds

STEP1_TOL = 1e-10
DEFAULT_TOL = 1e-8

PAVING_METHODS = ("exhaustive", "heuristic")


@dataclass(frozen=True)
class ReductionConfig:
    """Pipeline parameters: target epsilon, paving engine, optional r."""

    epsilon: float
    paving_method: str = "exhaustive"
    r_override: Optional[int] = None
    tolerance: float = DEFAULT_TOL

    def __post_init__(self):
        if not 0.0 < float(self.epsilon) < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.paving_method not in PAVING_METHODS:
            raise ValueError(f"paving_method must be one of {PAVING_METHODS}")
        if self.r_override is not None and int(self.r_override) < 1:
            raise ValueError("r_override must be a positive integer")


@dataclass(frozen=True)
class TriangularBlockData:
    """Gram-Schmidt output of one block: basis, K, and its strict lower part."""

    block: tuple[int, ...]
    ortho: VectorFamily
    coeffs: np.ndarray
    strict_lower: np.ndarray
    m_norm: float

    @property
    def min_diag_sq(self) -> float:
        return float(np.min(np.abs(np.diagonal(self.coeffs)) ** 2))


def choose_r(bounds: RieszBounds, epsilon) -> int:
    """Smallest r with B^4/(A^4 r) <= epsilon/2, i.e. ceil(2 B^4 / (A^4 eps)).

    Exact rational arithmetic: floats are converted to the exact binary
    rationals they represent, so boundary cases round correctly.  Pass a
    ``fractions.Fraction`` for targets like 2/3 that floats cannot express.
    """
    eps = Fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    a = Fraction(bounds.lower)
    b = Fraction(bounds.upper)
    if not 0 < a <= b:
        raise ValueError("bounds must satisfy 0 < lower <= upper")
    r = max(1, math.ceil(2 * b**4 / (a**4 * eps)))
    # ceil on Fraction is exact; re-test the inequality after rounding anyway
    while 2 * b**4 > a**4 * eps * r:
        r += 1
    return int(r)


def _require_step1(g: np.ndarray, p: Partition) -> float:
    margin = step1_margin(g, p)
    if margin < -STEP1_TOL:
        raise ValueError("partition is not Step-1 certified")
    return margin


def verify_step2(g, p: Partition, bounds: RieszBounds, r: int) -> float:
    """Worst margin of B^2/r over within-block correlation row sums."""
    _require_step1(g, p)
    w = np.abs(np.asarray(g)) ** 2
    np.fill_diagonal(w, 0.0)
    bound = bounds.upper**2 / r
    worst = math.inf
    for block in p.blocks:
        idx = list(block)
        for i in idx:
            row_sum = float(w[i, idx].sum())
            worst = min(worst, bound - row_sum)
    return worst


def verify_step3(family: VectorFamily, p: Partition, bounds: RieszBounds, r: int) -> float:
    """Worst margin of B^4/(A^4 r) over squared in-block projection norms."""
    g = gram(family)
    _require_step1(g, p)
    bound = bounds.upper**4 / (bounds.lower**4 * r)
    worst = math.inf
    for block in p.blocks:
        idx = list(block)
        if not idx:
            continue
        sub = family.subfamily(idx)
        for pos in range(len(idx)):
            res = projection_residual(sub, pos)
            worst = min(worst, bound - res * res)
    return worst


def triangularize_block(
    family: VectorFamily, block, epsilon: Optional[float] = None
) -> TriangularBlockData:
    """Gram-Schmidt a block subfamily and extract the zero-diagonal part.

    K is the lower-triangular coefficient matrix in block order; the strict
    lower part M = K - diag(K) is what gets paved.  When ``epsilon`` is
    given, every diagonal entry must satisfy |K[m, m]|^2 >= 1 - epsilon/2
    (within 1e-9) or the block is rejected.
    """
    idx = tuple(int(i) for i in block)
    sub = family.subfamily(idx)
    ortho, coeffs = gram_schmidt(sub)
    strict_lower = np.tril(coeffs, -1)
    m_norm = operator_norm(strict_lower) if len(idx) > 1 else 0.0
    data = TriangularBlockData(
        block=idx, ortho=ortho, coeffs=coeffs, strict_lower=strict_lower, m_norm=m_norm
    )
    if epsilon is not None:
        if data.min_diag_sq < 1.0 - float(epsilon) / 2.0 - 1e-9:
            raise ValueError("Step 3 margin insufficient")
    return data


@dataclass
class BlockReport:
    """Step 4-5 record for one Step-1 block."""

    label: int
    indices: tuple[int, ...]
    m_norm: float
    min_diag_sq: float
    paving: PavingCertificate

    @property
    def sub_block_count(self) -> int:
        return self.paving.partition.r

    def to_json(self) -> dict:
        return {
            "label": int(self.label),
            "indices": [i + 1 for i in self.indices],
            "size": len(self.indices),
            "m_norm": float(self.m_norm),
            "min_diag_sq": float(self.min_diag_sq),
            "paving": self.paving.to_json(),
        }


@dataclass
class FinalBlockReport:
    """Achieved Riesz bounds of one final block against [1-eps, 1+eps]."""

    label: int
    indices: tuple[int, ...]
    lower: float
    upper: float
    margin: float
    passes: bool

    def to_json(self) -> dict:
        return {
            "id": int(self.label),
            "indices": [i + 1 for i in self.indices],
            "lower": float(self.lower),
            "upper": float(self.upper),
            "margin": float(self.margin),
            "pass": bool(self.passes),
        }


@dataclass
class ReductionReport:
    """Certificate bundle for the full pipeline; every stage's margin."""

    n: int
    dimension: int
    epsilon: float
    paving_method: str
    tolerance: float
    r_override: Optional[int] = None
    lower: Optional[float] = None
    upper: Optional[float] = None
    r_theoretical: Optional[int] = None
    r_effective: Optional[int] = None
    step1_partition: Optional[Partition] = None
    step1_objective: Optional[float] = None
    step1_moves: Optional[int] = None
    step1_margin: Optional[float] = None
    step2_bound: Optional[float] = None
    step2_margin: Optional[float] = None
    step3_bound: Optional[float] = None
    step3_margin: Optional[float] = None
    step4_threshold: Optional[float] = None
    step4_margin: Optional[float] = None
    m_norm_bound: Optional[float] = None
    m_norm_margin: Optional[float] = None
    blocks: list[BlockReport] = field(default_factory=list)
    paving_margin: Optional[float] = None
    final_partition: Optional[Partition] = None
    final_blocks: list[FinalBlockReport] = field(default_factory=list)
    final_margin: Optional[float] = None
    final_block_count: Optional[int] = None
    headline_block_count: Optional[int] = None
    passes: bool = False
    failed_stage: Optional[str] = None
    error: Optional[str] = None

    def margins(self) -> list[float]:
        named = [
            self.step1_margin,
            self.step2_margin,
            self.step3_margin,
            self.step4_margin,
            self.m_norm_margin,
            self.paving_margin,
            self.final_margin,
        ]
        return [m for m in named if m is not None and math.isfinite(m)]

    def to_json(self) -> dict:
        return {
            "kind": "reduction_report",
            "input": {
                "n": int(self.n),
                "dimension": int(self.dimension),
                "lower": self.lower,
                "upper": self.upper,
                "epsilon": float(self.epsilon),
                "paving_method": self.paving_method,
                "tolerance": float(self.tolerance),
                "r_override": self.r_override,
            },
            "r": {"theoretical": self.r_theoretical, "effective": self.r_effective},
            "step1": {
                "partition": None if self.step1_partition is None else self.step1_partition.to_json(),
                "objective": self.step1_objective,
                "moves": self.step1_moves,
                "margin": _json_margin(self.step1_margin),
            },
            "step2": {"bound": self.step2_bound, "margin": self.step2_margin},
            "step3": {"bound": self.step3_bound, "margin": self.step3_margin},
            "step4": {"threshold": self.step4_threshold, "margin": self.step4_margin},
            "m_norm": {"bound": self.m_norm_bound, "margin": self.m_norm_margin},
            "blocks": [b.to_json() for b in self.blocks],
            "paving_margin": self.paving_margin,
            "final": {
                "partition": None if self.final_partition is None else self.final_partition.to_json(),
                "blocks": [b.to_json() for b in self.final_blocks],
                "margin": self.final_margin,
            },
            "counts": {
                "final_blocks": self.final_block_count,
                "headline": self.headline_block_count,
            },
            "pass": bool(self.passes),
            "failed_stage": self.failed_stage,
            "error": self.error,
        }


def _json_margin(x: Optional[float]):
    if x is None:
        return None
    return "inf" if math.isinf(x) else float(x)


def _pave_block(data: TriangularBlockData, epsilon: float, method: str) -> PavingCertificate:
    """Pave the strict lower part of K to the absolute target epsilon/2."""
    size = len(data.block)
    if method == "exhaustive":
        if size > BRUTE_FORCE_MAX:
            raise ValueError(
                f"block of {size} indices exceeds the exhaustive paving guard "
                f"({BRUTE_FORCE_MAX}); rerun with paving_method='heuristic'"
            )
        cert = brute_force_paving(
            data.strict_lower, epsilon / 2.0, r_max=size, reference_norm=1.0
        )
        assert cert is not None  # singletons always meet a positive target
        return cert
    return heuristic_paving(data.strict_lower, epsilon / 2.0, reference_norm=1.0)


def run_reduction(family: VectorFamily, config: ReductionConfig) -> ReductionReport:
    """Execute the five-step pipeline and assemble the certificate report.

    Stage failures (rank deficiency, an insufficient Step-4 margin, the
    exhaustive-paving size guard) are captured in the report with the failing
    stage named rather than raised.
    """
    eps = float(config.epsilon)
    tol = float(config.tolerance)
    report = ReductionReport(
        n=family.size,
        dimension=family.dimension,
        epsilon=eps,
        paving_method=config.paving_method,
        tolerance=tol,
        r_override=config.r_override,
    )
    norms = np.linalg.norm(family.vectors, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-10):
        report.failed_stage = "input"
        report.error = "family must be unit-norm"
        return report

    stage = "bounds"
    try:
        bounds = riesz_bounds(family)
        report.lower, report.upper = bounds.lower, bounds.upper

        stage = "choose_r"
        if config.r_override is not None:
            r_theoretical = int(config.r_override)
        else:
            r_theoretical = choose_r(bounds, config.epsilon)
        r = min(r_theoretical, family.size)
        report.r_theoretical, report.r_effective = r_theoretical, r

        stage = "step1"
        g = gram(family)
        p1, trace = hkw_local_search(g, r)
        report.step1_partition = p1
        report.step1_objective = trace.final_objective
        report.step1_moves = trace.move_count
        report.step1_margin = step1_margin(g, p1)

        stage = "step2"
        report.step2_bound = bounds.upper**2 / r
        report.step2_margin = verify_step2(g, p1, bounds, r)

        stage = "step3"
        report.step3_bound = bounds.upper**4 / (bounds.lower**4 * r)
        report.step3_margin = verify_step3(family, p1, bounds, r)

        stage = "step4"
        report.step4_threshold = 1.0 - eps / 2.0
        report.m_norm_bound = bounds.upper + 1.0
        block_data: list[tuple[int, TriangularBlockData]] = []
        for j, block in enumerate(p1.blocks):
            if block:
                block_data.append((j, triangularize_block(family, block, epsilon=eps)))
        report.step4_margin = min(d.min_diag_sq - (1.0 - eps / 2.0) for _, d in block_data)
        report.m_norm_margin = min(bounds.upper + 1.0 - d.m_norm for _, d in block_data)

        stage = "paving"
        for j, data in block_data:
            cert = _pave_block(data, eps, config.paving_method)
            report.blocks.append(
                BlockReport(
                    label=j,
                    indices=data.block,
                    m_norm=data.m_norm,
                    min_diag_sq=data.min_diag_sq,
                    paving=cert,
                )
            )
        report.paving_margin = min(b.paving.margin for b in report.blocks)

        stage = "refine"
        final_blocks: list[tuple[int, ...]] = []
        for b in report.blocks:
            for sub in b.paving.partition.blocks:
                if sub:
                    final_blocks.append(tuple(b.indices[pos] for pos in sub))
        final = Partition(n=family.size, blocks=tuple(final_blocks))
        report.final_partition = final
        report.final_block_count = len(final_blocks)
        report.headline_block_count = r * max(b.sub_block_count for b in report.blocks)

        stage = "step5"
        eps_report = eps_riesz_report(family, final.blocks, eps)
        for (j, lo, hi, ok), block in zip(eps_report.blocks, final.blocks):
            margin = min(lo - (1.0 - eps), (1.0 + eps) - hi)
            report.final_blocks.append(
                FinalBlockReport(
                    label=j, indices=block, lower=lo, upper=hi, margin=margin, passes=ok
                )
            )
        report.final_margin = min(b.margin for b in report.final_blocks)
    except ValueError as exc:
        report.failed_stage = stage
        report.error = str(exc)
        report.passes = False
        return report

    report.passes = (
        all(m >= -tol for m in report.margins())
        and all(b.paving.passes for b in report.blocks)
        and all(b.passes for b in report.final_blocks)
    )
    return report
