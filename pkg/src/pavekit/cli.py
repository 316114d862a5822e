"""Command-line workbench: generate instances, run the reduction pipeline,
pave matrices, and independently verify emitted certificates.

Subcommands: generate, bounds, partition, reduce, pave, verify.
Exit codes: 0 success/pass, 1 certified fail, 2 usage or input error.

Report bodies are deterministic in (arguments, input files, seed) and carry
no timestamps; wall-clock data lives in the ``<out>.manifest.json`` sidecar
written alongside ``--out`` files.  Verification recomputes every claimed
quantity from the raw inputs embedded in the bundle, sharing no intermediate
state with the producing run.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .instances import KINDS, InstanceSpec, generate
from .linalg import VectorFamily, gram, operator_norm, require_hermitian
from .partition import Partition, hkw_local_search, partition_objective, step1_margin
from .paving import (
    DIAGONAL_TOL,
    PASS_TOL,
    PavingCertificate,
    brute_force_paving,
    heuristic_paving,
    paving_norm,
    strip_diagonal,
)
from .reduction import ReductionConfig, choose_r, run_reduction, triangularize_block
from .riesz import riesz_bounds
from .rng import GENERATOR_CONSTANTS, GENERATOR_NAME
from .serialize import dumps, family_from_json, family_to_json, matrix_from_json, matrix_to_json


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _resolve_family(args) -> tuple[VectorFamily, str]:
    """Family from --family, --gram-file, or generation flags; plus its JSON."""
    if getattr(args, "family", None):
        obj = _load_json(args.family)
        family = family_from_json(obj)
    elif getattr(args, "gram_file", None):
        spec = InstanceSpec(kind="gram_file", path=args.gram_file)
        family = generate(spec)
    else:
        if args.n is None:
            raise ValueError("need --n (or --family / --gram-file) to build an instance")
        spec = InstanceSpec(
            kind=args.kind or "random_riesz",
            n=args.n,
            condition_target=args.condition,
            seed=args.seed,
        )
        family = generate(spec)
    return family, dumps(family_to_json(family))


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _write_manifest(out_path: str, args, input_hash: str):
    manifest = {
        "tool": "pavekit",
        "version": __version__,
        "generator": {"name": GENERATOR_NAME, "constants": GENERATOR_CONSTANTS},
        "command": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        "input_sha256": input_hash,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "outputs": [out_path],
    }
    with open(out_path + ".manifest.json", "w") as fh:
        fh.write(dumps(manifest) + "\n")


def _emit(args, body: str, summary: str | None = None, default_body: bool = True) -> None:
    """Write the body to --out if given; print body or summary to stdout.

    Data-producing commands default to printing the body when it is not
    written anywhere else; `reduce` passes default_body=False so its large
    report stays behind --json / --out.
    """
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(body + "\n")
    if args.json or summary is None or (default_body and not args.out):
        print(body)
    else:
        print(summary)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    family, body = _resolve_family(args)
    _emit(args, body, summary=f"generated {family.size} vectors in dimension {family.dimension}")
    if args.out:
        _write_manifest(args.out, args, _sha256(body))
    return 0


def cmd_bounds(args) -> int:
    family, body = _resolve_family(args)
    b = riesz_bounds(family)
    out = dumps({"lower": b.lower, "upper": b.upper, "condition": b.condition})
    _emit(args, out)
    if args.out:
        _write_manifest(args.out, args, _sha256(body))
    return 0


def cmd_partition(args) -> int:
    if args.matrix:
        g = require_hermitian(matrix_from_json(_load_json(args.matrix)))
        input_json = dumps(matrix_to_json(g))
    else:
        family, input_json = _resolve_family(args)
        g = gram(family)
    p, trace = hkw_local_search(g, args.r)
    margin = step1_margin(g, p)
    body = dumps(
        {
            "kind": "step1_partition",
            "r": args.r,
            "partition": p.to_json(),
            "objective": trace.final_objective,
            "initial_objective": trace.initial_objective,
            "moves": trace.move_count,
            "margin": "inf" if math.isinf(margin) else margin,
        }
    )
    _emit(args, body, summary=f"objective {trace.final_objective:.6g} after {trace.move_count} moves")
    if args.out:
        _write_manifest(args.out, args, _sha256(input_json))
    return 0


def cmd_reduce(args) -> int:
    family, family_json = _resolve_family(args)
    config = ReductionConfig(
        epsilon=args.epsilon,
        paving_method=args.paving,
        r_override=args.r_override,
        tolerance=args.tolerance,
    )
    report = run_reduction(family, config)
    bundle = {
        "kind": "reduction_bundle",
        "family": json.loads(family_json),
        "config": {
            "epsilon": float(args.epsilon),
            "paving_method": args.paving,
            "r_override": args.r_override,
            "tolerance": args.tolerance,
        },
        "report": report.to_json(),
    }
    body = dumps(bundle)
    status = "pass" if report.passes else f"FAIL ({report.failed_stage or 'margins'})"
    summary = (
        f"{status}: n={report.n} bounds=({report.lower}, {report.upper}) "
        f"r={report.r_effective} final blocks={report.final_block_count}"
    )
    _emit(args, body, summary=summary, default_body=False)
    if args.out:
        _write_manifest(args.out, args, _sha256(family_json))
    return 0 if report.passes else 1


def cmd_pave(args) -> int:
    t = matrix_from_json(_load_json(args.matrix))
    if t.shape[0] != t.shape[1]:
        raise ValueError("paving needs a square matrix")
    if float(np.max(np.abs(np.diagonal(t)))) > DIAGONAL_TOL:
        if not args.strip_diagonal:
            raise ValueError("pave the zero-diagonal part (rerun with --strip-diagonal)")
        t = strip_diagonal(t)
    matrix_json = dumps(matrix_to_json(t))
    matrix_id = _sha256(matrix_json)
    if args.method == "brute_force":
        cert = brute_force_paving(t, args.epsilon, r_max=args.r_max, matrix_id=matrix_id)
    else:
        cert = heuristic_paving(t, args.epsilon, matrix_id=matrix_id)
    if cert is None:
        print(f"no paving with r <= {args.r_max} at epsilon={args.epsilon}", file=sys.stderr)
        return 1
    bundle = {
        "kind": "paving_bundle",
        "matrix": json.loads(matrix_json),
        "certificate": cert.to_json(),
    }
    body = dumps(bundle)
    summary = (
        f"r={cert.partition.r} max block norm {cert.max_norm:.6g} "
        f"vs target {cert.target:.6g} -> {'pass' if cert.passes else 'FAIL'}"
    )
    _emit(args, body, summary=summary)
    if args.out:
        _write_manifest(args.out, args, matrix_id)
    return 0 if cert.passes else 1


# ---------------------------------------------------------------------------
# verification (recompute-from-scratch)
# ---------------------------------------------------------------------------


class _Mismatch(Exception):
    pass


def _expect(ok: bool, what: str):
    if not ok:
        raise _Mismatch(what)


def _close(stored, computed, tol: float, what: str):
    if stored == "inf":
        stored = math.inf
    if stored is None:
        raise _Mismatch(f"{what}: missing value")
    s, c = float(stored), float(computed)
    if math.isinf(s) and math.isinf(c):
        return
    _expect(abs(s - c) <= tol, f"{what}: stored {s} vs recomputed {c}")


def _verify_paving_claim(
    t: np.ndarray, cert: PavingCertificate, tol: float
) -> None:
    if cert.reference_norm != 1.0:
        _close(cert.reference_norm, operator_norm(t), tol, "reference norm")
    max_norm, per_block = paving_norm(t, cert.partition)
    _expect(
        len(per_block) == len(cert.block_norms),
        "block norm count does not match partition",
    )
    for j, (stored, fresh) in enumerate(zip(cert.block_norms, per_block)):
        _close(stored, fresh, tol, f"block {j} norm")
    should_pass = max_norm <= cert.epsilon_target * cert.reference_norm + PASS_TOL
    _expect(cert.passes == should_pass, "pass flag inconsistent with block norms")


def _verify_reduction_bundle(obj: dict, tol: float) -> int:
    family = family_from_json(obj["family"])
    config = obj["config"]
    report = obj["report"]
    eps = float(config["epsilon"])

    bounds = riesz_bounds(family)
    _close(report["input"]["lower"], bounds.lower, tol, "lower bound")
    _close(report["input"]["upper"], bounds.upper, tol, "upper bound")

    if config.get("r_override") is None:
        _expect(
            report["r"]["theoretical"] == choose_r(bounds, eps),
            "r does not match choose_r",
        )
    else:
        _expect(
            report["r"]["theoretical"] == int(config["r_override"]),
            "r does not match the override",
        )
    r = int(report["r"]["effective"])
    _expect(r == min(int(report["r"]["theoretical"]), family.size), "effective r mismatch")

    g = gram(family)
    p1 = Partition.from_json(report["step1"]["partition"])
    fresh_margin = step1_margin(g, p1)
    _expect(fresh_margin >= -1e-10, "stored partition lacks the Step-1 property")
    _close(report["step1"]["margin"], fresh_margin, tol, "step1 margin")
    _close(report["step1"]["objective"], partition_objective(g, p1), tol, "step1 objective")

    from .reduction import verify_step2, verify_step3

    _close(report["step2"]["margin"], verify_step2(g, p1, bounds, r), tol, "step2 margin")
    _close(report["step3"]["margin"], verify_step3(family, p1, bounds, r), tol, "step3 margin")

    _expect(
        sorted(tuple(i - 1 for i in e["indices"]) for e in report["blocks"])
        == sorted(b for b in p1.blocks if b),
        "reported blocks do not cover the step-1 partition",
    )
    min_diag, min_mnorm, min_pave = math.inf, math.inf, math.inf
    expected_final: list[tuple[int, ...]] = []
    max_sub_blocks = 0
    for entry in report["blocks"]:
        block = tuple(i - 1 for i in entry["indices"])
        data = triangularize_block(family, block)
        _close(entry["m_norm"], data.m_norm, tol, f"block {entry['label']} m_norm")
        _close(entry["min_diag_sq"], data.min_diag_sq, tol, f"block {entry['label']} diag")
        cert = PavingCertificate.from_json(entry["paving"])
        _expect(cert.partition.n == len(block), "paving partition size mismatch")
        _close(cert.epsilon_target, eps / 2.0, tol, "paving target is not epsilon/2")
        _expect(cert.reference_norm == 1.0, "paving target is not absolute")
        _verify_paving_claim(data.strict_lower, cert, tol)
        for sub in cert.partition.blocks:
            if sub:
                expected_final.append(tuple(block[pos] for pos in sub))
        max_sub_blocks = max(max_sub_blocks, cert.partition.r)
        min_diag = min(min_diag, data.min_diag_sq)
        min_mnorm = min(min_mnorm, bounds.upper + 1.0 - data.m_norm)
        min_pave = min(min_pave, cert.margin)
    _close(report["step4"]["margin"], min_diag - (1.0 - eps / 2.0), tol, "step4 margin")
    _close(report["m_norm"]["margin"], min_mnorm, tol, "m_norm margin")
    _close(report["paving_margin"], min_pave, tol, "paving margin")

    final = Partition.from_json(report["final"]["partition"])
    _expect(final.refines(p1), "final partition does not refine step 1")
    _expect(
        list(final.blocks) == expected_final,
        "final partition does not match the block pavings",
    )
    _expect(
        report["counts"]["headline"] == r * max_sub_blocks,
        "headline block count inconsistent",
    )
    stored_final = report["final"]["blocks"]
    _expect(len(stored_final) == len(final.blocks), "final block count mismatch")
    worst_final = math.inf
    for entry, block in zip(stored_final, final.blocks):
        _expect(tuple(i - 1 for i in entry["indices"]) == block, "final block indices mismatch")
        sub = family.subfamily(block)
        fresh = riesz_bounds(sub)
        _close(entry["lower"], fresh.lower, tol, "final block lower bound")
        _close(entry["upper"], fresh.upper, tol, "final block upper bound")
        margin = min(fresh.lower - (1.0 - eps), (1.0 + eps) - fresh.upper)
        _close(entry["margin"], margin, tol, "final block margin")
        ok = fresh.lower >= 1.0 - eps - 1e-9 and fresh.upper <= 1.0 + eps + 1e-9
        _expect(bool(entry["pass"]) == ok, "final block pass flag inconsistent")
        worst_final = min(worst_final, margin)
    _close(report["final"]["margin"], worst_final, tol, "final margin")

    _expect(
        report["counts"]["final_blocks"] == len(final.blocks),
        "final block count inconsistent",
    )
    if not bool(report["pass"]):
        raise _Mismatch("report records a failed run")
    return 0


def _verify_paving_bundle(obj: dict, tol: float) -> int:
    t = matrix_from_json(obj["matrix"])
    if float(np.max(np.abs(np.diagonal(t)))) > DIAGONAL_TOL:
        raise _Mismatch("paved matrix has a nonzero diagonal")
    cert = PavingCertificate.from_json(obj["certificate"])
    _verify_paving_claim(t, cert, tol)
    if not cert.passes:
        raise _Mismatch("certificate records a failed paving")
    return 0


def verify_file(path: str, tolerance: float = 1e-8) -> int:
    """Recompute a bundle's claims from its embedded inputs.

    Returns 0 when everything checks out and the bundle records a pass,
    1 on any mismatch or recorded failure, 2 for malformed input.
    """
    try:
        obj = _load_json(path)
        kind = obj.get("kind")
        if kind == "reduction_bundle":
            return _verify_reduction_bundle(obj, tolerance)
        if kind == "paving_bundle":
            return _verify_paving_bundle(obj, tolerance)
        print(f"unrecognized bundle kind: {kind!r}", file=sys.stderr)
        return 2
    except _Mismatch as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1
    except (OSError, KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        print(f"cannot verify {path}: {exc}", file=sys.stderr)
        return 2


def cmd_verify(args) -> int:
    code = verify_file(args.file, tolerance=args.tolerance)
    if code == 0:
        print("verified: all recomputed quantities agree")
    return code


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0, help="seed for generated instances")
    p.add_argument("--tolerance", type=float, default=1e-8, help="margin tolerance")
    p.add_argument("--json", action="store_true", help="emit full JSON to stdout")
    p.add_argument("--out", metavar="PATH", help="write the JSON body (plus manifest) here")


def _add_family_source(p: argparse.ArgumentParser):
    p.add_argument("--family", metavar="FILE", help="vector-family JSON file")
    p.add_argument(
        "--gram-file",
        metavar="FILE",
        help="Hermitian unit-diagonal Gram JSON; a family is synthesized from its PSD factorization",
    )
    p.add_argument("--kind", choices=[k for k in KINDS if k != "gram_file"], default=None)
    p.add_argument("--n", type=int, default=None, help="family size for generated instances")
    p.add_argument("--condition", type=float, default=2.0, help="target B/A for generated instances")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pavekit",
        description="paving certificates and epsilon-Riesz partitions",
    )
    parser.add_argument("--version", action="version", version=f"pavekit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit a seeded unit-norm family")
    _add_family_source(p)
    _add_common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bounds", help="Riesz bounds of a family")
    _add_family_source(p)
    _add_common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("partition", help="Step-1 correlation-minimizing partition")
    _add_family_source(p)
    p.add_argument("--matrix", metavar="FILE", help="Hermitian matrix JSON to partition directly")
    p.add_argument("--r", type=int, required=True, help="number of blocks")
    _add_common(p)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("reduce", help="run the full reduction pipeline")
    _add_family_source(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--paving", choices=("exhaustive", "heuristic"), default="exhaustive")
    p.add_argument("--r-override", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("pave", help="pave a zero-diagonal matrix")
    p.add_argument("--matrix", metavar="FILE", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--method", choices=("brute_force", "heuristic"), default="brute_force")
    p.add_argument("--r-max", type=int, default=8)
    p.add_argument("--strip-diagonal", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_pave)

    p = sub.add_parser("verify", help="recompute and check an emitted bundle")
    p.add_argument("file", help="bundle JSON produced by reduce or pave")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
