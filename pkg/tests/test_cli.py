from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from pavekit import brute_force_paving
from pavekit.cli import main, verify_file
from pavekit.serialize import matrix_to_json

FIXTURES = Path(__file__).parent / "fixtures"


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def swap_file(tmp_path):
    return write_json(tmp_path / "swap.json", matrix_to_json(np.array([[0.0, 1.0], [1.0, 0.0]])))


def run_cli(*args) -> int:
    return main([str(a) for a in args])


class TestGenerateAndBounds:
    def test_generate_orthonormal(self, tmp_path, capsys):
        out = tmp_path / "fam.json"
        assert run_cli("generate", "--kind", "orthonormal", "--n", "3", "--out", out) == 0
        fam = json.loads(out.read_text())
        assert fam["vectors"]["rows"] == 3
        assert (tmp_path / "fam.json.manifest.json").exists()

    def test_generate_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            run_cli("generate", "--kind", "random_riesz", "--n", "6", "--seed", "5", "--out", out)
        assert a.read_text() == b.read_text()

    def test_bounds_output(self, capsys):
        assert run_cli("bounds", "--kind", "orthonormal", "--n", "4") == 0
        out = json.loads(capsys.readouterr().out)
        assert out["lower"] == 1.0 and out["upper"] == 1.0

    def test_missing_n_is_input_error(self, capsys):
        assert run_cli("bounds", "--kind", "orthonormal") == 2


class TestPartitionCommand:
    def test_partition_on_matrix_file(self, tmp_path, capsys):
        g = np.full((4, 4), 0.1)
        g[0, 1] = g[1, 0] = 0.9
        g[2, 3] = g[3, 2] = 0.9
        np.fill_diagonal(g, 1.0)
        path = write_json(tmp_path / "g.json", matrix_to_json(g))
        assert run_cli("partition", "--matrix", path, "--r", "2", "--json") == 0
        out = json.loads(capsys.readouterr().out)
        blocks = [set(b) for b in out["partition"]["blocks"]]
        assert {1, 2} not in blocks  # the hot pair 1-2 (1-based) is split
        assert out["objective"] == pytest.approx(0.04, abs=1e-12)


class TestReduceCommand:
    def test_orthonormal_pass(self, capsys):
        assert run_cli("reduce", "--kind", "orthonormal", "--n", "6", "--epsilon", "0.5") == 0
        assert "pass" in capsys.readouterr().out

    def test_gram_file_fixture_with_exhaustive_paving(self, capsys):
        c = 0.2  # the committed fixture's single off-diagonal pair
        code = run_cli(
            "reduce", "--gram-file", FIXTURES / "gram6.json",
            "--epsilon", "0.25", "--paving", "exhaustive", "--json",
        )
        assert code == 0
        bundle = json.loads(capsys.readouterr().out)
        report = bundle["report"]
        assert report["pass"] is True
        # the off-diagonal c only shifts the extreme Gram eigenvalues by +-c
        assert report["input"]["lower"] == pytest.approx(np.sqrt(1 - c), abs=1e-9)
        assert report["input"]["upper"] == pytest.approx(np.sqrt(1 + c), abs=1e-9)
        for key in ("step1", "step2", "step3", "step4"):
            assert report[key]["margin"] is not None

    def test_reduce_byte_identical_bodies(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            code = run_cli(
                "reduce", "--kind", "random_riesz", "--n", "12", "--seed", "7",
                "--epsilon", "0.5", "--out", out,
            )
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_rank_deficient_gram_fails_at_bounds_stage(self, tmp_path, capsys):
        g = np.ones((3, 3))  # rank one, unit diagonal
        path = write_json(tmp_path / "g.json", matrix_to_json(g))
        # stage errors are captured in the report, so this is a certified fail
        assert run_cli("reduce", "--gram-file", path, "--epsilon", "0.5") == 1


class TestPaveCommand:
    def test_zero_matrix(self, tmp_path, capsys):
        path = write_json(tmp_path / "z.json", matrix_to_json(np.zeros((3, 3))))
        assert run_cli("pave", "--matrix", path, "--epsilon", "0.1", "--r-max", "1") == 0
        bundle = json.loads(capsys.readouterr().out)
        assert bundle["certificate"]["partition"]["blocks"] == [[1, 2, 3]]
        assert bundle["certificate"]["pass"] is True

    def test_swap_matrix(self, swap_file, capsys):
        assert run_cli("pave", "--matrix", swap_file, "--epsilon", "0.5", "--json") == 0
        bundle = json.loads(capsys.readouterr().out)
        assert bundle["certificate"]["partition"]["blocks"] == [[1], [2]]

    def test_r_max_exhausted_is_fail(self, swap_file):
        assert run_cli("pave", "--matrix", swap_file, "--epsilon", "0.5", "--r-max", "1") == 1

    def test_nonzero_diagonal_refused_without_flag(self, tmp_path):
        path = write_json(tmp_path / "d.json", matrix_to_json(np.eye(2)))
        assert run_cli("pave", "--matrix", path, "--epsilon", "0.5") == 2
        assert run_cli("pave", "--matrix", path, "--epsilon", "0.5", "--strip-diagonal") == 0

    def test_six_by_six_fixture_matches_committed_certificate(self, capsys):
        code = run_cli(
            "pave", "--matrix", FIXTURES / "lower6.json",
            "--epsilon", "0.5", "--r-max", "4", "--json",
        )
        assert code == 0
        bundle = json.loads(capsys.readouterr().out)
        committed = json.loads((FIXTURES / "lower6_cert.json").read_text())
        assert bundle["certificate"]["partition"] == committed["partition"]
        assert bundle["certificate"]["block_norms"] == pytest.approx(
            committed["block_norms"], abs=1e-10
        )
        assert bundle["certificate"]["pass"] is True

    def test_fixture_certificate_reproduced_by_library(self):
        from pavekit.serialize import matrix_from_json

        t = matrix_from_json(json.loads((FIXTURES / "lower6.json").read_text()))
        cert = brute_force_paving(t, 0.5, r_max=4)
        committed = json.loads((FIXTURES / "lower6_cert.json").read_text())
        assert cert.to_json()["partition"] == committed["partition"]


class TestVerify:
    def make_bundle(self, tmp_path, n=10, seed=3, epsilon=0.25):
        out = tmp_path / "bundle.json"
        code = run_cli(
            "reduce", "--kind", "random_riesz", "--n", n, "--condition", "1.1",
            "--seed", seed, "--epsilon", epsilon, "--out", out,
        )
        assert code == 0
        return out

    def test_passing_report_verifies(self, tmp_path):
        out = self.make_bundle(tmp_path)
        assert verify_file(str(out)) == 0

    def test_tampered_block_norm_detected(self, tmp_path):
        out = self.make_bundle(tmp_path)
        obj = json.loads(out.read_text())
        obj["report"]["blocks"][0]["paving"]["block_norms"][0] += 0.1
        out.write_text(json.dumps(obj))
        assert verify_file(str(out)) == 1

    def test_tampered_final_bound_detected(self, tmp_path):
        out = self.make_bundle(tmp_path)
        obj = json.loads(out.read_text())
        obj["report"]["final"]["blocks"][0]["lower"] += 0.05
        out.write_text(json.dumps(obj))
        assert verify_file(str(out)) == 1

    def test_missing_raw_inputs_is_input_error(self, tmp_path):
        out = self.make_bundle(tmp_path)
        obj = json.loads(out.read_text())
        del obj["family"]
        out.write_text(json.dumps(obj))
        assert verify_file(str(out)) == 2

    def test_unknown_kind_is_input_error(self, tmp_path):
        path = tmp_path / "junk.json"
        path.write_text(json.dumps({"kind": "mystery"}))
        assert verify_file(str(path)) == 2

    def test_paving_bundle_verifies_and_detects_tamper(self, tmp_path, swap_file, capsys):
        out = tmp_path / "cert.json"
        assert run_cli("pave", "--matrix", swap_file, "--epsilon", "0.5", "--out", out) == 0
        assert verify_file(str(out)) == 0
        obj = json.loads(out.read_text())
        obj["certificate"]["block_norms"][0] = 0.9
        out.write_text(json.dumps(obj))
        assert verify_file(str(out)) == 1

    def test_verify_cli_exit_codes(self, tmp_path):
        out = self.make_bundle(tmp_path)
        assert run_cli("verify", out) == 0


class TestSubprocessEntry:
    def test_module_invocation_deterministic(self):
        cmd = [
            sys.executable, "-m", "pavekit", "reduce", "--kind", "random_riesz",
            "--n", "10", "--seed", "11", "--epsilon", "0.5", "--json",
        ]
        first = subprocess.run(cmd, capture_output=True, check=True)
        second = subprocess.run(cmd, capture_output=True, check=True)
        assert first.stdout == second.stdout
        bundle = json.loads(first.stdout)
        assert bundle["report"]["pass"] is True

    def test_usage_error_exit_code(self):
        proc = subprocess.run(
            [sys.executable, "-m", "pavekit", "reduce"], capture_output=True
        )
        assert proc.returncode == 2
