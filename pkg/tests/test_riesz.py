from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pavekit import (
    RieszBounds,
    VectorFamily,
    eps_minimality_values,
    eps_riesz_report,
    gram,
    is_eps_minimal,
    is_eps_riesz,
    riesz_bounds,
)

from .conftest import random_unit_family

SQ2 = math.sqrt(2.0)


def two_vector_family() -> VectorFamily:
    return VectorFamily.from_vectors([[1.0, 0.0], [1 / SQ2, 1 / SQ2]], unit_norm=True)


class TestRieszBounds:
    def test_constructor_validates(self):
        with pytest.raises(ValueError):
            RieszBounds(0.0, 1.0)
        with pytest.raises(ValueError):
            RieszBounds(2.0, 1.0)

    def test_orthonormal(self):
        b = riesz_bounds(VectorFamily(np.eye(4), unit_norm=True))
        assert (b.lower, b.upper) == pytest.approx((1.0, 1.0), abs=1e-12)

    def test_two_vector_closed_form(self):
        b = riesz_bounds(two_vector_family())
        assert b.lower == pytest.approx(math.sqrt(1 - 1 / SQ2), abs=1e-12)
        assert b.upper == pytest.approx(math.sqrt(1 + 1 / SQ2), abs=1e-12)

    def test_rank_deficient_rejected(self):
        fam = VectorFamily.from_vectors([[1.0, 0.0], [1.0, 0.0]])
        with pytest.raises(ValueError, match="lower Riesz bound is zero"):
            riesz_bounds(fam)

    def test_synthesis_inequality_sampled(self):
        rng = np.random.default_rng(23)
        fam = random_unit_family(rng, 10, 10)
        b = riesz_bounds(fam)
        v = fam.vectors
        for _ in range(1000):
            a = rng.standard_normal(10)
            synth = np.linalg.norm(a @ v) ** 2
            norm_sq = float(a @ a)
            assert b.lower**2 * norm_sq <= synth + 1e-9
            assert synth <= b.upper**2 * norm_sq + 1e-9
        # equality is approached at the extreme eigenvectors of the Gram matrix
        evs, vecs = np.linalg.eigh(gram(fam))
        for coeff, bound in ((vecs[:, 0], b.lower), (vecs[:, -1], b.upper)):
            achieved = np.linalg.norm(coeff @ v)
            assert achieved == pytest.approx(bound, abs=1e-6)

    @settings(max_examples=30, deadline=None)
    @given(scale=st.floats(0.1, 10.0))
    def test_scaling_covariance(self, scale):
        rng = np.random.default_rng(24)
        fam = random_unit_family(rng, 6, 6)
        b = riesz_bounds(fam)
        scaled = riesz_bounds(VectorFamily(scale * fam.vectors))
        assert scaled.lower == pytest.approx(scale * b.lower, abs=1e-10)
        assert scaled.upper == pytest.approx(scale * b.upper, abs=1e-10)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(25)
        fam = random_unit_family(rng, 8, 8)
        b = riesz_bounds(fam)
        for _ in range(5):
            perm = rng.permutation(8)
            pb = riesz_bounds(fam.subfamily(perm))
            assert pb.lower == pytest.approx(b.lower, abs=1e-12)
            assert pb.upper == pytest.approx(b.upper, abs=1e-12)

    def test_subset_interlacing(self):
        rng = np.random.default_rng(26)
        fam = random_unit_family(rng, 9, 9)
        b = riesz_bounds(fam)
        for _ in range(10):
            size = int(rng.integers(1, 9))
            subset = sorted(rng.choice(9, size=size, replace=False).tolist())
            sb = riesz_bounds(fam.subfamily(subset))
            assert sb.lower >= b.lower - 1e-10
            assert sb.upper <= b.upper + 1e-10


class TestIsEpsRiesz:
    def test_orthonormal(self):
        check = is_eps_riesz(VectorFamily(np.eye(3), unit_norm=True), 0.1)
        assert check.passed
        assert (check.lower, check.upper) == pytest.approx((1.0, 1.0), abs=1e-12)

    def test_correlated_pair_fails(self):
        check = is_eps_riesz(two_vector_family(), 0.1)
        assert not check.passed
        assert check.lower == pytest.approx(0.5412, abs=1e-4)

    def test_rank_deficient_fails_with_zero_lower(self):
        fam = VectorFamily.from_vectors([[1.0, 0.0], [1.0, 0.0]], unit_norm=True)
        check = is_eps_riesz(fam, 0.5)
        assert not check.passed and check.lower == 0.0

    def test_requires_unit_norm(self):
        fam = VectorFamily(2.0 * np.eye(2))
        with pytest.raises(ValueError, match="unit-norm"):
            is_eps_riesz(fam, 0.1)

    def test_report_json_shape(self):
        fam = VectorFamily(np.eye(4), unit_norm=True)
        report = eps_riesz_report(fam, [(0, 1), (2, 3)], 0.25)
        obj = report.to_json()
        assert obj["epsilon"] == 0.25
        assert [b["id"] for b in obj["blocks"]] == [0, 1]
        assert all(b["pass"] for b in obj["blocks"])
        assert report.passed


class TestEpsMinimality:
    def test_orthonormal_all_zero(self):
        vals = eps_minimality_values(VectorFamily(np.eye(3), unit_norm=True))
        assert np.allclose(vals, 0.0, atol=1e-12)

    def test_two_vector_geometry(self):
        theta = 0.7
        fam = VectorFamily.from_vectors(
            [[1.0, 0.0], [math.cos(theta), math.sin(theta)]], unit_norm=True
        )
        vals = eps_minimality_values(fam)
        assert vals == pytest.approx([math.cos(theta)] * 2, abs=1e-12)

    def test_predicate(self):
        fam = VectorFamily(np.eye(3), unit_norm=True)
        ok, vals = is_eps_minimal(fam, 0.01)
        assert ok and len(vals) == 3

    def test_unitary_invariance(self):
        rng = np.random.default_rng(27)
        fam = random_unit_family(rng, 6, 6, complex_=True)
        vals = eps_minimality_values(fam)
        q, _ = np.linalg.qr(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
        rotated = VectorFamily(fam.vectors @ q)
        assert np.max(np.abs(eps_minimality_values(rotated) - vals)) <= 1e-10
