from __future__ import annotations

import numpy as np
import pytest

from pavekit import InstanceSpec, VectorFamily, generate


def random_unit_family(rng: np.random.Generator, k: int, n: int, complex_: bool = False) -> VectorFamily:
    """Seeded unit-norm family with no conditioning control."""
    v = rng.standard_normal((k, n))
    if complex_:
        v = v + 1j * rng.standard_normal((k, n))
    v = v / np.linalg.norm(v, axis=1, keepdims=True)
    return VectorFamily(v, unit_norm=True)


def random_gram(rng: np.random.Generator, k: int, complex_: bool = False) -> np.ndarray:
    v = random_unit_family(rng, k, k + 2, complex_=complex_).vectors
    g = v @ v.conj().T
    return (g + g.conj().T) / 2.0


CONDITION_GRID = (1.02, 1.05, 1.1, 1.2, 1.5, 2.0, 3.0, 3.5)


@pytest.fixture(scope="session")
def family_corpus():
    """100 seeded unit-norm families, dim 8-16, B/A <= 4 (targets <= 3.5 * 1.1)."""
    corpus = []
    for i in range(100):
        spec = InstanceSpec(
            kind="random_riesz",
            n=8 + i % 9,
            condition_target=CONDITION_GRID[i % len(CONDITION_GRID)],
            seed=1000 + i,
        )
        corpus.append(generate(spec))
    return corpus


@pytest.fixture(scope="session")
def gram_corpus():
    """200 seeded Gram matrices, n in [4, 16], paired with r in [2, 4]."""
    rng = np.random.default_rng(20240817)
    corpus = []
    for i in range(200):
        k = 4 + i % 13
        corpus.append((random_gram(rng, k, complex_=(i % 5 == 0)), 2 + i % 3))
    return corpus
