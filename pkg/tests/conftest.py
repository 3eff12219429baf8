"""Shared fixtures: small synthetic graphs and initialized models.

Session-scoped fixtures cache the expensive graph builds; tests must not
mutate them. Anything a test mutates is built inside the test.
"""

from __future__ import annotations

import numpy as np
import pytest

from ddikge.data import Triplet, build_filter_index, split, synth_kg
from ddikge.rng import RngStream
from ddikge.scorers import init_model


@pytest.fixture(scope="session")
def rank_kg():
    """50-entity/5-relation KG with its split and filter index."""
    triplets, vocab = synth_kg(50, 5, 3, 0.15, 0.05, seed=7)
    ds = split(triplets, (0.8, 0.1, 0.1), seed=7)
    index = build_filter_index(ds.train, ds.valid, ds.test)
    return triplets, vocab, ds, index


@pytest.fixture(scope="session")
def mid_kg():
    """200-entity/10-relation/4-cluster KG, the directional-claim bed.

    Big enough that test MRR separates trained from untrained models;
    the 50-entity graph's test split is too small for that.
    """
    triplets, vocab = synth_kg(200, 10, 4, 0.12, 0.05, seed=42)
    ds = split(triplets, (0.8, 0.1, 0.1), seed=42)
    index = build_filter_index(ds.train, ds.valid, ds.test)
    return triplets, vocab, ds, index


@pytest.fixture(scope="session")
def tiny_triplets():
    """Six hand-written triplets over 4 entities and 2 relations."""
    return [
        Triplet(0, 0, 1),
        Triplet(1, 0, 2),
        Triplet(2, 0, 3),
        Triplet(0, 1, 2),
        Triplet(1, 1, 3),
        Triplet(3, 1, 0),
    ]


def make_model(scorer: str, n_entities: int = 6, n_relations: int = 3,
               dim: int = 4, seed: int = 5, norm: str = "l2"):
    return init_model(scorer, n_entities, n_relations, dim, RngStream(seed), norm=norm)


def rand_vectors(shape, seed: int = 0, scale: float = 1.0) -> np.ndarray:
    """Deterministic test vectors in [-scale, scale)."""
    rng = RngStream(seed)
    return (2.0 * rng.uniform(shape) - 1.0) * scale
