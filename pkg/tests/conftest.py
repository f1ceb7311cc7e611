"""Shared factory fixtures: deterministic records, datasets, and configs."""

from __future__ import annotations

import numpy as np
import pytest

from mwi import (
    EmbeddingDataset,
    EmbeddingRecord,
    SyntheticSpec,
    generate_synthetic,
    normalize,
)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def record_factory():
    """make(vector, labels, record_id=None, group_id=None) with auto ids."""
    counter = {"next": 0}

    def make(vector, labels=(), record_id=None, group_id=None) -> EmbeddingRecord:
        if record_id is None:
            record_id = counter["next"]
            counter["next"] += 1
        if group_id is None:
            group_id = record_id
        return EmbeddingRecord(
            record_id=record_id,
            group_id=group_id,
            vector=np.asarray(vector, dtype=np.float32),
            labels=frozenset(labels),
        )

    return make


def make_grouped_dataset(
    n_labels: int,
    groups_per_label: int,
    copies: int = 1,
    dim: int = 16,
    seed: int = 0,
    pair_second_label: bool = False,
) -> EmbeddingDataset:
    """Dataset with multi-record groups, for sampler and augmentation tests.

    Every group carries exactly one primary label (pair_second_label adds the
    next label cyclically, making each record 2-label). Group members are the
    normalized prototype plus per-copy noise; the lowest record_id in each
    group is the "original".
    """
    rng = np.random.default_rng(seed)
    protos = rng.standard_normal((n_labels, dim))
    protos /= np.linalg.norm(protos, axis=1, keepdims=True)

    records = []
    rid = 0
    gid = 0
    for label in range(n_labels):
        labels = {label}
        if pair_second_label and n_labels > 1:
            labels.add((label + 1) % n_labels)
        base = protos[sorted(labels)].sum(axis=0)
        for _ in range(groups_per_label):
            for _ in range(copies):
                vec = base + 0.05 * rng.standard_normal(dim)
                records.append(
                    EmbeddingRecord(rid, gid, normalize(vec).astype(np.float32), frozenset(labels))
                )
                rid += 1
            gid += 1
    vocab = tuple(f"label_{i}" for i in range(n_labels))
    return EmbeddingDataset(dim=dim, label_vocab=vocab, records=tuple(records))


@pytest.fixture
def grouped_dataset():
    return make_grouped_dataset(n_labels=6, groups_per_label=8, copies=3, dim=16, seed=5)


@pytest.fixture(scope="session")
def synth_dataset():
    """Small multilabel synthetic dataset shared across read-only tests."""
    spec = SyntheticSpec(
        dim=32,
        num_labels=8,
        examples_per_label=12,
        noise_sigma=0.05,
        max_labels_per_example=2,
        seed=7,
    )
    return generate_synthetic(spec)


@pytest.fixture(scope="session")
def single_label_dataset():
    spec = SyntheticSpec(
        dim=32,
        num_labels=8,
        examples_per_label=12,
        noise_sigma=0.05,
        max_labels_per_example=1,
        seed=11,
    )
    return generate_synthetic(spec)
