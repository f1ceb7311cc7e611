"""Seeded n-way k-shot episode sampling with group-disjoint train/test splits.

Sampling works at the group level (a source item plus its augmented copies)
so copies never straddle the split: every copy of a chosen train group joins
the train side, while a test group contributes only its unaugmented original
(lowest record_id). Labels are drawn uniformly without replacement; groups
already claimed by an earlier label in the same episode are excluded when a
later label samples, so each group serves exactly one label per episode.

Each episode gets its own RNG seeded by ``mix_seed(spec.seed, index)``, a
splitmix64-style mixer, so episode i is identical regardless of how many
episodes are requested (prefix stability).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import InsufficientExamplesError, InsufficientLabelsError
from .store import EmbeddingDataset, EmbeddingRecord

_MASK64 = (1 << 64) - 1
# splitmix64 constants (Steele, Lea & Flood's SplittableRandom finalizer)
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB


def mix_seed(seed: int, index: int) -> int:
    """Derive a 64-bit per-episode seed from (run seed, episode index)."""
    z = (seed + (index + 1) * _GOLDEN) & _MASK64
    z ^= z >> 30
    z = (z * _MIX_A) & _MASK64
    z ^= z >> 27
    z = (z * _MIX_B) & _MASK64
    z ^= z >> 31
    return z


@dataclass(frozen=True)
class EpisodeSpec:
    n_way: int
    n_shot: int
    n_test: int
    n_episodes: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.n_way < 2:
            raise ValueError("n_way must be >= 2")
        if self.n_shot < 1 or self.n_test < 1:
            raise ValueError("n_shot and n_test must be >= 1")
        if self.n_episodes < 1:
            raise ValueError("n_episodes must be >= 1")


@dataclass(eq=False)
class Episode:
    """One sampled trial: a label subset plus disjoint train/test records.

    ``train_by_label[j]`` / ``test_by_label[j]`` hold the records of the
    groups sampled for ``sampled_labels[j]``; the flat views concatenate
    them in label order.
    """

    index: int
    sampled_labels: tuple[int, ...]
    train_by_label: tuple[tuple[EmbeddingRecord, ...], ...]
    test_by_label: tuple[tuple[EmbeddingRecord, ...], ...]

    @property
    def train_records(self) -> tuple[EmbeddingRecord, ...]:
        return tuple(r for block in self.train_by_label for r in block)

    @property
    def test_records(self) -> tuple[EmbeddingRecord, ...]:
        return tuple(r for block in self.test_by_label for r in block)


def _eligible_labels(dataset: EmbeddingDataset, spec: EpisodeSpec) -> np.ndarray:
    needed = spec.n_shot + spec.n_test
    counts = {lab: len(gids) for lab, gids in dataset.groups_by_label.items()}
    eligible = [lab for lab, c in counts.items() if c >= needed]
    if len(eligible) < spec.n_way:
        if dataset.num_labels < spec.n_way:
            raise InsufficientLabelsError(
                f"dataset has {dataset.num_labels} labels, episode needs {spec.n_way}"
            )
        short = sorted(lab for lab, c in counts.items() if c < needed)
        names = tuple(dataset.label_vocab[lab] for lab in short)
        raise InsufficientExamplesError(
            f"only {len(eligible)} of {dataset.num_labels} labels have >= {needed} groups "
            f"(need {spec.n_way}); short labels: {', '.join(names)}",
            label_names=names,
        )
    return np.array(sorted(eligible), dtype=np.int64)


def _sample_one(
    dataset: EmbeddingDataset, spec: EpisodeSpec, eligible: np.ndarray, index: int
) -> Episode:
    rng = np.random.default_rng(mix_seed(spec.seed, index))
    labels = rng.choice(eligible, size=spec.n_way, replace=False)

    groups = dataset.groups
    taken: set[int] = set()
    train_blocks = []
    test_blocks = []
    for lab in labels:
        lab = int(lab)
        candidates = [g for g in dataset.groups_by_label[lab] if g not in taken]
        if len(candidates) < spec.n_shot + spec.n_test:
            raise InsufficientExamplesError(
                f"episode {index}: label {dataset.label_vocab[lab]!r} has only "
                f"{len(candidates)} free groups, needs {spec.n_shot + spec.n_test}",
                label_names=(dataset.label_vocab[lab],),
            )
        cand = np.array(candidates, dtype=np.int64)
        train_gids = rng.choice(cand, size=spec.n_shot, replace=False)
        taken.update(int(g) for g in train_gids)
        remaining = np.array([g for g in candidates if g not in taken], dtype=np.int64)
        test_gids = rng.choice(remaining, size=spec.n_test, replace=False)
        taken.update(int(g) for g in test_gids)

        train_blocks.append(tuple(r for g in train_gids for r in groups[int(g)]))
        # test groups contribute only the unaugmented original
        test_blocks.append(tuple(groups[int(g)][0] for g in test_gids))

    return Episode(
        index=index,
        sampled_labels=tuple(int(x) for x in labels),
        train_by_label=tuple(train_blocks),
        test_by_label=tuple(test_blocks),
    )


def iter_episodes(dataset: EmbeddingDataset, spec: EpisodeSpec) -> Iterator[Episode]:
    """Lazily yield ``spec.n_episodes`` episodes."""
    eligible = _eligible_labels(dataset, spec)
    for i in range(spec.n_episodes):
        yield _sample_one(dataset, spec, eligible, i)


def sample_episodes(dataset: EmbeddingDataset, spec: EpisodeSpec) -> list[Episode]:
    """Sample all episodes; deterministic in (spec.seed, episode index)."""
    return list(iter_episodes(dataset, spec))


def target_matrix(
    records: Sequence[EmbeddingRecord], sampled_labels: Sequence[int]
) -> np.ndarray:
    """0/1 matrix (records x labels); labels outside ``sampled_labels`` vanish."""
    y = np.zeros((len(records), len(sampled_labels)), dtype=np.int8)
    for i, rec in enumerate(records):
        for j, lab in enumerate(sampled_labels):
            if lab in rec.labels:
                y[i, j] = 1
    return y


def episode_target_matrix(episode: Episode, split: str = "train") -> np.ndarray:
    """Target matrix for one side of an episode ('train' or 'test')."""
    if split == "train":
        return target_matrix(episode.train_records, episode.sampled_labels)
    if split == "test":
        return target_matrix(episode.test_records, episode.sampled_labels)
    raise ValueError(f"split must be 'train' or 'test', not {split!r}")
