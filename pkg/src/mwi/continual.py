"""Incremental label addition with experience replay.

Labels arrive one per step in episode order. The new label's train records
join the replay buffer, the classifier grows a freshly imprinted column,
targets for the whole buffer are rebuilt against the labels visible so far,
and the classifier is retrained on the full buffer (warm-started weights,
fresh optimizer state each step). The test split is fixed across steps;
its targets are likewise restricted to visible labels, so a test record
whose true labels have not arrived yet has an all-zero target row.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .classifier import ImprintClassifier, TrainConfig, imprint_init, train
from .episodes import Episode, target_matrix
from .errors import EmptyTrainingSetError
from .metrics import (
    METRIC_NAMES,
    EvalBatch,
    MetricsReport,
    best_threshold,
    compute_all,
    default_threshold_grid,
)
from .store import EmbeddingRecord, stack_vectors

TRACE_FIELDS = ("step", "n_visible") + METRIC_NAMES + ("fixed_f1", "best_threshold", "best_f1")


@dataclass(eq=False)
class ReplayBuffer:
    """All train records whose labels have arrived, in arrival order."""

    records: list[EmbeddingRecord] = field(default_factory=list)
    visible_labels: list[int] = field(default_factory=list)

    def add(self, label: int, records: Sequence[EmbeddingRecord]) -> None:
        if label in self.visible_labels:
            raise ValueError(f"label {label} already added")
        self.visible_labels.append(label)
        self.records.extend(records)

    def __len__(self) -> int:
        return len(self.records)


@dataclass(eq=False)
class ContinualStep:
    """Evaluation snapshot after one label arrival."""

    step: int
    n_visible: int
    n_buffer: int
    report: MetricsReport
    best_threshold: float
    best_f1: float
    losses: tuple[float, ...]

    @property
    def fixed_f1(self) -> float:
        return self.report.overall_f1

    def as_row(self) -> dict[str, object]:
        row: dict[str, object] = {"step": self.step, "n_visible": self.n_visible}
        row.update(self.report.as_dict())
        row["fixed_f1"] = self.fixed_f1
        row["best_threshold"] = self.best_threshold
        row["best_f1"] = self.best_f1
        return row


@dataclass(eq=False)
class ContinualTrace:
    """Per-step snapshots of one continual run, one entry per added label."""

    steps: list[ContinualStep]
    visible_labels: tuple[int, ...]

    @property
    def final(self) -> ContinualStep:
        return self.steps[-1]

    def rows(self) -> list[dict[str, object]]:
        return [s.as_row() for s in self.steps]


def run_continual(
    episode: Episode,
    label_names: Sequence[str],
    train_config: TrainConfig,
    threshold: float = 0.5,
    threshold_grid: Sequence[float] | None = None,
    re_imprint: bool = False,
) -> ContinualTrace:
    """Play one episode's labels incrementally and evaluate after each step.

    ``re_imprint`` discards the warm start: every existing column is
    re-imprinted from its original train block before each retraining.
    """
    if threshold_grid is None:
        threshold_grid = default_threshold_grid()
    if not episode.sampled_labels:
        raise EmptyTrainingSetError("episode has no sampled labels")

    test_records = episode.test_records
    test_x = stack_vectors(test_records, test_records[0].vector.shape[0])

    buffer = ReplayBuffer()
    classifier: Optional[ImprintClassifier] = None
    steps: list[ContinualStep] = []

    for k, label in enumerate(episode.sampled_labels, start=1):
        block = episode.train_by_label[k - 1]
        name = label_names[label]
        if classifier is None:
            classifier = imprint_init({name: list(block)}, head="sigmoid", threshold=threshold)
        else:
            classifier.add_class(name, block)
            if re_imprint:
                for prev_idx in range(k - 1):
                    classifier.reimprint_class(
                        label_names[episode.sampled_labels[prev_idx]],
                        episode.train_by_label[prev_idx],
                    )
        buffer.add(label, block)

        visible = tuple(buffer.visible_labels)
        losses = train(classifier, buffer.records, visible, train_config)

        truth = target_matrix(test_records, visible)
        scores = classifier.scores_batch(test_x)
        batch = EvalBatch.from_scores(truth, scores, threshold)
        report = compute_all(batch, "multilabel")
        best_thr, best_f1 = best_threshold(truth, scores, threshold_grid)
        steps.append(
            ContinualStep(
                step=k,
                n_visible=k,
                n_buffer=len(buffer),
                report=report,
                best_threshold=best_thr,
                best_f1=best_f1,
                losses=tuple(losses),
            )
        )

    assert classifier is not None
    return ContinualTrace(steps=steps, visible_labels=tuple(buffer.visible_labels))


def csv_value(value: object) -> str:
    """Stable text for CSV cells: repr for floats, empty for None."""
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_trace_csv(trace: ContinualTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TRACE_FIELDS)
        writer.writeheader()
        for row in trace.rows():
            writer.writerow({key: csv_value(row[key]) for key in TRACE_FIELDS})
