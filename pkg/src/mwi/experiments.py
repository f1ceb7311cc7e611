"""Episode-level experiment runners and their CSV/JSON emitters.

All emitted CSVs are byte-deterministic for a fixed config: floats are
written with repr (which round-trips exactly), rows are ordered by episode
index regardless of worker completion order, and wall-clock timing goes to
run_meta.json, never into a CSV.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence, TypeVar

import numpy as np

from .classifier import HEADS, TrainConfig, imprint_init, train
from .continual import TRACE_FIELDS, ContinualTrace, csv_value, write_trace_csv
from .continual import run_continual as run_continual_episode
from .episodes import Episode, EpisodeSpec, sample_episodes, target_matrix
from .kernels import BACKEND
from .metrics import (
    METRIC_NAMES,
    EvalBatch,
    MetricsReport,
    best_threshold,
    compute_all,
    default_threshold_grid,
    micro_f1,
)
from .store import (
    EmbeddingDataset,
    EmbeddingRecord,
    SyntheticSpec,
    generate_synthetic,
    load_dataset,
    stack_vectors,
)

AUG_MODES = ("use-all-group-copies", "unaugmented-only")

EPISODE_FIELDS = ("episode",) + METRIC_NAMES + ("best_threshold", "best_f1")
SUMMARY_FIELDS = METRIC_NAMES + ("best_threshold", "best_f1")

T = TypeVar("T")
U = TypeVar("U")


@dataclass
class ExperimentConfig:
    """One experiment: a dataset source, an episode protocol, and a model recipe."""

    episode_spec: EpisodeSpec
    train_config: TrainConfig
    dataset_path: Optional[str] = None
    synthetic: Optional[SyntheticSpec] = None
    head: str = "sigmoid"
    threshold: float = 0.5
    grid_step: float = 0.01
    aug_mode: str = "use-all-group-copies"
    trivial_repeats: int = 0
    jobs: int = 1

    def __post_init__(self):
        if (self.dataset_path is None) == (self.synthetic is None):
            raise ValueError("exactly one of dataset_path and synthetic must be set")
        if self.head not in HEADS:
            raise ValueError(f"head must be one of {HEADS}, not {self.head!r}")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must lie in (0, 1), not {self.threshold}")
        if not 0.0 < self.grid_step < 1.0:
            raise ValueError(f"grid_step must lie in (0, 1), not {self.grid_step}")
        if self.aug_mode not in AUG_MODES:
            raise ValueError(f"aug_mode must be one of {AUG_MODES}, not {self.aug_mode!r}")
        if self.trivial_repeats < 0:
            raise ValueError("trivial_repeats must be >= 0")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["kernel_backend"] = BACKEND
        return data


def load_config_dataset(config: ExperimentConfig) -> EmbeddingDataset:
    if config.dataset_path is not None:
        return load_dataset(config.dataset_path)
    assert config.synthetic is not None
    return generate_synthetic(config.synthetic)


def _map_indexed(fn: Callable[[T], U], items: Sequence[T], jobs: int) -> list[U]:
    """Apply fn to each item, preserving input order, optionally on threads."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _episode_train_blocks(
    episode: Episode, aug_mode: str, trivial_repeats: int
) -> list[list[EmbeddingRecord]]:
    """Per-label train rows after augmentation policy is applied.

    unaugmented-only keeps the first (lowest record_id) copy of each group;
    trivial repeats duplicate every kept row.
    """
    blocks = []
    for block in episode.train_by_label:
        if aug_mode == "unaugmented-only":
            seen: set[int] = set()
            rows = []
            for rec in block:
                if rec.group_id not in seen:
                    seen.add(rec.group_id)
                    rows.append(rec)
        else:
            rows = list(block)
        if trivial_repeats:
            rows = [rec for rec in rows for _ in range(1 + trivial_repeats)]
        blocks.append(rows)
    return blocks


def _episode_scores(
    episode: Episode, label_names: Sequence[str], config: ExperimentConfig
) -> tuple[np.ndarray, np.ndarray, tuple[float, ...]]:
    """Imprint, train, and score one episode: (test truth, test scores, losses)."""
    blocks = _episode_train_blocks(episode, config.aug_mode, config.trivial_repeats)
    class_records = {
        label_names[label]: blocks[i] for i, label in enumerate(episode.sampled_labels)
    }
    classifier = imprint_init(class_records, head=config.head, threshold=config.threshold)
    train_records = [rec for block in blocks for rec in block]
    losses = train(classifier, train_records, episode.sampled_labels, config.train_config)

    test_records = episode.test_records
    truth = target_matrix(test_records, episode.sampled_labels)
    scores = classifier.scores_batch(stack_vectors(test_records, classifier.dim))
    return truth, scores, tuple(float(v) for v in losses)


@dataclass(eq=False)
class EpisodeResult:
    index: int
    mode: str
    report: MetricsReport
    best_threshold: float
    best_f1: float
    losses: tuple[float, ...]

    def as_row(self) -> dict[str, object]:
        row: dict[str, object] = {"episode": self.index}
        row.update(self.report.as_dict())
        row["best_threshold"] = self.best_threshold
        row["best_f1"] = self.best_f1
        return row


def run_episode(
    episode: Episode, label_names: Sequence[str], config: ExperimentConfig
) -> EpisodeResult:
    """Evaluate one episode end to end at the configured threshold.

    Metrics run in single-label mode (enabling top-k) exactly when every
    test row carries one truth bit; the softmax head predicts by argmax,
    the sigmoid head by thresholding.
    """
    truth, scores, losses = _episode_scores(episode, label_names, config)
    if config.head == "softmax":
        batch = EvalBatch.from_argmax(truth, scores)
    else:
        batch = EvalBatch.from_scores(truth, scores, config.threshold)
    mode = "single-label" if bool(np.all(truth.sum(axis=1) == 1)) else "multilabel"
    report = compute_all(batch, mode)
    grid = default_threshold_grid(config.grid_step)
    best_thr, best_f1 = best_threshold(truth, scores, grid)
    return EpisodeResult(
        index=episode.index,
        mode=mode,
        report=report,
        best_threshold=best_thr,
        best_f1=best_f1,
        losses=losses,
    )


@dataclass(eq=False)
class RunSummary:
    """Across-episode mean and standard error for every summary field."""

    means: dict[str, Optional[float]]
    stderrs: dict[str, Optional[float]]
    n_episodes: int
    config: dict
    wall_clock_seconds: float

    def __post_init__(self):
        for name in METRIC_NAMES:
            mean = self.means.get(name)
            if mean is not None and not 0.0 <= mean <= 1.0:
                raise ValueError(f"mean {name} = {mean} outside [0, 1]")
        for name, err in self.stderrs.items():
            if err is not None and err < 0.0:
                raise ValueError(f"stderr {name} = {err} negative")


def _mean_stderr(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    if n == 1:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var) / math.sqrt(n)


def summarize_rows(
    rows: Sequence[Mapping[str, object]], fields: Sequence[str]
) -> tuple[dict[str, Optional[float]], dict[str, Optional[float]]]:
    """Column-wise mean and stderr, skipping non-numeric and None cells."""
    means: dict[str, Optional[float]] = {}
    stderrs: dict[str, Optional[float]] = {}
    for name in fields:
        values = [
            float(row[name]) for row in rows if isinstance(row.get(name), (int, float))
        ]
        if not values:
            means[name] = None
            stderrs[name] = None
        else:
            means[name], stderrs[name] = _mean_stderr(values)
    return means, stderrs


def summarize(
    results: Sequence[EpisodeResult], config: ExperimentConfig, wall_clock_seconds: float
) -> RunSummary:
    rows = [r.as_row() for r in results]
    means, stderrs = summarize_rows(rows, SUMMARY_FIELDS)
    return RunSummary(
        means=means,
        stderrs=stderrs,
        n_episodes=len(results),
        config=config.to_dict(),
        wall_clock_seconds=wall_clock_seconds,
    )


@dataclass(eq=False)
class FewshotRun:
    config: ExperimentConfig
    results: list[EpisodeResult]
    summary: RunSummary


def run_fewshot(config: ExperimentConfig) -> FewshotRun:
    """Sample episodes, evaluate each, and aggregate mean ± stderr."""
    start = time.perf_counter()
    dataset = load_config_dataset(config)
    episodes = sample_episodes(dataset, config.episode_spec)
    results = _map_indexed(
        lambda ep: run_episode(ep, dataset.label_vocab, config), episodes, config.jobs
    )
    summary = summarize(results, config, time.perf_counter() - start)
    return FewshotRun(config=config, results=results, summary=summary)


def _write_csv(path: Path, fieldnames: Sequence[str], rows: Sequence[Mapping[str, object]]):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fieldnames))
        writer.writeheader()
        for row in rows:
            writer.writerow({key: csv_value(row.get(key)) for key in fieldnames})


def summary_table(summary: RunSummary) -> list[dict[str, object]]:
    return [
        {"metric": name, "mean": summary.means[name], "stderr": summary.stderrs[name]}
        for name in SUMMARY_FIELDS
    ]


def write_fewshot_outputs(run: FewshotRun, out_dir) -> Path:
    """Emit config.json, episodes.csv, summary.csv, run_meta.json under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "config.json", "w") as fh:
        json.dump(run.config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_csv(out / "episodes.csv", EPISODE_FIELDS, [r.as_row() for r in run.results])
    _write_csv(out / "summary.csv", ("metric", "mean", "stderr"), summary_table(run.summary))
    meta = {
        "kernel_backend": BACKEND,
        "n_episodes": run.summary.n_episodes,
        "wall_clock_seconds": run.summary.wall_clock_seconds,
    }
    with open(out / "run_meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


ABLATION_AXES = ("epochs", "head", "aug_mode", "trivial_repeats")


def _apply_axis(config: ExperimentConfig, axis: str, value) -> ExperimentConfig:
    if axis == "epochs":
        return replace(config, train_config=replace(config.train_config, epochs=int(value)))
    if axis == "head":
        return replace(config, head=str(value))
    if axis == "aug_mode":
        return replace(config, aug_mode=str(value))
    if axis == "trivial_repeats":
        return replace(config, trivial_repeats=int(value))
    raise ValueError(f"unknown ablation axis {axis!r}; choose from {ABLATION_AXES}")


@dataclass(eq=False)
class AblationCell:
    settings: dict[str, object]
    summary: RunSummary

    def as_row(self) -> dict[str, object]:
        row: dict[str, object] = dict(self.settings)
        for name in SUMMARY_FIELDS:
            row[f"mean_{name}"] = self.summary.means[name]
            row[f"stderr_{name}"] = self.summary.stderrs[name]
        return row


def run_ablation_grid(
    config: ExperimentConfig, axes: Mapping[str, Sequence[object]]
) -> list[AblationCell]:
    """Cartesian product over the ablated axes, one few-shot run per cell.

    The episode spec (and its seed) is shared across cells, so every cell
    sees the identical episode stream and differs only in the ablated axis.
    """
    for axis in axes:
        if axis not in ABLATION_AXES:
            raise ValueError(f"unknown ablation axis {axis!r}; choose from {ABLATION_AXES}")
    names = list(axes.keys())
    cells = []
    for combo in itertools.product(*(axes[name] for name in names)):
        cell_config = config
        for axis, value in zip(names, combo):
            cell_config = _apply_axis(cell_config, axis, value)
        run = run_fewshot(cell_config)
        cells.append(AblationCell(settings=dict(zip(names, combo)), summary=run.summary))
    return cells


def write_ablation_csv(cells: Sequence[AblationCell], path) -> None:
    if not cells:
        raise ValueError("no ablation cells to write")
    axis_names = list(cells[0].settings.keys())
    fields = axis_names + [f"mean_{n}" for n in SUMMARY_FIELDS] + [
        f"stderr_{n}" for n in SUMMARY_FIELDS
    ]
    _write_csv(Path(path), fields, [cell.as_row() for cell in cells])


@dataclass(eq=False)
class ContinualRun:
    config: ExperimentConfig
    traces: list[ContinualTrace]
    aggregate: list[dict[str, object]]


def run_continual_experiment(
    config: ExperimentConfig, re_imprint: bool = False
) -> ContinualRun:
    """One continual run per episode plus per-step means across episodes."""
    dataset = load_config_dataset(config)
    episodes = sample_episodes(dataset, config.episode_spec)
    grid = default_threshold_grid(config.grid_step)

    def one(episode: Episode) -> ContinualTrace:
        return run_continual_episode(
            episode,
            dataset.label_vocab,
            config.train_config,
            threshold=config.threshold,
            threshold_grid=grid,
            re_imprint=re_imprint,
        )

    traces = _map_indexed(one, episodes, config.jobs)

    n_steps = len(traces[0].steps)
    value_fields = [f for f in TRACE_FIELDS if f not in ("step", "n_visible")]
    aggregate = []
    for step_idx in range(n_steps):
        rows = [trace.steps[step_idx].as_row() for trace in traces]
        means, _ = summarize_rows(rows, value_fields)
        agg_row: dict[str, object] = {"step": step_idx + 1, "n_visible": step_idx + 1}
        agg_row.update(means)
        aggregate.append(agg_row)
    return ContinualRun(config=config, traces=traces, aggregate=aggregate)


def write_continual_outputs(run: ContinualRun, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "config.json", "w") as fh:
        json.dump(run.config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    for i, trace in enumerate(run.traces):
        write_trace_csv(trace, out / f"episode_{i:03d}.csv")
    _write_csv(out / "aggregate.csv", TRACE_FIELDS, run.aggregate)
    return out


@dataclass(eq=False)
class ThresholdSweep:
    rows: list[dict[str, object]]
    best_threshold: float
    best_mean_f1: float


def sweep_thresholds(config: ExperimentConfig) -> ThresholdSweep:
    """Mean micro-F1 across episodes at every grid threshold.

    The episode scores are computed once; only the decision threshold
    varies. Ties on the best mean F1 go to the lowest threshold.
    """
    dataset = load_config_dataset(config)
    episodes = sample_episodes(dataset, config.episode_spec)
    scored = _map_indexed(
        lambda ep: _episode_scores(ep, dataset.label_vocab, config)[:2],
        episodes,
        config.jobs,
    )
    grid = default_threshold_grid(config.grid_step)
    rows = []
    best_thr = float(grid[0])
    best_mean = -1.0
    for thr in grid:
        f1s = [
            micro_f1(truth, (scores >= thr).astype(np.int8)) for truth, scores in scored
        ]
        mean, stderr = _mean_stderr(f1s)
        rows.append({"threshold": float(thr), "mean_f1": mean, "stderr_f1": stderr})
        if mean > best_mean:
            best_mean = mean
            best_thr = float(thr)
    return ThresholdSweep(rows=rows, best_threshold=best_thr, best_mean_f1=best_mean)


def write_sweep_csv(sweep: ThresholdSweep, path) -> None:
    _write_csv(Path(path), ("threshold", "mean_f1", "stderr_f1"), sweep.rows)


def read_csv_rows(path) -> list[dict[str, object]]:
    """Re-parse an emitted CSV: repr-written floats round-trip exactly.

    Empty cells map to None; non-numeric cells (e.g. an ablation's head
    column) stay strings.
    """
    rows: list[dict[str, object]] = []
    with open(path, newline="") as fh:
        for raw in csv.DictReader(fh):
            row: dict[str, object] = {}
            for key, text in raw.items():
                if text == "":
                    row[key] = None
                else:
                    try:
                        row[key] = float(text)
                    except ValueError:
                        row[key] = text
            rows.append(row)
    return rows
