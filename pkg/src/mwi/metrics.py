"""Multilabel evaluation metrics over 0/1 truth, score, and prediction matrices.

Conventions, fixed so every metric is total even on empty label sets:

- hamming_score: fraction of correctly predicted cells.
- jaccard: mean over rows of |pred ∩ truth| / |pred ∪ truth|, defined 1 when
  both sets are empty.
- subset_accuracy: fraction of rows whose predicted set equals the truth set.
- overall_* (micro): pooled over all cells; 0 when the denominator is 0.
- class_* (macro): averaged over classes, per-class 0-denominator -> 0.
- mean_average_precision: per class, rows ranked by score (ties by row
  index); classes with no positives are excluded, and the metric is
  not-applicable when every class is excluded.
- top1/top5: truth bit set at the argmax / among the top-k scores
  (ties by lowest class index); not-applicable in multilabel mode.
- class_accuracy: mean over classes of per-class cell accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional, Sequence

import numpy as np

METRIC_NAMES = (
    "hamming_score",
    "jaccard",
    "subset_accuracy",
    "mean_average_precision",
    "class_f1",
    "overall_f1",
    "class_precision",
    "overall_precision",
    "class_recall",
    "overall_recall",
    "top1_accuracy",
    "top5_accuracy",
    "class_accuracy",
)

MODES = ("single-label", "multilabel")


def default_threshold_grid(step: float = 0.01) -> np.ndarray:
    """Thresholds step, 2*step, ... < 1, rounded to the decimal grid so the
    values equal their decimal literals (0.10, not 0.1 + 1 ulp)."""
    count = int(round(1.0 / step)) - 1
    return np.round(np.arange(1, count + 1) * step, 10)


@dataclass
class MetricsReport:
    """The 13 metric values for one evaluation; None marks not-applicable."""

    hamming_score: float
    jaccard: float
    subset_accuracy: float
    mean_average_precision: Optional[float]
    class_f1: float
    overall_f1: float
    class_precision: float
    overall_precision: float
    class_recall: float
    overall_recall: float
    top1_accuracy: Optional[float]
    top5_accuracy: Optional[float]
    class_accuracy: float

    def as_dict(self) -> dict[str, Optional[float]]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} = {value} outside [0, 1]")


@dataclass(eq=False)
class EvalBatch:
    """Aligned truth / scores / predictions matrices for one evaluation."""

    truth: np.ndarray
    scores: np.ndarray
    predictions: np.ndarray

    def __post_init__(self):
        self.truth = np.asarray(self.truth, dtype=np.int8)
        self.scores = np.asarray(self.scores, dtype=np.float64)
        self.predictions = np.asarray(self.predictions, dtype=np.int8)
        if not (self.truth.shape == self.scores.shape == self.predictions.shape):
            raise ValueError(
                f"shape mismatch: truth {self.truth.shape}, scores {self.scores.shape}, "
                f"predictions {self.predictions.shape}"
            )
        if self.truth.ndim != 2:
            raise ValueError("matrices must be 2-dimensional")

    @classmethod
    def from_scores(cls, truth, scores, threshold: float) -> "EvalBatch":
        scores = np.asarray(scores, dtype=np.float64)
        return cls(truth=truth, scores=scores, predictions=(scores >= threshold).astype(np.int8))

    @classmethod
    def from_argmax(cls, truth, scores) -> "EvalBatch":
        scores = np.asarray(scores, dtype=np.float64)
        preds = np.zeros_like(scores, dtype=np.int8)
        if scores.shape[0]:
            preds[np.arange(scores.shape[0]), np.argmax(scores, axis=1)] = 1
        return cls(truth=truth, scores=scores, predictions=preds)


def _prf(tp: int, pred_pos: int, true_pos: int) -> tuple[float, float, float]:
    p = tp / pred_pos if pred_pos else 0.0
    r = tp / true_pos if true_pos else 0.0
    f = 2.0 * p * r / (p + r) if (p + r) > 0.0 else 0.0
    return p, r, f


def average_precision(truth_col: np.ndarray, score_col: np.ndarray) -> Optional[float]:
    """AP of one class: mean over positives of precision at each positive's
    rank, rows sorted by descending score with ties broken by row index.
    None when the class has no positives."""
    positives = int(truth_col.sum())
    if positives == 0:
        return None
    order = np.argsort(-score_col, kind="stable")
    hits = 0
    total = 0.0
    for rank, idx in enumerate(order, start=1):
        if truth_col[idx]:
            hits += 1
            total += hits / rank
    return total / positives


def compute_all(batch: EvalBatch, mode: str) -> MetricsReport:
    """Evaluate the full metric suite for one batch.

    ``mode`` is 'single-label' (requires exactly one truth bit per row and
    enables top-k) or 'multilabel' (top-k not applicable).
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, not {mode!r}")
    t = batch.truth
    p = batch.predictions
    s = batch.scores
    n, k = t.shape
    if n == 0:
        raise ValueError("empty batch")
    if mode == "single-label" and not np.all(t.sum(axis=1) == 1):
        raise ValueError("single-label mode requires exactly one truth bit per row")

    cells = n * k
    hamming = int((p == t).sum()) / cells

    jaccard_vals = []
    subset_hits = 0
    for i in range(n):
        inter = int((p[i] & t[i]).sum())
        union = int((p[i] | t[i]).sum())
        jaccard_vals.append(1.0 if union == 0 else inter / union)
        if inter == union:
            subset_hits += 1
    jaccard = sum(jaccard_vals) / n
    subset = subset_hits / n

    tp = int((p & t).sum())
    micro_p, micro_r, micro_f = _prf(tp, int(p.sum()), int(t.sum()))

    class_ps = []
    class_rs = []
    class_fs = []
    class_accs = []
    ap_vals = []
    for j in range(k):
        tp_j = int((p[:, j] & t[:, j]).sum())
        cp, cr, cf = _prf(tp_j, int(p[:, j].sum()), int(t[:, j].sum()))
        class_ps.append(cp)
        class_rs.append(cr)
        class_fs.append(cf)
        class_accs.append(int((p[:, j] == t[:, j]).sum()) / n)
        ap = average_precision(t[:, j], s[:, j])
        if ap is not None:
            ap_vals.append(ap)
    macro_p = sum(class_ps) / k
    macro_r = sum(class_rs) / k
    macro_f = sum(class_fs) / k
    class_accuracy = sum(class_accs) / k
    mean_ap = sum(ap_vals) / len(ap_vals) if ap_vals else None

    if mode == "single-label":
        top1_hits = 0
        top5_hits = 0
        m = min(5, k)
        for i in range(n):
            order = np.argsort(-s[i], kind="stable")
            if t[i, order[0]]:
                top1_hits += 1
            if any(t[i, order[j]] for j in range(m)):
                top5_hits += 1
        top1: Optional[float] = top1_hits / n
        top5: Optional[float] = top5_hits / n
    else:
        top1 = None
        top5 = None

    return MetricsReport(
        hamming_score=hamming,
        jaccard=jaccard,
        subset_accuracy=subset,
        mean_average_precision=mean_ap,
        class_f1=macro_f,
        overall_f1=micro_f,
        class_precision=macro_p,
        overall_precision=micro_p,
        class_recall=macro_r,
        overall_recall=micro_r,
        top1_accuracy=top1,
        top5_accuracy=top5,
        class_accuracy=class_accuracy,
    )


def micro_f1(truth: np.ndarray, predictions: np.ndarray) -> float:
    """Pooled F1 over all cells, 0 on 0 denominators."""
    t = np.asarray(truth, dtype=np.int8)
    p = np.asarray(predictions, dtype=np.int8)
    _, _, f = _prf(int((p & t).sum()), int(p.sum()), int(t.sum()))
    return f


def best_threshold(
    truth: np.ndarray, scores: np.ndarray, grid: Sequence[float] | None = None
) -> tuple[float, float]:
    """Grid threshold maximizing pooled F1; ties go to the lowest threshold."""
    if grid is None:
        grid = default_threshold_grid()
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("threshold grid is empty")
    scores = np.asarray(scores, dtype=np.float64)
    best_thr = float(grid[0])
    best_f1 = -1.0
    for thr in grid:
        f = micro_f1(truth, (scores >= thr).astype(np.int8))
        if f > best_f1:
            best_f1 = f
            best_thr = float(thr)
    return best_thr, best_f1
