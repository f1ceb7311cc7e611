"""Imprinting-initialized linear classifier with sigmoid or softmax heads.

The weight matrix is D x K with unit-norm columns and no bias, so logits are
cosine similarities between an input embedding and per-class template
vectors. Columns are initialized (imprinted) as the normalized mean of each
class's example embeddings, new classes append new columns without touching
existing ones, and training runs full-batch Adam on binary cross-entropy
(sigmoid head) or cross-entropy (softmax head), renormalizing columns after
every step by default so logits stay cosines.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import (
    BadMagicError,
    DegenerateClassError,
    DimensionMismatchError,
    DuplicateClassError,
    EmptyTrainingSetError,
    SoftmaxTargetError,
    TruncatedFileError,
    UnsupportedVersionError,
)
from .store import EmbeddingRecord, stack_vectors

HEADS = ("sigmoid", "softmax")

CLASSIFIER_MAGIC = b"MWIC"
CLASSIFIER_VERSION = 1

_CLF_HEADER = struct.Struct("<HIIBd")
_NAME_LEN = struct.Struct("<H")


@dataclass
class TrainConfig:
    """Hyperparameters for full-batch Adam training.

    ``seed`` is carried for config echo/reproducibility records; full-batch
    training itself is deterministic and draws no random numbers.
    """

    epochs: int = 60
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    renormalize_each_step: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0 < self.adam_beta1 < 1 or not 0 < self.adam_beta2 < 1:
            raise ValueError("adam betas must be in (0, 1)")
        if self.adam_epsilon <= 0:
            raise ValueError("adam_epsilon must be positive")


def _imprint_column(vectors: np.ndarray, name: str) -> np.ndarray:
    mean = vectors.mean(axis=0)
    norm = float(np.linalg.norm(mean))
    if norm == 0.0:
        raise DegenerateClassError(f"class {name!r}: mean embedding is the zero vector")
    return mean / norm


@dataclass(eq=False)
class ImprintClassifier:
    """D x K linear head whose unit-norm columns are class templates."""

    dim: int
    class_names: list[str]
    weights: np.ndarray
    head: str = "sigmoid"
    threshold: float = 0.5

    def __post_init__(self):
        if self.head not in HEADS:
            raise ValueError(f"head must be one of {HEADS}, not {self.head!r}")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must be in (0, 1)")
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if self.weights.shape != (self.dim, len(self.class_names)):
            raise ValueError(
                f"weights shape {self.weights.shape} != ({self.dim}, {len(self.class_names)})"
            )

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def column_norms(self) -> np.ndarray:
        return np.linalg.norm(self.weights, axis=0)

    def add_class(self, class_name: str, records: Sequence[EmbeddingRecord]) -> "ImprintClassifier":
        """Append one imprinted column; existing columns are untouched."""
        if class_name in self.class_names:
            raise DuplicateClassError(f"class {class_name!r} already present")
        if not records:
            raise DegenerateClassError(f"class {class_name!r}: no example records")
        vectors = stack_vectors(records, self.dim)
        if vectors.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"records have dim {vectors.shape[1]}, classifier has dim {self.dim}"
            )
        column = _imprint_column(vectors, class_name)
        self.weights = np.ascontiguousarray(
            np.concatenate([self.weights, column[:, None]], axis=1)
        )
        self.class_names.append(class_name)
        return self

    def reimprint_class(self, class_name: str, records: Sequence[EmbeddingRecord]) -> None:
        """Overwrite one existing column with a fresh imprint."""
        idx = self.class_names.index(class_name)
        vectors = stack_vectors(records, self.dim)
        self.weights[:, idx] = _imprint_column(vectors, class_name)

    # -- scoring ---------------------------------------------------------

    def _check_dim(self, width: int) -> None:
        if width != self.dim:
            raise DimensionMismatchError(f"vector has dim {width}, classifier has dim {self.dim}")

    def logits(self, vector) -> np.ndarray:
        v = np.asarray(vector, dtype=np.float64)
        self._check_dim(v.shape[-1])
        return v @ self.weights

    def scores(self, vector) -> np.ndarray:
        """Per-class activations in [0, 1] for one embedding."""
        z = self.logits(vector)
        if self.head == "sigmoid":
            return kernels.sigmoid(z)
        return kernels.softmax_rows(z[None, :])[0]

    def scores_batch(self, x: np.ndarray) -> np.ndarray:
        """Per-class activations for an (N, D) batch."""
        x = np.asarray(x, dtype=np.float64)
        self._check_dim(x.shape[1])
        z = x @ self.weights
        if self.head == "sigmoid":
            return kernels.sigmoid(z)
        return kernels.softmax_rows(z)

    def predict(self, vector) -> frozenset[int]:
        """Predicted class-index set: thresholded for sigmoid (possibly
        empty), argmax singleton for softmax (lowest index on ties)."""
        s = self.scores(vector)
        if self.head == "sigmoid":
            return frozenset(int(i) for i in np.flatnonzero(s >= self.threshold))
        return frozenset((int(np.argmax(s)),))

    def predict_batch(self, x: np.ndarray) -> np.ndarray:
        """0/1 prediction matrix for an (N, D) batch."""
        s = self.scores_batch(x)
        if self.head == "sigmoid":
            return (s >= self.threshold).astype(np.int8)
        out = np.zeros_like(s, dtype=np.int8)
        out[np.arange(s.shape[0]), np.argmax(s, axis=1)] = 1
        return out

    def copy(self) -> "ImprintClassifier":
        return ImprintClassifier(
            dim=self.dim,
            class_names=list(self.class_names),
            weights=self.weights.copy(),
            head=self.head,
            threshold=self.threshold,
        )


def imprint_init(
    class_records: Mapping[str, Sequence[EmbeddingRecord]],
    head: str = "sigmoid",
    threshold: float = 0.5,
) -> ImprintClassifier:
    """Build a classifier whose column k is the normalized mean embedding
    of class k's records, in mapping order."""
    if not class_records:
        raise DegenerateClassError("no classes to imprint")
    dims = set()
    for records in class_records.values():
        for rec in records:
            dims.add(rec.vector.shape[0])
    if len(dims) > 1:
        raise DimensionMismatchError(f"records have mixed dims {sorted(dims)}")
    if not dims:
        raise DegenerateClassError("every class needs at least one record")
    dim = dims.pop()

    columns = []
    names = []
    for name, records in class_records.items():
        if not records:
            raise DegenerateClassError(f"class {name!r}: no example records")
        columns.append(_imprint_column(stack_vectors(records, dim), name))
        names.append(name)
    weights = np.ascontiguousarray(np.stack(columns, axis=1))
    return ImprintClassifier(dim=dim, class_names=names, weights=weights, head=head, threshold=threshold)


def build_targets(
    records: Sequence[EmbeddingRecord], class_labels: Sequence[int]
) -> np.ndarray:
    """0/1 target matrix: entry (r, j) = 1 iff class_labels[j] is in record
    r's label set. Labels outside class_labels are ignored."""
    y = np.zeros((len(records), len(class_labels)), dtype=np.float64)
    for i, rec in enumerate(records):
        for j, lab in enumerate(class_labels):
            if lab in rec.labels:
                y[i, j] = 1.0
    return y


def train(
    classifier: ImprintClassifier,
    records: Sequence[EmbeddingRecord],
    class_labels: Sequence[int],
    config: TrainConfig,
) -> np.ndarray:
    """Train the head full-batch for ``config.epochs`` Adam steps.

    ``class_labels`` maps each classifier column to a dataset label index;
    targets are each record's label set restricted to that universe. Returns
    the per-epoch loss trace (loss before each step). ``epochs == 0`` leaves
    the classifier untouched and returns an empty trace.
    """
    if not records:
        raise EmptyTrainingSetError("no training records")
    if len(class_labels) != classifier.num_classes:
        raise ValueError(
            f"{len(class_labels)} class labels for {classifier.num_classes} classifier columns"
        )
    x = stack_vectors(records, classifier.dim)
    if x.shape[1] != classifier.dim:
        raise DimensionMismatchError(
            f"records have dim {x.shape[1]}, classifier has dim {classifier.dim}"
        )
    y = build_targets(records, class_labels)
    return train_matrix(classifier, x, y, config)


def train_matrix(
    classifier: ImprintClassifier, x: np.ndarray, y: np.ndarray, config: TrainConfig
) -> np.ndarray:
    """Train on a prebuilt (N, D) design matrix and (N, K) target matrix."""
    if x.shape[0] == 0:
        raise EmptyTrainingSetError("no training rows")
    if y.shape != (x.shape[0], classifier.num_classes):
        raise ValueError(f"target shape {y.shape} != ({x.shape[0]}, {classifier.num_classes})")
    if config.epochs == 0:
        return np.empty(0, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if classifier.head == "softmax":
        if not np.all(y.sum(axis=1) == 1.0):
            raise SoftmaxTargetError("softmax head requires exactly one target label per row")
        fn = kernels.train_softmax
    else:
        fn = kernels.train_sigmoid
    return fn(
        classifier.weights,
        x,
        y,
        config.epochs,
        config.learning_rate,
        config.adam_beta1,
        config.adam_beta2,
        config.adam_epsilon,
        config.renormalize_each_step,
    )


# ---------------------------------------------------------------------------
# Persistence (.mwic)
# ---------------------------------------------------------------------------


def save_classifier(classifier: ImprintClassifier, path) -> None:
    """Write magic | version u16 | dim u32 | K u32 | head u8 | threshold f64
    | class names | column-major f64 weights."""
    with open(path, "wb") as fh:
        fh.write(CLASSIFIER_MAGIC)
        fh.write(
            _CLF_HEADER.pack(
                CLASSIFIER_VERSION,
                classifier.dim,
                classifier.num_classes,
                0 if classifier.head == "sigmoid" else 1,
                classifier.threshold,
            )
        )
        for name in classifier.class_names:
            raw = name.encode("utf-8")
            fh.write(_NAME_LEN.pack(len(raw)))
            fh.write(raw)
        fh.write(classifier.weights.T.astype("<f8", copy=False).tobytes())


def load_classifier(path) -> ImprintClassifier:
    from .store import _Reader  # same byte-reader, same truncation semantics

    with open(path, "rb") as fh:
        reader = _Reader(fh)
        magic = reader.exactly(4, "magic")
        if magic != CLASSIFIER_MAGIC:
            raise BadMagicError(f"expected magic {CLASSIFIER_MAGIC!r}, found {magic!r}")
        version, dim, k, head_code, threshold = _CLF_HEADER.unpack(
            reader.exactly(_CLF_HEADER.size, "header")
        )
        if version != CLASSIFIER_VERSION:
            raise UnsupportedVersionError(f"classifier version {version} not supported")
        names = []
        for i in range(k):
            (name_len,) = _NAME_LEN.unpack(reader.exactly(_NAME_LEN.size, f"class {i} length"))
            names.append(reader.exactly(name_len, f"class {i} name").decode("utf-8"))
        payload = reader.exactly(8 * dim * k, "weights")
        weights = np.frombuffer(payload, dtype="<f8").reshape(k, dim).T
        if not reader.at_end():
            raise TruncatedFileError("trailing data after the declared weights")
    return ImprintClassifier(
        dim=dim,
        class_names=names,
        weights=np.ascontiguousarray(weights),
        head="sigmoid" if head_code == 0 else "softmax",
        threshold=threshold,
    )
