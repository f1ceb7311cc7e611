"""Embedding dataset model, its binary container format, and a synthetic generator.

The on-disk container (``.mwie``) is a little-endian binary layout chosen so
any language can read it without an array library:

.. code-block:: text

    magic        4 bytes  b"MWIE"
    version      u16      currently 1
    dim          u32      embedding width D
    label_count  u32      vocabulary size
    record_count u64
    labels       per label: u16 byte length + UTF-8 name
    records      per record:
                   record_id  u64
                   group_id   u64
                   n_labels   u16, then n_labels strictly increasing u32 indices
                   vector     dim * f32

Vectors are stored as 32-bit floats; all in-memory arithmetic is done in
64-bit. Save followed by load reproduces every field bit-for-bit. A JSON
debug export exists for human inspection but is not an ingestion format.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from typing import BinaryIO, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    BadMagicError,
    DatasetFormatError,
    DegenerateVectorError,
    LabelIndexError,
    TruncatedFileError,
    UnsupportedVersionError,
)

MAGIC = b"MWIE"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<HIIQ")
_NAME_LEN = struct.Struct("<H")
_RECORD_HEAD = struct.Struct("<QQH")


def normalize(vector) -> np.ndarray:
    """Scale a vector to unit L2 norm, computing in float64.

    Raises:
        DegenerateVectorError: if the vector is all zeros.
    """
    v = np.asarray(vector, dtype=np.float64)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise DegenerateVectorError("cannot normalize an all-zeros vector")
    return v / norm


@dataclass(frozen=True, eq=False)
class EmbeddingRecord:
    """One unit-norm embedding with its ground-truth label set.

    Augmented copies of the same source item share a ``group_id``; the
    unaugmented original is the lowest ``record_id`` in its group.
    """

    record_id: int
    group_id: int
    vector: np.ndarray
    labels: frozenset[int]

    def __post_init__(self):
        vec = np.ascontiguousarray(self.vector, dtype=np.float32)
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)
        object.__setattr__(self, "labels", frozenset(int(x) for x in self.labels))


def stack_vectors(records: Sequence[EmbeddingRecord], dim: int) -> np.ndarray:
    """Stack record vectors into a float64 (N, dim) matrix."""
    if not records:
        return np.zeros((0, dim), dtype=np.float64)
    return np.stack([r.vector for r in records]).astype(np.float64)


@dataclass(eq=False)
class EmbeddingDataset:
    """Immutable collection of embedding records over a label vocabulary.

    Instances are validated at construction and never mutated afterwards,
    so they are safe to share read-only across parallel workers.
    """

    dim: int
    label_vocab: tuple[str, ...]
    records: tuple[EmbeddingRecord, ...]

    def __post_init__(self):
        self.dim = int(self.dim)
        self.label_vocab = tuple(self.label_vocab)
        self.records = tuple(self.records)
        self._validate()

    def _validate(self) -> None:
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        seen_ids: set[int] = set()
        n_labels = len(self.label_vocab)
        for rec in self.records:
            if rec.vector.shape != (self.dim,):
                raise ValueError(
                    f"record {rec.record_id}: vector length {rec.vector.shape[0]} != dim {self.dim}"
                )
            if rec.record_id in seen_ids:
                raise ValueError(f"duplicate record_id {rec.record_id}")
            seen_ids.add(rec.record_id)
            for lab in rec.labels:
                if not 0 <= lab < n_labels:
                    raise LabelIndexError(
                        f"record {rec.record_id}: label index {lab} outside vocabulary of {n_labels}"
                    )

    @property
    def num_labels(self) -> int:
        return len(self.label_vocab)

    @cached_property
    def groups(self) -> dict[int, tuple[EmbeddingRecord, ...]]:
        """Records keyed by group_id, each group sorted by record_id."""
        out: dict[int, list[EmbeddingRecord]] = {}
        for rec in self.records:
            out.setdefault(rec.group_id, []).append(rec)
        return {
            gid: tuple(sorted(members, key=lambda r: r.record_id))
            for gid, members in out.items()
        }

    @cached_property
    def groups_by_label(self) -> dict[int, tuple[int, ...]]:
        """For each label index, the sorted group ids containing it."""
        out: dict[int, set[int]] = {lab: set() for lab in range(self.num_labels)}
        for rec in self.records:
            for lab in rec.labels:
                out[lab].add(rec.group_id)
        return {lab: tuple(sorted(gids)) for lab, gids in out.items()}

    def records_with_label(self, label: int) -> tuple[EmbeddingRecord, ...]:
        return tuple(r for r in self.records if label in r.labels)

    def max_vector_norm_error(self) -> float:
        """Largest |norm - 1| over all records (float64 arithmetic)."""
        if not self.records:
            return 0.0
        mat = stack_vectors(self.records, self.dim)
        return float(np.abs(np.linalg.norm(mat, axis=1) - 1.0).max())


# ---------------------------------------------------------------------------
# Binary container
# ---------------------------------------------------------------------------


class _Reader:
    """Byte reader that turns short reads into TruncatedFileError."""

    def __init__(self, fh: BinaryIO):
        self._fh = fh

    def exactly(self, n: int, what: str) -> bytes:
        data = self._fh.read(n)
        if len(data) != n:
            raise TruncatedFileError(
                f"file truncated while reading {what}: wanted {n} bytes, got {len(data)}"
            )
        return data

    def at_end(self) -> bool:
        return self._fh.read(1) == b""


def save_dataset(dataset: EmbeddingDataset, path) -> None:
    """Write a dataset in the .mwie container format."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(
            _HEADER.pack(FORMAT_VERSION, dataset.dim, dataset.num_labels, len(dataset.records))
        )
        for name in dataset.label_vocab:
            raw = name.encode("utf-8")
            fh.write(_NAME_LEN.pack(len(raw)))
            fh.write(raw)
        for rec in dataset.records:
            labels = sorted(rec.labels)
            fh.write(_RECORD_HEAD.pack(rec.record_id, rec.group_id, len(labels)))
            if labels:
                fh.write(struct.pack(f"<{len(labels)}I", *labels))
            fh.write(rec.vector.astype("<f4", copy=False).tobytes())


def load_dataset(path) -> EmbeddingDataset:
    """Read a .mwie container, reproducing the saved dataset bit-for-bit.

    Raises:
        BadMagicError, UnsupportedVersionError, TruncatedFileError,
        LabelIndexError: each for its distinct malformation.
    """
    with open(path, "rb") as fh:
        reader = _Reader(fh)
        magic = reader.exactly(4, "magic")
        if magic != MAGIC:
            raise BadMagicError(f"expected magic {MAGIC!r}, found {magic!r}")
        version, dim, n_labels, n_records = _HEADER.unpack(reader.exactly(_HEADER.size, "header"))
        if version != FORMAT_VERSION:
            raise UnsupportedVersionError(f"format version {version} not supported (expected {FORMAT_VERSION})")
        vocab = []
        for i in range(n_labels):
            (name_len,) = _NAME_LEN.unpack(reader.exactly(_NAME_LEN.size, f"label {i} length"))
            raw = reader.exactly(name_len, f"label {i} name")
            try:
                vocab.append(raw.decode("utf-8"))
            except UnicodeDecodeError as exc:
                raise DatasetFormatError(f"label {i} name is not valid UTF-8") from exc
        vec_bytes = dim * 4
        records = []
        for i in range(n_records):
            rid, gid, k = _RECORD_HEAD.unpack(reader.exactly(_RECORD_HEAD.size, f"record {i} header"))
            if k:
                labels = struct.unpack(f"<{k}I", reader.exactly(4 * k, f"record {i} labels"))
                for a, b in zip(labels, labels[1:]):
                    if b <= a:
                        raise DatasetFormatError(
                            f"record {i}: label indices not strictly increasing"
                        )
                for lab in labels:
                    if lab >= n_labels:
                        raise LabelIndexError(
                            f"record {i}: label index {lab} outside vocabulary of {n_labels}"
                        )
            else:
                labels = ()
            vec = np.frombuffer(reader.exactly(vec_bytes, f"record {i} vector"), dtype="<f4")
            records.append(EmbeddingRecord(rid, gid, vec, frozenset(labels)))
        if not reader.at_end():
            raise DatasetFormatError("trailing data after the declared records")
    return EmbeddingDataset(dim=dim, label_vocab=tuple(vocab), records=tuple(records))


def dataset_to_debug_json(dataset: EmbeddingDataset) -> dict:
    """JSON-serializable mirror of the container, floats as decimal text."""
    return {
        "format": "mwie-debug",
        "version": FORMAT_VERSION,
        "dim": dataset.dim,
        "label_vocab": list(dataset.label_vocab),
        "records": [
            {
                "record_id": rec.record_id,
                "group_id": rec.group_id,
                "labels": sorted(rec.labels),
                "vector": [float(x) for x in rec.vector],
            }
            for rec in dataset.records
        ],
    }


# ---------------------------------------------------------------------------
# Synthetic data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a label-correlated synthetic embedding dataset.

    Each label gets a unit-norm Gaussian prototype; each record is the
    normalized sum of its label subset's prototypes plus isotropic noise.
    This yields linearly separable, label-correlated geometry without any
    upstream embedding model.
    """

    dim: int
    num_labels: int
    examples_per_label: int
    noise_sigma: float = 0.0
    max_labels_per_example: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        if self.num_labels < 1:
            raise ValueError("num_labels must be >= 1")
        if self.examples_per_label < 1:
            raise ValueError("examples_per_label must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        if not 1 <= self.max_labels_per_example <= self.num_labels:
            raise ValueError("max_labels_per_example must be in [1, num_labels]")


def generate_synthetic(spec: SyntheticSpec) -> EmbeddingDataset:
    """Deterministically generate a dataset from a SyntheticSpec.

    For every label, ``examples_per_label`` records are produced that are
    guaranteed to contain it; records may carry up to
    ``max_labels_per_example`` labels. Each record is its own group
    (group size 1); augmented copies only arise from external exporters.
    """
    rng = np.random.default_rng(spec.seed)
    protos = rng.standard_normal((spec.num_labels, spec.dim))
    protos /= np.linalg.norm(protos, axis=1, keepdims=True)

    all_labels = np.arange(spec.num_labels)
    records = []
    rid = 0
    for label in range(spec.num_labels):
        others = all_labels[all_labels != label]
        for _ in range(spec.examples_per_label):
            size = int(rng.integers(1, spec.max_labels_per_example + 1))
            subset = {label}
            if size > 1:
                subset.update(int(x) for x in rng.choice(others, size=size - 1, replace=False))
            noise = rng.standard_normal(spec.dim)
            vec = protos[sorted(subset)].sum(axis=0) + spec.noise_sigma * noise
            records.append(
                EmbeddingRecord(rid, rid, normalize(vec).astype(np.float32), frozenset(subset))
            )
            rid += 1

    vocab = tuple(f"label_{i}" for i in range(spec.num_labels))
    return EmbeddingDataset(dim=spec.dim, label_vocab=vocab, records=tuple(records))
