"""Multilabel weight imprinting over frozen, L2-normalized embeddings.

A linear classifier whose columns are initialized by imprinting (the
normalized mean embedding of each class), scored with per-class sigmoids
and a global decision threshold so an input may carry zero, one, or many
labels. Includes episodic few-shot evaluation, experience-replay continual
learning, a multilabel metrics suite, and a binary embedding file format.
"""

from .classifier import (
    CLASSIFIER_MAGIC,
    HEADS,
    ImprintClassifier,
    TrainConfig,
    build_targets,
    imprint_init,
    load_classifier,
    save_classifier,
    train,
    train_matrix,
)
from .continual import (
    ContinualStep,
    ContinualTrace,
    ReplayBuffer,
    run_continual,
    write_trace_csv,
)
from .episodes import (
    Episode,
    EpisodeSpec,
    episode_target_matrix,
    iter_episodes,
    mix_seed,
    sample_episodes,
    target_matrix,
)
from .errors import (
    BadMagicError,
    DatasetFormatError,
    DegenerateClassError,
    DegenerateVectorError,
    DimensionMismatchError,
    DuplicateClassError,
    EmptyTrainingSetError,
    InsufficientExamplesError,
    InsufficientLabelsError,
    LabelIndexError,
    SoftmaxTargetError,
    TruncatedFileError,
    UnsupportedVersionError,
)
from .experiments import (
    AUG_MODES,
    AblationCell,
    ContinualRun,
    EpisodeResult,
    ExperimentConfig,
    FewshotRun,
    RunSummary,
    ThresholdSweep,
    read_csv_rows,
    run_ablation_grid,
    run_continual_experiment,
    run_episode,
    run_fewshot,
    sweep_thresholds,
    write_ablation_csv,
    write_continual_outputs,
    write_fewshot_outputs,
    write_sweep_csv,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .metrics import (
    METRIC_NAMES,
    EvalBatch,
    MetricsReport,
    average_precision,
    best_threshold,
    compute_all,
    default_threshold_grid,
    micro_f1,
)
from .store import (
    MAGIC,
    EmbeddingDataset,
    EmbeddingRecord,
    SyntheticSpec,
    generate_synthetic,
    load_dataset,
    normalize,
    save_dataset,
    stack_vectors,
)

__version__ = "0.1.0"

__all__ = [
    "AUG_MODES",
    "AblationCell",
    "BadMagicError",
    "CLASSIFIER_MAGIC",
    "ContinualRun",
    "ContinualStep",
    "ContinualTrace",
    "DatasetFormatError",
    "DegenerateClassError",
    "DegenerateVectorError",
    "DimensionMismatchError",
    "DuplicateClassError",
    "EmbeddingDataset",
    "EmbeddingRecord",
    "EmptyTrainingSetError",
    "Episode",
    "EpisodeResult",
    "EpisodeSpec",
    "EvalBatch",
    "ExperimentConfig",
    "FewshotRun",
    "HEADS",
    "ImprintClassifier",
    "InsufficientExamplesError",
    "InsufficientLabelsError",
    "KERNEL_BACKEND",
    "LabelIndexError",
    "MAGIC",
    "METRIC_NAMES",
    "MetricsReport",
    "ReplayBuffer",
    "RunSummary",
    "SoftmaxTargetError",
    "SyntheticSpec",
    "ThresholdSweep",
    "TrainConfig",
    "TruncatedFileError",
    "UnsupportedVersionError",
    "average_precision",
    "best_threshold",
    "build_targets",
    "compute_all",
    "default_threshold_grid",
    "episode_target_matrix",
    "generate_synthetic",
    "imprint_init",
    "iter_episodes",
    "load_classifier",
    "load_dataset",
    "micro_f1",
    "mix_seed",
    "normalize",
    "read_csv_rows",
    "run_ablation_grid",
    "run_continual",
    "run_continual_experiment",
    "run_episode",
    "run_fewshot",
    "sample_episodes",
    "save_classifier",
    "save_dataset",
    "stack_vectors",
    "sweep_thresholds",
    "target_matrix",
    "train",
    "train_matrix",
    "write_ablation_csv",
    "write_continual_outputs",
    "write_fewshot_outputs",
    "write_sweep_csv",
    "write_trace_csv",
]
