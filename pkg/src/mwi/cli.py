"""Command-line interface.

Exit codes: 0 success, 2 configuration error (bad flag values, conflicting
sources), 3 data error (unreadable or malformed dataset, episode protocol
unsatisfiable on the given data).
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path
from typing import Optional

import click

from .classifier import HEADS, TrainConfig
from .episodes import EpisodeSpec
from .errors import (
    DatasetFormatError,
    InsufficientExamplesError,
    InsufficientLabelsError,
)
from .experiments import (
    AUG_MODES,
    SUMMARY_FIELDS,
    ExperimentConfig,
    read_csv_rows,
    run_ablation_grid,
    run_continual_experiment,
    run_fewshot,
    summarize_rows,
    sweep_thresholds,
    write_ablation_csv,
    write_continual_outputs,
    write_fewshot_outputs,
    write_sweep_csv,
    _write_csv,
)
from .store import (
    SyntheticSpec,
    dataset_to_debug_json,
    generate_synthetic,
    load_dataset,
    save_dataset,
)

_DATA_ERRORS = (
    DatasetFormatError,
    InsufficientLabelsError,
    InsufficientExamplesError,
    FileNotFoundError,
    IsADirectoryError,
)


def _guarded(fn):
    """Map library exceptions onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except _DATA_ERRORS as exc:
            click.echo(f"data error: {exc}", err=True)
            sys.exit(3)
        except ValueError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(2)

    return wrapper


@click.group()
def main():
    """Multilabel weight imprinting over frozen embeddings."""


_SYNTH_FLAG_NAMES = (
    "synth_dim",
    "synth_labels",
    "synth_examples",
    "synth_sigma",
    "synth_max_labels",
    "synth_seed",
)

_SYNTH_DEFAULTS = {
    "synth_dim": 64,
    "synth_labels": 10,
    "synth_examples": 30,
    "synth_sigma": 0.1,
    "synth_max_labels": 2,
    "synth_seed": 0,
}


def _dataset_options(fn):
    options = [
        click.option("--data", type=click.Path(path_type=Path), default=None,
                     help="Path to a .mwie embedding file."),
        click.option("--synth-dim", type=int, default=None,
                     help="Synthetic data: embedding dimension."),
        click.option("--synth-labels", type=int, default=None,
                     help="Synthetic data: vocabulary size."),
        click.option("--synth-examples", type=int, default=None,
                     help="Synthetic data: examples per label."),
        click.option("--synth-sigma", type=float, default=None,
                     help="Synthetic data: noise standard deviation."),
        click.option("--synth-max-labels", type=int, default=None,
                     help="Synthetic data: max labels per example."),
        click.option("--synth-seed", type=int, default=None,
                     help="Synthetic data: generator seed."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _episode_options(fn):
    options = [
        click.option("--ways", type=int, default=5, show_default=True,
                     help="Classes per episode."),
        click.option("--shots", type=int, default=5, show_default=True,
                     help="Train groups per class."),
        click.option("--test-per-class", type=int, default=15, show_default=True,
                     help="Test groups per class."),
        click.option("--episodes", type=int, default=100, show_default=True,
                     help="Episode count."),
        click.option("--seed", type=int, default=0, show_default=True,
                     help="Episode sampling seed."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _model_options(fn):
    options = [
        click.option("--epochs", type=int, default=60, show_default=True),
        click.option("--lr", type=float, default=1e-3, show_default=True),
        click.option("--head", type=click.Choice(HEADS), default="sigmoid",
                     show_default=True),
        click.option("--threshold", type=float, default=0.5, show_default=True),
        click.option("--grid-step", type=float, default=0.01, show_default=True,
                     help="Threshold sweep granularity."),
        click.option("--trivial-repeats", type=int, default=0, show_default=True,
                     help="Extra identical copies of each train row."),
        click.option("--aug-mode", type=click.Choice(AUG_MODES),
                     default="use-all-group-copies", show_default=True),
        click.option("--jobs", type=int, default=1, show_default=True,
                     help="Worker threads for episode evaluation."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _build_config(data: Optional[Path], ways, shots, test_per_class, episodes, seed,
                  epochs, lr, head, threshold, grid_step, trivial_repeats, aug_mode,
                  jobs, **synth_flags) -> ExperimentConfig:
    synth_given = {k: v for k, v in synth_flags.items() if v is not None}
    if data is not None and synth_given:
        raise ValueError(
            "--data conflicts with --synth-* flags; give exactly one dataset source"
        )
    if data is not None:
        dataset_path: Optional[str] = str(data)
        synthetic: Optional[SyntheticSpec] = None
    else:
        merged = {**_SYNTH_DEFAULTS, **synth_given}
        dataset_path = None
        synthetic = SyntheticSpec(
            dim=merged["synth_dim"],
            num_labels=merged["synth_labels"],
            examples_per_label=merged["synth_examples"],
            noise_sigma=merged["synth_sigma"],
            max_labels_per_example=merged["synth_max_labels"],
            seed=merged["synth_seed"],
        )
    return ExperimentConfig(
        episode_spec=EpisodeSpec(
            n_way=ways, n_shot=shots, n_test=test_per_class,
            n_episodes=episodes, seed=seed,
        ),
        train_config=TrainConfig(epochs=epochs, learning_rate=lr),
        dataset_path=dataset_path,
        synthetic=synthetic,
        head=head,
        threshold=threshold,
        grid_step=grid_step,
        aug_mode=aug_mode,
        trivial_repeats=trivial_repeats,
        jobs=jobs,
    )


def _echo_summary(means, stderrs) -> None:
    for name in SUMMARY_FIELDS:
        mean = means.get(name)
        if mean is None:
            click.echo(f"{name}: n/a")
        else:
            click.echo(f"{name}: {mean:.4f} ± {stderrs[name]:.4f}")


@main.command()
@click.option("--dim", type=int, default=64, show_default=True)
@click.option("--labels", "num_labels", type=int, default=10, show_default=True)
@click.option("--examples-per-label", type=int, default=30, show_default=True)
@click.option("--noise-sigma", type=float, default=0.1, show_default=True)
@click.option("--max-labels-per-example", type=int, default=2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@_guarded
def synth(dim, num_labels, examples_per_label, noise_sigma, max_labels_per_example,
          seed, out):
    """Generate a synthetic embedding dataset and write it as .mwie."""
    spec = SyntheticSpec(
        dim=dim,
        num_labels=num_labels,
        examples_per_label=examples_per_label,
        noise_sigma=noise_sigma,
        max_labels_per_example=max_labels_per_example,
        seed=seed,
    )
    dataset = generate_synthetic(spec)
    save_dataset(dataset, out)
    click.echo(
        f"wrote {out}: dim={dataset.dim} labels={len(dataset.label_vocab)} "
        f"records={len(dataset.records)}"
    )


@main.command()
@_dataset_options
@_episode_options
@_model_options
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Output directory for config.json, episodes.csv, summary.csv.")
@_guarded
def fewshot(data, ways, shots, test_per_class, episodes, seed, epochs, lr, head,
            threshold, grid_step, trivial_repeats, aug_mode, jobs, out, **synth_flags):
    """Run an n-way k-shot evaluation averaged over episodes."""
    config = _build_config(data, ways, shots, test_per_class, episodes, seed, epochs,
                           lr, head, threshold, grid_step, trivial_repeats, aug_mode,
                           jobs, **synth_flags)
    run = run_fewshot(config)
    _echo_summary(run.summary.means, run.summary.stderrs)
    if out is not None:
        write_fewshot_outputs(run, out)
        click.echo(f"outputs written to {out}")


@main.command()
@_dataset_options
@_episode_options
@_model_options
@click.option("--axis", "axes", multiple=True, required=True,
              help="Ablation axis as name=v1,v2,... "
                   "(epochs, head, aug_mode, trivial_repeats). Repeatable.")
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Path for the ablation CSV.")
@_guarded
def ablate(data, ways, shots, test_per_class, episodes, seed, epochs, lr, head,
           threshold, grid_step, trivial_repeats, aug_mode, jobs, axes, out,
           **synth_flags):
    """Run a Cartesian ablation grid with shared episode seeds."""
    config = _build_config(data, ways, shots, test_per_class, episodes, seed, epochs,
                           lr, head, threshold, grid_step, trivial_repeats, aug_mode,
                           jobs, **synth_flags)
    parsed: dict[str, list[object]] = {}
    for spec_text in axes:
        name, _, values = spec_text.partition("=")
        if not values:
            raise ValueError(f"--axis needs name=v1,v2,... not {spec_text!r}")
        parsed[name.strip()] = [v.strip() for v in values.split(",")]
    cells = run_ablation_grid(config, parsed)
    for cell in cells:
        setting = " ".join(f"{k}={v}" for k, v in cell.settings.items())
        f1 = cell.summary.means["overall_f1"]
        click.echo(f"{setting}: overall_f1={f1:.4f}")
    if out is not None:
        write_ablation_csv(cells, out)
        click.echo(f"ablation grid written to {out}")


@main.command()
@_dataset_options
@_episode_options
@_model_options
@click.option("--re-imprint", is_flag=True, default=False,
              help="Re-imprint existing columns each step instead of warm-starting.")
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Output directory for per-episode traces and aggregate.csv.")
@_guarded
def continual(data, ways, shots, test_per_class, episodes, seed, epochs, lr, head,
              threshold, grid_step, trivial_repeats, aug_mode, jobs, re_imprint, out,
              **synth_flags):
    """Add the episode's labels one at a time with experience replay."""
    config = _build_config(data, ways, shots, test_per_class, episodes, seed, epochs,
                           lr, head, threshold, grid_step, trivial_repeats, aug_mode,
                           jobs, **synth_flags)
    run = run_continual_experiment(config, re_imprint=re_imprint)
    for row in run.aggregate:
        click.echo(
            f"step {row['step']}: fixed_f1={row['fixed_f1']:.4f} "
            f"best_threshold={row['best_threshold']:.4f} best_f1={row['best_f1']:.4f}"
        )
    if out is not None:
        write_continual_outputs(run, out)
        click.echo(f"outputs written to {out}")


@main.command("sweep-threshold")
@_dataset_options
@_episode_options
@_model_options
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Path for the sweep CSV.")
@_guarded
def sweep_threshold(data, ways, shots, test_per_class, episodes, seed, epochs, lr,
                    head, threshold, grid_step, trivial_repeats, aug_mode, jobs, out,
                    **synth_flags):
    """Sweep the decision threshold over a grid and report mean F1."""
    config = _build_config(data, ways, shots, test_per_class, episodes, seed, epochs,
                           lr, head, threshold, grid_step, trivial_repeats, aug_mode,
                           jobs, **synth_flags)
    sweep = sweep_thresholds(config)
    click.echo(
        f"best threshold {sweep.best_threshold:.2f} with mean F1 {sweep.best_mean_f1:.4f}"
    )
    if out is not None:
        write_sweep_csv(sweep, out)
        click.echo(f"sweep written to {out}")


@main.command()
@click.argument("csv_path", type=click.Path(path_type=Path))
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Write the per-column summary as CSV instead of printing.")
@_guarded
def metrics(csv_path, out):
    """Summarize an emitted CSV: per-column mean and standard error."""
    rows = read_csv_rows(csv_path)
    if not rows:
        raise ValueError(f"{csv_path} has no data rows")
    fields = list(rows[0].keys())
    means, stderrs = summarize_rows(rows, fields)
    table = [
        {"metric": name, "mean": means[name], "stderr": stderrs[name]}
        for name in fields
    ]
    if out is not None:
        _write_csv(out, ("metric", "mean", "stderr"), table)
        click.echo(f"summary written to {out}")
    else:
        _echo_summary_fields(fields, means, stderrs)


def _echo_summary_fields(fields, means, stderrs) -> None:
    for name in fields:
        mean = means.get(name)
        if mean is None:
            click.echo(f"{name}: n/a")
        else:
            click.echo(f"{name}: {mean:.6g} ± {stderrs[name]:.6g}")


@main.command("export-json")
@click.argument("mwie_path", type=click.Path(path_type=Path))
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Destination JSON file (default: stdout).")
@_guarded
def export_json(mwie_path, out):
    """Dump a .mwie file as human-readable JSON."""
    dataset = load_dataset(mwie_path)
    payload = dataset_to_debug_json(dataset)
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out is not None:
        Path(out).write_text(text + "\n")
        click.echo(f"wrote {out}")
    else:
        click.echo(text)


@main.command()
@click.argument("mwie_path", type=click.Path(path_type=Path))
@_guarded
def validate(mwie_path):
    """Check that a .mwie file parses and its vectors are unit-length."""
    dataset = load_dataset(mwie_path)
    norm_error = dataset.max_vector_norm_error()
    click.echo(
        f"{mwie_path}: ok dim={dataset.dim} labels={len(dataset.label_vocab)} "
        f"records={len(dataset.records)} max_norm_error={norm_error:.3e}"
    )
    if norm_error > 1e-5:
        click.echo("warning: vectors deviate from unit norm by more than 1e-5", err=True)


if __name__ == "__main__":
    main()
