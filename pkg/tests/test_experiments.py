"""Experiment runners: determinism, augmentation policy, aggregation, outputs."""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from mwi import (
    EpisodeSpec,
    ExperimentConfig,
    SyntheticSpec,
    TrainConfig,
    run_ablation_grid,
    run_continual_experiment,
    run_fewshot,
    sweep_thresholds,
)
from mwi.experiments import (
    EPISODE_FIELDS,
    SUMMARY_FIELDS,
    read_csv_rows,
    write_ablation_csv,
    write_continual_outputs,
    write_fewshot_outputs,
    write_sweep_csv,
)


def small_config(**overrides) -> ExperimentConfig:
    defaults = dict(
        episode_spec=EpisodeSpec(n_way=3, n_shot=3, n_test=4, n_episodes=4, seed=0),
        train_config=TrainConfig(epochs=15, learning_rate=1e-2),
        synthetic=SyntheticSpec(dim=24, num_labels=6, examples_per_label=12,
                                noise_sigma=0.1, max_labels_per_example=2, seed=3),
    )
    defaults.update(overrides)
    return ExperimentConfig(**defaults)


class TestConfigValidation:
    def test_exactly_one_source(self):
        with pytest.raises(ValueError, match="exactly one"):
            ExperimentConfig(
                episode_spec=EpisodeSpec(n_way=2, n_shot=1, n_test=1, n_episodes=1),
                train_config=TrainConfig(),
            )
        with pytest.raises(ValueError, match="exactly one"):
            small_config(dataset_path="x.mwie")

    def test_bounds(self):
        with pytest.raises(ValueError):
            small_config(threshold=1.5)
        with pytest.raises(ValueError):
            small_config(aug_mode="mixup")
        with pytest.raises(ValueError):
            small_config(trivial_repeats=-1)
        with pytest.raises(ValueError):
            small_config(jobs=0)
        with pytest.raises(ValueError):
            small_config(head="linear")


@pytest.fixture(scope="module")
def run():
    return run_fewshot(small_config())


class TestFewshotRun:
    def test_summary_sizes(self, run):
        assert run.summary.n_episodes == 4
        assert set(run.summary.means) == set(SUMMARY_FIELDS)

    def test_episode_rows_in_range(self, run):
        for result in run.results:
            assert 0.0 <= result.report.overall_f1 <= 1.0
            assert 0.0 < result.best_threshold < 1.0

    def test_aggregate_equals_row_mean(self, run):
        f1s = [r.report.overall_f1 for r in run.results]
        assert abs(run.summary.means["overall_f1"] - sum(f1s) / len(f1s)) < 1e-12

    def test_multilabel_data_disables_topk(self, run):
        assert run.summary.means["top1_accuracy"] is None

    def test_single_label_data_enables_topk(self):
        cfg = small_config(
            synthetic=SyntheticSpec(dim=24, num_labels=6, examples_per_label=12,
                                    noise_sigma=0.05, max_labels_per_example=1, seed=4)
        )
        run = run_fewshot(cfg)
        assert run.summary.means["top1_accuracy"] is not None

    def test_jobs_do_not_change_results(self):
        a = run_fewshot(small_config(jobs=1))
        b = run_fewshot(small_config(jobs=3))
        for ra, rb in zip(a.results, b.results):
            assert ra.as_row() == rb.as_row()

    def test_epoch_zero_is_imprint_only(self):
        run = run_fewshot(small_config(train_config=TrainConfig(epochs=0)))
        assert all(r.losses == () for r in run.results)


class TestAugmentationPolicy:
    def test_trivial_repeats_change_nothing_measurable(self):
        base = run_fewshot(small_config())
        repeated = run_fewshot(small_config(trivial_repeats=10))
        for ra, rb in zip(base.results, repeated.results):
            assert abs(ra.report.overall_f1 - rb.report.overall_f1) < 1e-6
            assert abs(ra.best_f1 - rb.best_f1) < 1e-6

    def test_unaugmented_only_equals_all_copies_on_singleton_groups(self):
        # synthetic groups have size 1, so the two policies coincide exactly
        a = run_fewshot(small_config(aug_mode="use-all-group-copies"))
        b = run_fewshot(small_config(aug_mode="unaugmented-only"))
        for ra, rb in zip(a.results, b.results):
            assert ra.as_row() == rb.as_row()

    def test_unaugmented_only_drops_copies_on_grouped_data(self, tmp_path, grouped_dataset):
        from mwi import save_dataset
        from mwi.episodes import sample_episodes
        from mwi.experiments import _episode_train_blocks

        path = tmp_path / "grouped.mwie"
        save_dataset(grouped_dataset, path)
        spec = EpisodeSpec(n_way=3, n_shot=2, n_test=2, n_episodes=1, seed=0)
        episode = sample_episodes(grouped_dataset, spec)[0]
        all_copies = _episode_train_blocks(episode, "use-all-group-copies", 0)
        originals = _episode_train_blocks(episode, "unaugmented-only", 0)
        for full, kept in zip(all_copies, originals):
            assert len(full) == 6 and len(kept) == 2
            kept_ids = [r.record_id for r in kept]
            for gid in {r.group_id for r in full}:
                group_members = [r for r in full if r.group_id == gid]
                assert min(m.record_id for m in group_members) in kept_ids

    def test_trivial_repeats_multiply_rows(self):
        from mwi.episodes import sample_episodes
        from mwi.experiments import _episode_train_blocks, load_config_dataset

        cfg = small_config(trivial_repeats=3)
        ds = load_config_dataset(cfg)
        episode = sample_episodes(ds, cfg.episode_spec)[0]
        plain = _episode_train_blocks(episode, "use-all-group-copies", 0)
        repeated = _episode_train_blocks(episode, "use-all-group-copies", 3)
        for a, b in zip(plain, repeated):
            assert len(b) == 4 * len(a)


class TestOutputs:
    def test_fewshot_outputs_deterministic(self, tmp_path):
        run1 = run_fewshot(small_config())
        run2 = run_fewshot(small_config())
        d1 = write_fewshot_outputs(run1, tmp_path / "a")
        d2 = write_fewshot_outputs(run2, tmp_path / "b")
        for name in ("config.json", "episodes.csv", "summary.csv"):
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes(), name

    def test_episudes_csv_reparses_losslessly(self, tmp_path):
        run = run_fewshot(small_config())
        out = write_fewshot_outputs(run, tmp_path / "run")
        rows = read_csv_rows(out / "episodes.csv")
        header = (out / "episodes.csv").read_text().splitlines()[0]
        assert header == ",".join(EPISODE_FIELDS)
        for row, result in zip(rows, run.results):
            assert row["overall_f1"] == result.report.overall_f1
            assert row["best_threshold"] == result.best_threshold

    def test_summary_csv_matches_summary(self, tmp_path):
        run = run_fewshot(small_config())
        out = write_fewshot_outputs(run, tmp_path / "run")
        rows = {}
        for line in (out / "summary.csv").read_text().splitlines()[1:]:
            name, mean, stderr = line.split(",")
            rows[name] = (mean, stderr)
        for name in SUMMARY_FIELDS:
            mean_text, _ = rows[name]
            want = run.summary.means[name]
            assert mean_text == ("" if want is None else repr(want))

    def test_run_meta_keeps_timing_out_of_csv(self, tmp_path):
        import json

        run = run_fewshot(small_config())
        out = write_fewshot_outputs(run, tmp_path / "run")
        meta = json.loads((out / "run_meta.json").read_text())
        assert meta["wall_clock_seconds"] > 0
        assert meta["n_episodes"] == 4
        for name in ("episodes.csv", "summary.csv", "config.json"):
            assert "wall_clock" not in (out / name).read_text()


class TestAblation:
    def test_grid_cardinality_and_shared_episodes(self, tmp_path):
        # head axis includes softmax, which needs one-hot targets
        cfg = small_config(
            synthetic=SyntheticSpec(dim=24, num_labels=6, examples_per_label=12,
                                    noise_sigma=0.1, max_labels_per_example=1, seed=3)
        )
        cells = run_ablation_grid(
            cfg, {"epochs": [0, 15], "head": ["sigmoid", "softmax"]}
        )
        assert len(cells) == 4
        assert [c.settings for c in cells] == [
            {"epochs": 0, "head": "sigmoid"},
            {"epochs": 0, "head": "softmax"},
            {"epochs": 15, "head": "sigmoid"},
            {"epochs": 15, "head": "softmax"},
        ]
        path = tmp_path / "grid.csv"
        write_ablation_csv(cells, path)
        rows = read_csv_rows(path)
        assert len(rows) == 4

    def test_unknown_axis_rejected(self):
        with pytest.raises(ValueError, match="unknown ablation axis"):
            run_ablation_grid(small_config(), {"momentum": [0.9]})

    def test_training_direction_on_multilabel_data(self):
        cfg = small_config(
            episode_spec=EpisodeSpec(n_way=3, n_shot=3, n_test=4, n_episodes=6, seed=1),
            train_config=TrainConfig(epochs=40, learning_rate=1e-2),
            synthetic=SyntheticSpec(dim=32, num_labels=6, examples_per_label=14,
                                    noise_sigma=0.15, max_labels_per_example=2, seed=5),
        )
        cells = run_ablation_grid(cfg, {"epochs": [0, 40]})
        f1_untrained = cells[0].summary.means["overall_f1"]
        f1_trained = cells[1].summary.means["overall_f1"]
        assert f1_trained > f1_untrained


class TestContinualExperiment:
    def test_traces_and_aggregate(self, tmp_path):
        cfg = small_config(
            episode_spec=EpisodeSpec(n_way=3, n_shot=3, n_test=4, n_episodes=3, seed=0),
            synthetic=SyntheticSpec(dim=24, num_labels=6, examples_per_label=14,
                                    noise_sigma=0.05, max_labels_per_example=1, seed=6),
        )
        run = run_continual_experiment(cfg)
        assert len(run.traces) == 3
        assert all(len(t.steps) == 3 for t in run.traces)
        assert [row["step"] for row in run.aggregate] == [1, 2, 3]
        step1_f1 = [t.steps[0].fixed_f1 for t in run.traces]
        assert abs(run.aggregate[0]["fixed_f1"] - sum(step1_f1) / 3) < 1e-12

        out = write_continual_outputs(run, tmp_path / "cont")
        assert (out / "aggregate.csv").exists()
        assert sorted(p.name for p in out.glob("episode_*.csv")) == [
            "episode_000.csv", "episode_001.csv", "episode_002.csv",
        ]

    def test_deterministic_across_jobs(self):
        cfg = small_config(
            episode_spec=EpisodeSpec(n_way=3, n_shot=2, n_test=3, n_episodes=3, seed=0),
        )
        a = run_continual_experiment(replace(cfg, jobs=1))
        b = run_continual_experiment(replace(cfg, jobs=3))
        for ta, tb in zip(a.traces, b.traces):
            for sa, sb in zip(ta.steps, tb.steps):
                assert sa.as_row() == sb.as_row()


class TestThresholdSweep:
    def test_rows_cover_grid_and_best_is_argmax(self, tmp_path):
        cfg = small_config(grid_step=0.05)
        sweep = sweep_thresholds(cfg)
        assert len(sweep.rows) == 19
        best_by_scan = max(
            sweep.rows, key=lambda r: (r["mean_f1"], -r["threshold"])
        )
        assert sweep.best_threshold == best_by_scan["threshold"]
        assert sweep.best_mean_f1 == best_by_scan["mean_f1"]
        path = tmp_path / "sweep.csv"
        write_sweep_csv(sweep, path)
        rows = read_csv_rows(path)
        assert [r["threshold"] for r in rows] == [r["threshold"] for r in sweep.rows]
