"""Imprinting, prediction, training wrappers, and .mwic persistence."""

from __future__ import annotations

import struct

import numpy as np
import pytest

from mwi import (
    BadMagicError,
    DegenerateClassError,
    DimensionMismatchError,
    DuplicateClassError,
    EmptyTrainingSetError,
    ImprintClassifier,
    SoftmaxTargetError,
    TrainConfig,
    TruncatedFileError,
    UnsupportedVersionError,
    build_targets,
    imprint_init,
    load_classifier,
    normalize,
    save_classifier,
    train,
    train_matrix,
)


@pytest.fixture
def basis_classifier(record_factory):
    """Two classes imprinted from exact unit basis vectors."""
    a = [record_factory([1.0, 0.0, 0.0, 0.0], labels=[0])]
    b = [record_factory([0.0, 1.0, 0.0, 0.0], labels=[1])]
    return imprint_init({"a": a, "b": b})


class TestImprinting:
    def test_single_unit_vector_is_exact(self, record_factory):
        clf = imprint_init({"a": [record_factory([0.0, 1.0, 0.0])]})
        np.testing.assert_array_equal(clf.weights[:, 0], [0.0, 1.0, 0.0])

    def test_column_is_normalized_mean(self, record_factory, rng):
        vecs = rng.standard_normal((5, 8)).astype(np.float32)
        records = [record_factory(v) for v in vecs]
        clf = imprint_init({"c": records})
        expected = normalize(vecs.astype(np.float64).mean(axis=0))
        np.testing.assert_allclose(clf.weights[:, 0], expected, atol=1e-12)

    def test_columns_follow_mapping_order(self, basis_classifier):
        assert basis_classifier.class_names == ["a", "b"]
        np.testing.assert_array_equal(basis_classifier.weights[:, 1], [0.0, 1.0, 0.0, 0.0])

    def test_unit_column_norms(self, record_factory, rng):
        records = {f"c{i}": [record_factory(v) for v in rng.standard_normal((3, 6))]
                   for i in range(4)}
        clf = imprint_init(records)
        np.testing.assert_allclose(clf.column_norms(), 1.0, atol=1e-12)

    def test_zero_mean_rejected(self, record_factory):
        records = [record_factory([1.0, 0.0]), record_factory([-1.0, 0.0])]
        with pytest.raises(DegenerateClassError):
            imprint_init({"c": records})

    def test_empty_class_rejected(self, record_factory):
        with pytest.raises(DegenerateClassError):
            imprint_init({"a": [record_factory([1.0, 0.0])], "b": []})

    def test_no_classes_rejected(self):
        with pytest.raises(DegenerateClassError):
            imprint_init({})

    def test_mixed_dims_rejected(self, record_factory):
        with pytest.raises(DimensionMismatchError):
            imprint_init({
                "a": [record_factory([1.0, 0.0])],
                "b": [record_factory([1.0, 0.0, 0.0])],
            })


class TestAddClass:
    def test_prior_columns_bitwise_unchanged(self, basis_classifier, record_factory, rng):
        before = basis_classifier.weights.copy()
        basis_classifier.add_class("c", [record_factory(rng.standard_normal(4))])
        assert basis_classifier.num_classes == 3
        assert basis_classifier.weights[:, :2].tobytes() == before.tobytes()

    def test_duplicate_name_rejected(self, basis_classifier, record_factory):
        with pytest.raises(DuplicateClassError):
            basis_classifier.add_class("a", [record_factory([1.0, 0.0, 0.0, 0.0])])

    def test_dim_mismatch_rejected(self, basis_classifier, record_factory):
        with pytest.raises(DimensionMismatchError):
            basis_classifier.add_class("c", [record_factory([1.0, 0.0])])

    def test_empty_records_rejected(self, basis_classifier):
        with pytest.raises(DegenerateClassError):
            basis_classifier.add_class("c", [])

    def test_reimprint_changes_only_target_column(self, basis_classifier, record_factory):
        before = basis_classifier.weights.copy()
        basis_classifier.reimprint_class("b", [record_factory([0.0, 0.0, 1.0, 0.0])])
        assert basis_classifier.weights[:, 0].tobytes() == before[:, 0].tobytes()
        np.testing.assert_array_equal(basis_classifier.weights[:, 1], [0.0, 0.0, 1.0, 0.0])


class TestScoring:
    def test_logits_are_cosines(self, basis_classifier):
        v = normalize([1.0, 1.0, 0.0, 0.0])
        logits = basis_classifier.logits(v)
        np.testing.assert_allclose(logits, [np.sqrt(0.5), np.sqrt(0.5)], atol=1e-12)

    def test_sigmoid_scores(self, basis_classifier):
        s = basis_classifier.scores([1.0, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(s, [0.7310585786300049, 0.5], atol=1e-15)

    def test_scores_batch_matches_scores(self, basis_classifier, rng):
        x = rng.standard_normal((6, 4))
        batch = basis_classifier.scores_batch(x)
        for i in range(6):
            np.testing.assert_allclose(batch[i], basis_classifier.scores(x[i]), atol=1e-15)

    def test_dim_checks(self, basis_classifier):
        with pytest.raises(DimensionMismatchError):
            basis_classifier.logits([1.0, 0.0])
        with pytest.raises(DimensionMismatchError):
            basis_classifier.scores_batch(np.zeros((2, 3)))

    def test_sigmoid_predict_sets(self, basis_classifier):
        # both cosines positive -> both above the 0.5 sigmoid midpoint
        assert basis_classifier.predict(normalize([1.0, 1.0, 0.0, 0.0])) == {0, 1}
        # both cosines negative -> empty prediction, the zero-label case
        assert basis_classifier.predict([-1.0, -1.0, 0.0, 0.0]) == frozenset()
        assert basis_classifier.predict([1.0, -1.0, 0.0, 0.0]) == {0}

    def test_softmax_predict_argmax_lowest_tie(self, record_factory):
        clf = imprint_init(
            {
                "a": [record_factory([1.0, 0.0, 0.0])],
                "b": [record_factory([0.0, 1.0, 0.0])],
            },
            head="softmax",
        )
        assert clf.predict([0.0, 1.0, 0.0]) == {1}
        # exactly equal logits tie toward the lowest class index
        assert clf.predict(normalize([1.0, 1.0, 0.0])) == {0}

    def test_predict_batch_sigmoid(self, basis_classifier):
        x = np.array([[1.0, -1.0, 0.0, 0.0], [-1.0, -1.0, 0.0, 0.0]])
        out = basis_classifier.predict_batch(x)
        np.testing.assert_array_equal(out, [[1, 0], [0, 0]])

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            ImprintClassifier(dim=2, class_names=["a"], weights=np.ones((2, 1)), threshold=0.0)
        with pytest.raises(ValueError):
            ImprintClassifier(dim=2, class_names=["a"], weights=np.ones((2, 1)), threshold=1.0)


class TestTargets:
    def test_build_targets_restricts_to_universe(self, record_factory):
        recs = [
            record_factory([1.0, 0.0], labels=[0, 2]),
            record_factory([0.0, 1.0], labels=[1]),
        ]
        y = build_targets(recs, class_labels=[2, 1])
        np.testing.assert_array_equal(y, [[1.0, 0.0], [0.0, 1.0]])


class TestTraining:
    def test_loss_trace_length(self, basis_classifier, record_factory):
        recs = [
            record_factory([1.0, 0.0, 0.0, 0.0], labels=[0]),
            record_factory([0.0, 1.0, 0.0, 0.0], labels=[1]),
        ]
        losses = train(basis_classifier, recs, [0, 1], TrainConfig(epochs=7))
        assert losses.shape == (7,)

    def test_zero_epochs_no_op(self, basis_classifier, record_factory):
        before = basis_classifier.weights.copy()
        recs = [record_factory([1.0, 0.0, 0.0, 0.0], labels=[0])]
        losses = train(basis_classifier, recs, [0, 1], TrainConfig(epochs=0))
        assert losses.shape == (0,)
        assert basis_classifier.weights.tobytes() == before.tobytes()

    def test_empty_training_set(self, basis_classifier):
        with pytest.raises(EmptyTrainingSetError):
            train(basis_classifier, [], [0, 1], TrainConfig())

    def test_class_labels_width_checked(self, basis_classifier, record_factory):
        recs = [record_factory([1.0, 0.0, 0.0, 0.0], labels=[0])]
        with pytest.raises(ValueError, match="class labels"):
            train(basis_classifier, recs, [0], TrainConfig())

    def test_softmax_rejects_multilabel_rows(self, record_factory):
        clf = imprint_init(
            {
                "a": [record_factory([1.0, 0.0])],
                "b": [record_factory([0.0, 1.0])],
            },
            head="softmax",
        )
        recs = [record_factory([1.0, 0.0], labels=[0, 1])]
        with pytest.raises(SoftmaxTargetError):
            train(clf, recs, [0, 1], TrainConfig(epochs=1))

    def test_training_keeps_columns_unit(self, basis_classifier, record_factory, rng):
        recs = [
            record_factory(normalize(rng.standard_normal(4)), labels=[i % 2])
            for i in range(10)
        ]
        train(basis_classifier, recs, [0, 1], TrainConfig(epochs=20, learning_rate=1e-2))
        np.testing.assert_allclose(basis_classifier.column_norms(), 1.0, atol=1e-12)

    def test_training_separates_classes(self, record_factory, rng):
        # two noisy clusters; after training every cross score drops below 0.5
        protos = np.eye(2, 8)
        recs = []
        for i in range(30):
            lbl = i % 2
            recs.append(
                record_factory(
                    normalize(protos[lbl] + 0.1 * rng.standard_normal(8)), labels=[lbl]
                )
            )
        clf = imprint_init(
            {"a": [r for r in recs if 0 in r.labels], "b": [r for r in recs if 1 in r.labels]}
        )
        train(clf, recs, [0, 1], TrainConfig(epochs=100, learning_rate=1e-2))
        x = np.stack([r.vector for r in recs]).astype(np.float64)
        scores = clf.scores_batch(x)
        truth = build_targets(recs, [0, 1])
        assert np.all((scores >= 0.5) == truth)

    def test_train_matrix_shape_check(self, basis_classifier):
        with pytest.raises(ValueError, match="target shape"):
            train_matrix(basis_classifier, np.zeros((3, 4)), np.zeros((3, 3)), TrainConfig())


class TestPersistence:
    @pytest.fixture
    def trained(self, record_factory, rng):
        records = {f"class_{i}": [record_factory(v) for v in rng.standard_normal((4, 6))]
                   for i in range(3)}
        clf = imprint_init(records, head="sigmoid", threshold=0.35)
        return clf

    def test_roundtrip_bitwise(self, trained, tmp_path):
        path = tmp_path / "clf.mwic"
        save_classifier(trained, path)
        loaded = load_classifier(path)
        assert loaded.dim == trained.dim
        assert loaded.class_names == trained.class_names
        assert loaded.head == trained.head
        assert loaded.threshold == trained.threshold
        assert loaded.weights.tobytes() == trained.weights.tobytes()

    def test_softmax_head_roundtrip(self, record_factory, tmp_path):
        clf = imprint_init({"a": [record_factory([1.0, 0.0])]}, head="softmax", threshold=0.6)
        path = tmp_path / "clf.mwic"
        save_classifier(clf, path)
        assert load_classifier(path).head == "softmax"

    def test_bad_magic(self, trained, tmp_path):
        path = tmp_path / "clf.mwic"
        save_classifier(trained, path)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"WRNG"
        path.write_bytes(raw)
        with pytest.raises(BadMagicError):
            load_classifier(path)

    def test_unsupported_version(self, trained, tmp_path):
        path = tmp_path / "clf.mwic"
        save_classifier(trained, path)
        raw = bytearray(path.read_bytes())
        raw[4:6] = struct.pack("<H", 9)
        path.write_bytes(raw)
        with pytest.raises(UnsupportedVersionError):
            load_classifier(path)

    def test_truncation(self, trained, tmp_path):
        path = tmp_path / "clf.mwic"
        save_classifier(trained, path)
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) - 5])
        with pytest.raises(TruncatedFileError):
            load_classifier(path)

    def test_trailing_data(self, trained, tmp_path):
        path = tmp_path / "clf.mwic"
        save_classifier(trained, path)
        path.write_bytes(path.read_bytes() + b"xx")
        with pytest.raises(TruncatedFileError):
            load_classifier(path)
