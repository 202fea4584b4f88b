"""
Tests for the optimizer, metrics, checkpoints and the training service.

Training runs use the toy network from the gradient-check suite so
that a full epoch takes well under a second.
"""

import sys
from pathlib import Path

import numpy as np
import numpy.testing as npt
import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.data import generate, make_batch
from src.exceptions import ConfigurationError, FeatureFormatError, InputError
from src.gradcheck import toy_model_config
from src.models import SynthConfig, TrainConfig, desk_model_config
from src.services import EvaluationService, RunStatus, TrainingService
from src.tensor import ParamStore
from src.training import (
    Adam, AdamState, Checkpoint, FusionModel, adam_step, confusion_matrix, decode_checkpoint,
    encode_checkpoint, evaluate_scores, load_checkpoint, report_from_counts, save_checkpoint,
)

TOY = toy_model_config(num_classes=2)


def toy_corpus(seed: int = 0, per_class: int = 12, rho: float = 0.2):
    cfg = SynthConfig(classes=2, samples_per_class=per_class, rho=rho, sigma=0.5, seed=seed)
    return generate(cfg, audio_shape=(TOY.audio.input_size,) * 2,
                    text_shape=(TOY.text.seq_len, TOY.text.input_size))


class TestAdam:

    def setup_method(self):
        self.params = ParamStore()
        self.w = self.params.add("w", np.array([1.0, -2.0, 0.5]))
        self.cfg = TrainConfig(learning_rate=0.01)

    def test_first_step_moves_by_learning_rate(self):
        adam_step(self.params, {"w": np.array([0.3, -4.0, 1e3])}, AdamState.zeros_like(self.params), self.cfg)
        npt.assert_allclose(self.w.data, [0.99, -1.99, 0.49], atol=1e-6)

    def test_matches_reference_recursion(self):
        grads = [np.array([0.1, -0.2, 0.3]), np.array([0.4, 0.1, -0.5]), np.array([-0.2, 0.2, 0.2])]
        p, m, v = self.w.data.copy(), np.zeros(3), np.zeros(3)
        optimizer = Adam(self.params, self.cfg)
        for t, g in enumerate(grads, start=1):
            m = 0.9 * m + 0.1 * g
            v = 0.999 * v + 0.001 * g * g
            p = p - 0.01 * (m / (1 - 0.9 ** t)) / (np.sqrt(v / (1 - 0.999 ** t)) + 1e-8)
            optimizer.step({"w": g})
        npt.assert_allclose(self.w.data, p, rtol=1e-12)
        assert optimizer.state.step == 3

    def test_constant_gradient_steps_by_learning_rate(self):
        optimizer = Adam(self.params, self.cfg)
        g = np.array([0.5, -0.02, 3.0])
        for _ in range(50):
            before = self.w.data.copy()
            optimizer.step({"w": g})
        npt.assert_allclose(before - self.w.data, 0.01 * np.sign(g), rtol=1e-5)

    def test_zero_gradient_leaves_parameter(self):
        before = self.w.data.copy()
        adam_step(self.params, {"w": np.zeros(3)}, AdamState.zeros_like(self.params), self.cfg)
        npt.assert_array_equal(self.w.data, before)


class TestMetrics:
    """Hand-computable WA/UA examples."""

    def test_two_class_example(self):
        counts = confusion_matrix([0, 0, 1, 1], [0, 1, 1, 1], 2)
        npt.assert_array_equal(counts, [[1, 1], [0, 2]])
        report = report_from_counts(counts)
        assert report["wa"] == 0.75
        assert report["ua"] == 0.75

    def test_majority_predictor(self):
        report = report_from_counts(confusion_matrix([0, 0, 0, 1], [0, 0, 0, 0], 2))
        assert report["wa"] == 0.75
        assert report["ua"] == 0.5

    def test_rates_rows_sum_to_one(self):
        rng = np.random.default_rng(0)
        counts = confusion_matrix(rng.integers(0, 4, 200), rng.integers(0, 4, 200), 4)
        rates = np.asarray(report_from_counts(counts)["confusion_rates"])
        npt.assert_allclose(rates.sum(axis=1), 1.0, atol=1e-9)

    def test_class_without_support_is_skipped(self):
        report = report_from_counts(confusion_matrix([0, 0, 1], [0, 1, 1], 3))
        assert report["ua"] == pytest.approx(0.75)
        assert np.isnan(report["per_class_recall"][2])

    def test_segments_are_pooled_per_utterance(self):
        s = np.array([[2.0, 0.0], [0.0, 1.0], [0.0, 3.0]])
        report = evaluate_scores([0, 0, 1], s, s, s, ["u1", "u1", "u2"], 2)
        assert report.n_samples == 3
        assert report.n_utterances == 2
        assert report.wa == 1.0
        assert report.segment_wa == pytest.approx(2 / 3)

    def test_modality_agreement(self):
        s = np.zeros((2, 2))
        s_a = np.array([[1.0, 0.0], [1.0, 0.0]])
        s_t = np.array([[1.0, 0.0], [0.0, 1.0]])
        report = evaluate_scores([0, 1], s, s_a, s_t, ["a", "b"], 2)
        assert report.modality_agreement == 0.5
        assert report.audio_only_wa == 0.5
        assert report.text_only_wa == 1.0

    def test_empty_set_rejected(self):
        with pytest.raises(InputError):
            evaluate_scores([], np.zeros((0, 2)), np.zeros((0, 2)), np.zeros((0, 2)), [], 2)


class TestFusionModel:

    def setup_method(self):
        self.corpus = toy_corpus()

    def test_initialization_is_seeded_per_component(self):
        with_disc = FusionModel.initialize(TOY, seed=3)
        without = FusionModel.initialize(TOY, seed=3, use_discriminator=False)
        for name in without.params:
            npt.assert_array_equal(with_disc.params[name].data, without.params[name].data)
        assert "discriminator.W1" in with_disc.params
        assert "discriminator.W1" not in without.params

    def test_single_label_batch_has_no_regularizer(self):
        model = FusionModel.initialize(TOY, seed=0, dtype=np.float64)
        same = np.flatnonzero(self.corpus.labels == 0)[:4]
        terms = model.batch_loss(self.corpus, make_batch(self.corpus.labels, same), alpha=0.5)
        assert terms.l2 is None
        assert terms.total.item() == pytest.approx(0.5 * terms.l1.item())

    def test_predict_scores_shapes(self):
        model = FusionModel.initialize(TOY, seed=0)
        scores = model.predict_scores(self.corpus, batch_size=5)
        assert scores.s.shape == (len(self.corpus), 2)
        npt.assert_allclose(scores.s, scores.s_a + scores.s_t, atol=1e-5)


class TestCheckpoint:

    def setup_method(self):
        self.model = FusionModel.initialize(TOY, seed=1)
        self.checkpoint = Checkpoint.from_model(self.model, TrainConfig(epochs=2), epoch=2,
                                                rng=np.random.default_rng(0))

    def test_round_trip(self, tmp_path):
        path = save_checkpoint(tmp_path / "model.cfck", self.checkpoint)
        loaded = load_checkpoint(path)
        assert loaded.epoch == 2
        assert loaded.model_config == TOY
        assert loaded.train_config == self.checkpoint.train_config
        assert loaded.rng_digest == self.checkpoint.rng_digest
        for name, array in self.checkpoint.params.items():
            npt.assert_array_equal(loaded.params[name], array)

    def test_reencode_is_byte_identical(self):
        data = encode_checkpoint(self.checkpoint)
        assert encode_checkpoint(decode_checkpoint(data)) == data

    def test_evaluation_identical_after_reload(self, tmp_path):
        corpus = toy_corpus(seed=4)
        service = EvaluationService()
        before = service.evaluate_model(self.model, corpus)
        after = service.evaluate(load_checkpoint(save_checkpoint(tmp_path / "m.cfck", self.checkpoint)), corpus)
        assert (before.wa, before.ua, before.modality_agreement) == (after.wa, after.ua, after.modality_agreement)
        assert before.confusion_counts == after.confusion_counts

    def test_truncated_checkpoint(self):
        data = encode_checkpoint(self.checkpoint)
        with pytest.raises(FeatureFormatError):
            decode_checkpoint(data[:-3])

    def test_bad_magic(self):
        data = encode_checkpoint(self.checkpoint)
        with pytest.raises(FeatureFormatError):
            decode_checkpoint(b"NOPE" + data[4:])

    def test_bad_version(self):
        data = bytearray(encode_checkpoint(self.checkpoint))
        data[4] = 9
        with pytest.raises(FeatureFormatError):
            decode_checkpoint(bytes(data))


class TestTrainingService:

    def setup_method(self):
        corpus = toy_corpus(per_class=16)
        self.train_set = corpus.subset(np.arange(0, len(corpus), 2))
        self.validation_set = corpus.subset(np.arange(1, len(corpus), 2))
        self.service = TrainingService(TOY)

    def _cfg(self, **overrides) -> TrainConfig:
        settings = {"epochs": 3, "batch_size": 8, "learning_rate": 0.01, "alpha": 0.1, "seed": 5}
        settings.update(overrides)
        return TrainConfig(**settings)

    def test_curve_has_one_row_per_epoch(self):
        result = self.service.train(self.train_set, self.validation_set, self._cfg())
        assert result.success
        assert [r.epoch for r in result.curve] == [1, 2, 3]
        assert all(np.isfinite(r.loss) and np.isfinite(r.l2) for r in result.curve)
        assert 1 <= result.best_epoch <= 3

    def test_best_epoch_has_highest_validation_ua(self):
        result = self.service.train(self.train_set, self.validation_set, self._cfg(epochs=4))
        best_ua = max(r.val_ua for r in result.curve)
        first_best = next(r.epoch for r in result.curve if r.val_ua == best_ua)
        assert result.best_epoch == first_best
        assert result.best_val_ua == best_ua

    def test_same_seed_same_curve(self):
        a = self.service.train(self.train_set, self.validation_set, self._cfg())
        b = self.service.train(self.train_set, self.validation_set, self._cfg())
        assert [r.loss for r in a.curve] == [r.loss for r in b.curve]
        for name, array in a.checkpoint.params.items():
            npt.assert_array_equal(b.checkpoint.params[name], array)

    def test_alpha_zero_matches_baseline_exactly(self):
        with_disc = self.service.train(self.train_set, self.validation_set,
                                       self._cfg(alpha=0.0, use_discriminator=True))
        baseline = self.service.train(self.train_set, self.validation_set,
                                      self._cfg(alpha=0.0, use_discriminator=False))
        assert [r.loss for r in with_disc.curve] == [r.loss for r in baseline.curve]
        assert [r.l1 for r in with_disc.curve] == [r.l1 for r in baseline.curve]
        assert [r.val_ua for r in with_disc.curve] == [r.val_ua for r in baseline.curve]
        assert all(np.isnan(r.l2) for r in baseline.curve)

    def test_alpha_zero_leaves_discriminator_untouched(self):
        initial = FusionModel.initialize(TOY, seed=5)
        result = self.service.train(self.train_set, None, self._cfg(alpha=0.0))
        for name in initial.params.with_prefix("discriminator"):
            npt.assert_array_equal(result.checkpoint.params[name], initial.params[name].data)

    def test_without_validation_last_epoch_is_kept(self):
        result = self.service.train(self.train_set, None, self._cfg())
        assert result.best_epoch == 3
        assert np.isnan(result.best_val_ua)

    def test_class_count_mismatch(self):
        with pytest.raises(ConfigurationError):
            TrainingService(toy_model_config(num_classes=3)).train(self.train_set, None, self._cfg())

    def test_run_reports_failure(self):
        single = self.train_set.subset(np.flatnonzero(self.train_set.labels == 0))
        result = self.service.run(single, None, self._cfg())
        assert result.status == RunStatus.FAILED
        assert not result.success
        assert result.error

    def test_baseline_config_requires_alpha_zero(self):
        with pytest.raises(ValueError):
            TrainConfig(alpha=0.1, use_discriminator=False)

    def test_separable_corpus_halves_loss(self):
        network = desk_model_config(num_classes=2)
        cfg = SynthConfig(classes=2, samples_per_class=24, rho=0.0, sigma=0.1, seed=2)
        corpus = generate(cfg, audio_shape=(network.audio.input_size,) * 2,
                          text_shape=(network.text.seq_len, network.text.input_size))
        result = TrainingService(network).train(corpus, None, self._cfg(epochs=20, learning_rate=0.01, seed=0))
        assert result.success
        assert result.curve[-1].loss < 0.5 * result.curve[0].loss
