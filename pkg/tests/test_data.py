"""
Tests for the synthetic generator, corpora, batching and fold planning.
"""

import sys
from pathlib import Path

import numpy as np
import numpy.testing as npt
import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.data import (
    Corpus, WordEmbeddingSequence, BatchSampler, format_sample_id, generate, make_batch, make_folds,
    parse_sample_id, sample_batch,
)
from src.exceptions import ConfigurationError, DimensionError, InputError, RangeError
from src.models import SynthConfig

TOY_AUDIO = (4, 4)
TOY_TEXT = (6, 3)


def toy_corpus(**overrides) -> Corpus:
    settings = {"classes": 4, "samples_per_class": 50, "rho": 0.3, "sigma": 0.5, "seed": 0,
                "min_text_length": 2}
    settings.update(overrides)
    return generate(SynthConfig(**settings), audio_shape=TOY_AUDIO, text_shape=TOY_TEXT)


class TestSynth:
    """Generator determinism, conflict injection and text lengths."""

    def test_same_seed_same_corpus(self):
        a, b = toy_corpus(seed=7), toy_corpus(seed=7)
        npt.assert_array_equal(a.audio, b.audio)
        npt.assert_array_equal(a.text, b.text)
        npt.assert_array_equal(a.conflict_flags, b.conflict_flags)

    def test_different_seed_differs(self):
        assert not np.array_equal(toy_corpus(seed=1).audio, toy_corpus(seed=2).audio)

    def test_rho_zero_has_no_conflicts(self):
        assert toy_corpus(rho=0.0).conflict_flags.sum() == 0

    def test_rho_one_conflicts_everything(self):
        assert toy_corpus(rho=1.0).conflict_flags.all()

    def test_conflict_rate_near_rho(self):
        corpus = toy_corpus(samples_per_class=400)
        rate = corpus.conflict_flags.mean()
        # binomial sd at n=1600 is about 0.0115
        assert abs(rate - 0.3) < 0.05

    def test_labels_and_ids(self):
        corpus = toy_corpus(samples_per_class=3)
        npt.assert_array_equal(corpus.class_counts(), [3, 3, 3, 3])
        assert corpus.utterance_ids[:2] == ["synth_00000", "synth_00001"]

    def test_noise_free_conflicted_text_comes_from_another_class(self):
        corpus = toy_corpus(sigma=0.0, rho=0.5, samples_per_class=20)
        for c in range(4):
            own = corpus.text[(corpus.labels == c) & ~corpus.conflict_flags]
            borrowed = corpus.text[(corpus.labels == c) & corpus.conflict_flags]
            assert own.shape[0] > 0 and borrowed.shape[0] > 0
            npt.assert_array_equal(own, own[:1].repeat(own.shape[0], axis=0))
            assert not any(np.array_equal(b, own[0]) for b in borrowed)

    def test_audio_stays_truthful(self):
        corpus = toy_corpus(sigma=0.0, rho=1.0, samples_per_class=5)
        for c in range(4):
            audio = corpus.audio[corpus.labels == c]
            npt.assert_array_equal(audio, audio[:1].repeat(audio.shape[0], axis=0))

    def test_rows_past_length_are_zero(self):
        corpus = toy_corpus()
        for text, length in zip(corpus.text, corpus.lengths):
            assert 2 <= length <= TOY_TEXT[0]
            assert not text[length:].any()

    def test_class_count_override(self):
        corpus = toy_corpus(class_counts=[1, 2, 3, 4])
        npt.assert_array_equal(corpus.class_counts(), [1, 2, 3, 4])

    def test_benchmark_proportions(self):
        cfg = SynthConfig(samples_per_class=400, proportions="iemocap")
        assert cfg.counts() == [494, 473, 314, 319]

    def test_invalid_rho(self):
        with pytest.raises(ValueError):
            SynthConfig(rho=1.5)


class TestCorpus:

    def test_sample_view_needs_standard_shapes(self):
        corpus = generate(SynthConfig(classes=2, samples_per_class=1))
        sample = corpus[1]
        assert sample.label == 1
        assert sample.x_a.values.shape == (128, 128)
        assert sample.x_t.true_length == corpus.lengths[1]

    def test_label_out_of_range(self):
        with pytest.raises(RangeError):
            Corpus(np.zeros((1, 2, 2)), np.zeros((1, 3, 2)), [1], [5], ["a"], num_classes=4)

    def test_column_lengths_checked(self):
        with pytest.raises(DimensionError):
            Corpus(np.zeros((2, 2, 2)), np.zeros((1, 3, 2)), [1], [0], ["a"], num_classes=4)

    def test_subset_and_concat(self):
        corpus = toy_corpus(samples_per_class=2)
        joined = corpus.subset([0, 1]).concat(corpus.subset([7]))
        assert len(joined) == 3
        assert joined.utterance_ids == [corpus.utterance_ids[i] for i in (0, 1, 7)]

    def test_sample_id_round_trip(self):
        assert format_sample_id("utt", 0) == "utt"
        assert format_sample_id("utt", 3) == "utt@3"
        assert parse_sample_id("utt@3") == ("utt", 3)
        assert parse_sample_id("plain") == ("plain", 0)
        assert parse_sample_id(format_sample_id("odd@7", 0)) == ("odd@7", 0)

    def test_embedding_padding_must_be_zero(self):
        vectors = np.ones((30, 300), dtype=np.float32)
        with pytest.raises(InputError):
            WordEmbeddingSequence(vectors, true_length=10)

    def test_embedding_from_short_matrix(self):
        seq = WordEmbeddingSequence.from_matrix(np.ones((4, 300)))
        assert seq.true_length == 4
        assert not seq.vectors[4:].any()


class TestBatching:
    """Negative sets hold different-emotion samples only."""

    def setup_method(self):
        self.corpus = toy_corpus(samples_per_class=100)

    def test_negative_purity_over_many_batches(self):
        rng = np.random.default_rng(0)
        for _ in range(10_000):
            batch = sample_batch(self.corpus, batch_size=64, rng=rng)
            for i, negs in enumerate(batch.negatives):
                assert not np.any(batch.labels[negs] == batch.labels[i])
                assert i not in negs

    def test_negative_sets_are_complete(self):
        batch = make_batch(np.array([0, 1, 0, 2]), [0, 1, 2, 3])
        npt.assert_array_equal(batch.negatives[0], [1, 3])
        npt.assert_array_equal(batch.negatives[1], [0, 2, 3])

    def test_single_label_batch_has_no_l2_anchors(self):
        batch = make_batch(np.array([2, 2, 2]), [0, 1, 2])
        assert batch.l2_anchors.size == 0

    def test_single_label_dataset_rejected(self):
        single = toy_corpus(classes=2, class_counts=[5, 1]).subset(range(5))
        with pytest.raises(ConfigurationError):
            sample_batch(single, batch_size=4)

    def test_sampler_covers_each_sample_once_per_epoch(self):
        sampler = BatchSampler(self.corpus.labels, 64, np.random.default_rng(1))
        batches = list(sampler.epoch())
        assert len(batches) == len(sampler) == 7
        seen = np.concatenate([b.indices for b in batches])
        npt.assert_array_equal(np.sort(seen), np.arange(len(self.corpus)))

    def test_sampler_is_deterministic(self):
        first = [b.indices for b in BatchSampler(self.corpus.labels, 32, np.random.default_rng(5)).epoch()]
        second = [b.indices for b in BatchSampler(self.corpus.labels, 32, np.random.default_rng(5)).epoch()]
        for a, b in zip(first, second):
            npt.assert_array_equal(a, b)


class TestFolds:
    """Stratified k-fold planning and the train/validation/test rotation."""

    def setup_method(self):
        self.labels = np.repeat([0, 1, 2, 3], [37, 41, 25, 30])

    def test_fold_sizes_differ_by_at_most_one(self):
        plan = make_folds(self.labels, k=10, seed=0)
        sizes = np.bincount(plan.assignments, minlength=10)
        assert sizes.max() - sizes.min() <= 1

    def test_folds_are_stratified(self):
        plan = make_folds(self.labels, k=10, seed=0)
        for c in range(4):
            per_fold = np.bincount(plan.assignments[self.labels == c], minlength=10)
            assert per_fold.max() - per_fold.min() <= 1

    def test_ten_folds_of_four_hundred_per_class(self):
        labels = np.repeat(np.arange(4), 400)
        plan = make_folds(labels, k=10, seed=7)
        for split in plan:
            npt.assert_array_equal(np.bincount(labels[split.test], minlength=4), [40, 40, 40, 40])
            assert split.train.size == 1280

    def test_split_rotation(self):
        plan = make_folds(self.labels, k=10, seed=0)
        split = plan.split(9)
        npt.assert_array_equal(split.validation, plan.indices(0))
        npt.assert_array_equal(split.test, plan.indices(9))
        union = np.concatenate([split.train, split.validation, split.test])
        npt.assert_array_equal(np.sort(union), np.arange(self.labels.size))

    def test_every_sample_tested_once(self):
        plan = make_folds(self.labels, k=5, seed=3)
        tested = np.concatenate([split.test for split in plan])
        npt.assert_array_equal(np.sort(tested), np.arange(self.labels.size))

    def test_deterministic(self):
        npt.assert_array_equal(make_folds(self.labels, seed=4).assignments,
                               make_folds(self.labels, seed=4).assignments)

    def test_too_few_folds(self):
        with pytest.raises(ConfigurationError):
            make_folds(self.labels, k=2)

    def test_class_smaller_than_k(self):
        with pytest.raises(ConfigurationError):
            make_folds(np.repeat([0, 1], [20, 5]), k=10)

    def test_fold_out_of_range(self):
        with pytest.raises(RangeError):
            make_folds(self.labels, k=5).split(5)
