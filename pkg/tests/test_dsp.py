"""
Tests for FFT, STFT, spectrogram segmentation and the feature file format.
"""

import sys
from pathlib import Path

import numpy as np
import numpy.testing as npt
import pytest
from scipy.io import wavfile

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.data.synth import generate
from src.dsp import (
    LOG_FLOOR, SEGMENT_SAMPLES, Waveform, fft, load_feature_file, load_features, make_spectrograms,
    radix2_fft, read_manifest, read_wav, save_features, stft, write_manifest,
)
from src.exceptions import DimensionError, FeatureFormatError, InputError, LabelRangeError, RangeError
from src.models import SynthConfig
from src.services import FeaturizeService


def naive_dft(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) @ x


def tone(freq_hz: float, seconds: float, rate: int = 16000, amplitude: float = 0.5) -> np.ndarray:
    t = np.arange(int(seconds * rate)) / rate
    return amplitude * np.sin(2 * np.pi * freq_hz * t)


class TestFFT:
    """256-point transform against the DFT definition."""

    def setup_method(self):
        self.rng = np.random.default_rng(11)

    def test_matches_naive_dft(self):
        for _ in range(20):
            x = self.rng.standard_normal(256)
            npt.assert_allclose(fft(x), naive_dft(x), atol=1e-9, rtol=0)

    def test_complex_input(self):
        x = self.rng.standard_normal(256) + 1j * self.rng.standard_normal(256)
        npt.assert_allclose(fft(x), naive_dft(x), atol=1e-9, rtol=0)

    def test_parseval(self):
        signals = self.rng.standard_normal((1000, 256))
        spectra = radix2_fft(signals)
        time_energy = np.sum(signals ** 2, axis=1)
        freq_energy = np.sum(np.abs(spectra) ** 2, axis=1) / 256
        npt.assert_allclose(freq_energy, time_energy, rtol=1e-9)

    def test_impulse_gives_flat_spectrum(self):
        x = np.zeros(256)
        x[0] = 1.0
        npt.assert_allclose(fft(x), np.ones(256), atol=1e-12)

    def test_constant_signal_is_dc_only(self):
        spectrum = fft(np.full(256, 2.0))
        assert spectrum[0] == pytest.approx(512.0)
        npt.assert_allclose(spectrum[1:], 0.0, atol=1e-9)

    def test_cosine_lands_in_two_bins(self):
        n = np.arange(256)
        magnitude = np.abs(fft(np.cos(2 * np.pi * 16 * n / 256)))
        npt.assert_allclose(magnitude[[16, 240]], 128.0, atol=1e-9)
        magnitude[[16, 240]] = 0.0
        npt.assert_allclose(magnitude, 0.0, atol=1e-9)

    def test_other_powers_of_two(self):
        x = self.rng.standard_normal(32)
        npt.assert_allclose(radix2_fft(x), naive_dft(x), atol=1e-9)

    def test_wrong_length_rejected(self):
        with pytest.raises(DimensionError):
            fft(np.zeros(255))
        with pytest.raises(DimensionError):
            radix2_fft(np.zeros(100))


class TestSTFT:
    """Framing, tone localization and segmentation."""

    def test_tone_peaks_at_expected_bin(self):
        magnitudes = stft(Waveform(tone(1000.0, 0.5)))
        assert magnitudes.shape[1] == 129
        assert np.all(magnitudes.argmax(axis=1) == 16)

    def test_frame_count(self):
        w = Waveform(np.zeros(1000))
        assert stft(w).shape[0] == (1000 - 256) // 128 + 1

    def test_too_short_for_one_frame(self):
        with pytest.raises(InputError):
            stft(Waveform(np.zeros(100)))

    def test_segment_shape(self):
        spectrograms = make_spectrograms(Waveform(tone(440.0, 1.05)))
        assert len(spectrograms) == 1
        assert spectrograms[0].values.shape == (128, 128)
        assert spectrograms[0].values.dtype == np.float32

    def test_remainder_is_dropped(self):
        spectrograms = make_spectrograms(Waveform(tone(300.0, 2.2)), "utt")
        assert len(spectrograms) == 2
        assert [s.segment_index for s in spectrograms] == [0, 1]

    def test_short_waveform_yields_nothing(self):
        assert make_spectrograms(Waveform(np.zeros(SEGMENT_SAMPLES - 1))) == []

    def test_silence_sits_at_floor(self):
        spectrograms = make_spectrograms(Waveform(np.zeros(SEGMENT_SAMPLES)))
        npt.assert_array_equal(spectrograms[0].values, np.float32(np.log(LOG_FLOOR)))

    def test_wrong_sample_rate(self):
        with pytest.raises(InputError):
            make_spectrograms(Waveform(np.zeros(SEGMENT_SAMPLES), sample_rate_hz=8000))

    def test_waveform_range_checked(self):
        with pytest.raises(InputError):
            Waveform(np.array([0.0, 1.5]))


class TestWavReading:

    def test_int16_is_scaled(self, tmp_path):
        path = tmp_path / "a.wav"
        wavfile.write(path, 16000, np.array([0, 16384, -32768], dtype=np.int16))
        w = read_wav(path)
        assert w.sample_rate_hz == 16000
        npt.assert_allclose(w.samples, [0.0, 0.5, -1.0])

    def test_stereo_rejected(self, tmp_path):
        path = tmp_path / "stereo.wav"
        wavfile.write(path, 16000, np.zeros((100, 2), dtype=np.int16))
        with pytest.raises(InputError):
            read_wav(path)


class TestFeatureFiles:
    """Binary feature format and manifests."""

    def setup_method(self):
        self.corpus = generate(SynthConfig(classes=3, samples_per_class=2, seed=5))

    def test_round_trip_is_exact(self, tmp_path):
        path = save_features(tmp_path / "c.cfe", self.corpus)
        loaded = load_feature_file(path, num_classes=3)
        npt.assert_array_equal(loaded.audio, self.corpus.audio)
        npt.assert_array_equal(loaded.text, self.corpus.text)
        npt.assert_array_equal(loaded.lengths, self.corpus.lengths)
        npt.assert_array_equal(loaded.labels, self.corpus.labels)
        assert loaded.utterance_ids == self.corpus.utterance_ids

    def test_resave_is_byte_identical(self, tmp_path):
        first = save_features(tmp_path / "a.cfe", self.corpus)
        second = save_features(tmp_path / "b.cfe", load_feature_file(first, num_classes=3))
        assert first.read_bytes() == second.read_bytes()

    def test_bad_magic(self, tmp_path):
        path = save_features(tmp_path / "c.cfe", self.corpus)
        data = bytearray(path.read_bytes())
        data[:4] = b"XXXX"
        path.write_bytes(bytes(data))
        with pytest.raises(FeatureFormatError) as excinfo:
            load_feature_file(path, num_classes=3)
        assert excinfo.value.offset == 0

    def test_truncated_file(self, tmp_path):
        path = save_features(tmp_path / "c.cfe", self.corpus)
        path.write_bytes(path.read_bytes()[:-10])
        with pytest.raises(FeatureFormatError):
            load_feature_file(path, num_classes=3)

    def test_trailing_bytes(self, tmp_path):
        path = save_features(tmp_path / "c.cfe", self.corpus)
        path.write_bytes(path.read_bytes() + b"\0")
        with pytest.raises(FeatureFormatError):
            load_feature_file(path, num_classes=3)

    def test_label_out_of_range(self, tmp_path):
        path = save_features(tmp_path / "c.cfe", self.corpus)
        with pytest.raises(LabelRangeError) as excinfo:
            load_feature_file(path, num_classes=2)
        assert isinstance(excinfo.value, RangeError)

    def test_manifest_concatenates_files(self, tmp_path):
        first = save_features(tmp_path / "parts" / "a.cfe", self.corpus)
        second = save_features(tmp_path / "parts" / "b.cfe", self.corpus.subset([0, 1]))
        manifest = write_manifest(tmp_path / "manifest.txt", [first, second], comment="two parts")
        assert manifest.read_text().splitlines()[0] == "# two parts"
        corpus = load_features(manifest, num_classes=3)
        assert len(corpus) == len(self.corpus) + 2

    def test_manifest_missing_file(self, tmp_path):
        manifest = tmp_path / "manifest.txt"
        manifest.write_text("# header\n\nmissing.cfe\n")
        with pytest.raises(FileNotFoundError) as excinfo:
            read_manifest(manifest)
        assert "missing.cfe" in str(excinfo.value)


class TestFeaturizeService:
    """WAV + embedding matrices to feature files."""

    def setup_method(self):
        self.service = FeaturizeService(num_classes=4)

    def _write_inputs(self, tmp_path, seconds=2.2, rate=16000, embedding_rows=12):
        wav_dir = tmp_path / "wav"
        wav_dir.mkdir()
        samples = (tone(500.0, seconds, rate) * 32767).astype(np.int16)
        wavfile.write(wav_dir / "utt1.wav", rate, samples)
        np.save(tmp_path / "utt1.npy", np.ones((embedding_rows, 300), dtype=np.float32))
        manifest = tmp_path / "utterances.csv"
        manifest.write_text("utterance_id,label,embedding\nutt1,2,utt1.npy\n")
        return wav_dir, manifest

    def test_segments_share_label_and_text(self, tmp_path):
        wav_dir, manifest = self._write_inputs(tmp_path)
        summary = self.service.featurize(wav_dir, manifest, tmp_path / "out")
        assert summary.segments == 2
        corpus = load_features(summary.paths["manifest"], num_classes=4)
        assert corpus.utterance_ids == ["utt1", "utt1"]
        npt.assert_array_equal(corpus.segment_indices, [0, 1])
        npt.assert_array_equal(corpus.labels, [2, 2])
        npt.assert_array_equal(corpus.lengths, [12, 12])

    def test_long_embedding_is_truncated(self, tmp_path):
        wav_dir, manifest = self._write_inputs(tmp_path, seconds=1.1, embedding_rows=45)
        summary = self.service.featurize(wav_dir, manifest, tmp_path / "out")
        corpus = load_features(summary.paths["manifest"], num_classes=4)
        assert corpus.lengths[0] == 30

    def test_missing_embedding_names_utterance(self, tmp_path):
        wav_dir, manifest = self._write_inputs(tmp_path)
        (tmp_path / "utt1.npy").unlink()
        with pytest.raises(InputError, match="utt1"):
            self.service.featurize(wav_dir, manifest, tmp_path / "out")

    def test_wrong_sample_rate_names_file(self, tmp_path):
        wav_dir, manifest = self._write_inputs(tmp_path, rate=8000, seconds=3.0)
        with pytest.raises(InputError, match="utt1.wav"):
            self.service.featurize(wav_dir, manifest, tmp_path / "out")

    def test_non_integer_label_is_input_error(self, tmp_path):
        wav_dir, manifest = self._write_inputs(tmp_path)
        manifest.write_text("utterance_id,label,embedding\nutt1,happy,utt1.npy\n")
        with pytest.raises(InputError, match="happy"):
            self.service.featurize(wav_dir, manifest, tmp_path / "out")
