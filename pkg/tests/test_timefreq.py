"""STFT/ISTFT, normalization and range profiles."""

import numpy as np
import pytest

from rimlab import (
    C_LIGHT,
    Spectrogram,
    StftConfig,
    TargetParams,
    denormalize,
    istft,
    normalize,
    range_profile,
    stft,
    synthesize_clean,
)
from rimlab.errors import ConfigError, DataError


def _tone(freq_norm, n):
    return np.exp(2j * np.pi * freq_norm * np.arange(n))


class TestStft:
    def test_on_bin_tone_rect_window_single_bin(self):
        cfg = StftConfig("rect", 32, 8, 32)
        signal = _tone(4 / 32, 200)
        spec = stft(signal, cfg)
        mags = np.abs(spec.data)
        for col in range(spec.n_frames):
            nonzero = np.nonzero(mags[:, col] > 1e-9 * mags[:, col].max())[0]
            assert nonzero.size == 1
            # shifted layout: bin 4 sits at row fft/2 + 4
            assert nonzero[0] == 32 // 2 + 4

    def test_zero_signal_zero_spectrogram(self):
        spec = stft(np.zeros(300, complex), StftConfig("hamming", 64, 4, 64))
        assert not np.any(spec.data)

    def test_chirp_peak_advances_by_slope(self, desk):
        fs = desk.radar.sampling_frequency_hz
        n = desk.radar.n_samples
        dk = 3e10
        t = np.arange(n) / fs
        chirp = np.exp(2j * np.pi * (-1e6 * t + 0.5 * dk * t * t))
        spec = stft(chirp, desk.stft)
        freqs = np.fft.fftshift(np.fft.fftfreq(desk.stft.fft_points, d=1.0 / fs))
        peaks = freqs[np.argmax(np.abs(spec.data), axis=0)]
        frames = np.arange(spec.n_frames)
        slope_per_frame = np.polyfit(frames[2:-2], peaks[2:-2], 1)[0]
        expected = dk * desk.stft.hop / fs
        bin_width = fs / desk.stft.fft_points
        assert abs(slope_per_frame - expected) < bin_width / spec.n_frames * 4

    def test_too_short_signal_raises(self):
        with pytest.raises(DataError):
            stft(np.zeros(63, complex), StftConfig("hamming", 64, 4, 64))

    def test_linearity(self, rng):
        cfg = StftConfig("hamming", 32, 4, 32)
        x = rng.standard_normal(200) + 1j * rng.standard_normal(200)
        y = rng.standard_normal(200) + 1j * rng.standard_normal(200)
        a, b = 1.7 - 0.3j, -0.8 + 2.2j
        lhs = stft(a * x + b * y, cfg).data
        rhs = a * stft(x, cfg).data + b * stft(y, cfg).data
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))

    def test_parseval_rect_no_overlap(self, rng):
        cfg = StftConfig("rect", 32, 32, 32)
        x = rng.standard_normal(320) + 1j * rng.standard_normal(320)
        spec = stft(x, cfg)
        lhs = np.sum(np.abs(spec.data) ** 2) / cfg.fft_points
        rhs = np.sum(np.abs(x) ** 2)
        assert lhs == pytest.approx(rhs, rel=1e-9)


class TestIstft:
    def test_roundtrip_hamming_hop1(self, rng):
        cfg = StftConfig("hamming", 64, 1, 64)
        x = rng.standard_normal(400) + 1j * rng.standard_normal(400)
        y = istft(stft(x, cfg))
        assert y.size == 400
        assert np.max(np.abs(y - x)) <= 1e-10 * np.max(np.abs(x))

    def test_zero_spectrogram_zero_signal(self):
        cfg = StftConfig("hamming", 64, 1, 64)
        spec = Spectrogram(np.zeros((64, 10), complex), cfg)
        assert not np.any(istft(spec))

    def test_roundtrip_hann_half_overlap(self, rng):
        cfg = StftConfig("hann", 64, 32, 64)
        x = rng.standard_normal(640) + 1j * rng.standard_normal(640)
        y = istft(stft(x, cfg))
        interior = slice(64, y.size - 64)
        err = np.max(np.abs(y[interior] - x[:y.size][interior]))
        assert err <= 1e-8 * np.max(np.abs(x))

    def test_all_shipped_configs_roundtrip(self, desk, paper, rng):
        for cfg, n in ((desk.stft, 256), (paper.stft, 512)):
            x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            y = istft(stft(x, cfg))
            assert np.max(np.abs(y - x[:y.size])) <= 1e-8 * np.max(np.abs(x))

    def test_gapped_window_energy_violates_cola(self, rng):
        # hann endpoints are zero, so hop == window leaves periodic holes
        cfg = StftConfig("hann", 32, 32, 32)
        x = rng.standard_normal(128) + 1j * rng.standard_normal(128)
        with pytest.raises(ConfigError):
            istft(stft(x, cfg))


class TestNormalize:
    def _spec(self, data):
        return Spectrogram(np.asarray(data, complex),
                           StftConfig("rect", 2, 1, 2))

    def test_divides_by_peak_magnitude(self):
        spec = self._spec([[4 + 3j, 0.0], [0.1, 0.2]])
        out = normalize(spec)
        assert out.scale == 5.0
        assert out.data[0, 0] == pytest.approx((4 + 3j) / 5)
        assert np.max(np.abs(out.data)) == pytest.approx(1.0)

    def test_unit_peak_unchanged(self):
        spec = self._spec([[1.0, 0.5j], [0.0, 0.25]])
        out = normalize(spec)
        assert out.scale == 1.0
        assert np.array_equal(out.data, spec.data)

    def test_roundtrip_identity(self, rng):
        data = rng.standard_normal((8, 5)) + 1j * rng.standard_normal((8, 5))
        spec = self._spec(data)
        back = denormalize(normalize(spec))
        assert np.max(np.abs(back.data - data)) <= 1e-12 * np.max(np.abs(data))
        assert back.scale == 1.0

    def test_all_zero_rejected(self):
        with pytest.raises(DataError):
            normalize(self._spec(np.zeros((4, 4))))


class TestRangeProfile:
    def test_pure_tone_peaks_at_bin(self):
        n = 256
        x = _tone(17 / n, n)
        profile = range_profile(x)
        assert np.argmax(profile) == n // 2 + 17

    def test_zero_signal_hits_floor(self):
        profile = range_profile(np.zeros(128, complex))
        assert np.all(profile == -200.0)

    def test_two_target_mainlobes(self, desk):
        n = desk.radar.n_samples
        fs = desk.radar.sampling_frequency_hz
        k = desk.radar.chirp_rate_hz_per_s
        bins = (-24, -48)
        targets = [TargetParams(distance_m=-b * (fs / n) / k * C_LIGHT / 2.0,
                                amplitude=1.0) for b in bins]
        profile = range_profile(synthesize_clean(desk.radar, targets))
        for b in bins:
            row = n // 2 + b
            lobe = profile[row - 1:row + 2]
            assert profile[row] >= profile.max() - 6.1
            assert lobe.max() == profile[row]
