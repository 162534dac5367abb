"""STFT / inverse STFT between time-domain sweeps and complex
spectrograms, plus spectrogram normalization and range profiles.

Spectrogram rows are frequency bins in fft-shifted order (row 0 is the
most negative frequency, row fft_points//2 is DC), columns are time
frames. The inverse uses least-squares weighted overlap-add with
synthesis weights w[n] / sum(w^2), which reconstructs the signal exactly
wherever the accumulated window energy is nonzero.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, DataError, ShapeMismatchError

_WINDOWS = {
    "hamming": np.hamming,
    "hann": np.hanning,
    "rect": np.ones,
}


@dataclass(frozen=True)
class StftConfig:
    window: str = "hamming"
    window_length: int = 256
    hop: int = 1
    fft_points: int = 256

    def __post_init__(self):
        if self.window not in _WINDOWS:
            raise ConfigError(f"unknown window {self.window!r}")
        if self.window_length <= 0 or self.hop <= 0 or self.fft_points <= 0:
            raise ConfigError("window_length, hop and fft_points must be positive")
        if self.window_length > self.fft_points:
            raise ConfigError("window_length must not exceed fft_points")
        if self.hop > self.window_length:
            raise ConfigError("hop must not exceed window_length")

    def window_samples(self) -> np.ndarray:
        return _WINDOWS[self.window](self.window_length).astype(np.float64)

    def frame_count(self, signal_length: int) -> int:
        if signal_length < self.window_length:
            raise DataError(
                f"signal of length {signal_length} is shorter than the "
                f"analysis window ({self.window_length})")
        return (signal_length - self.window_length) // self.hop + 1

    def coverage(self, n_frames: int) -> int:
        """Number of time samples spanned by ``n_frames`` frames."""
        return (n_frames - 1) * self.hop + self.window_length


@dataclass
class Spectrogram:
    """Complex time-frequency matrix: fft_points rows x n_frames columns.

    ``scale`` is the normalization denominator; 1.0 means unnormalized.
    ``layout`` records the row order ('shifted' = negative frequencies in
    the top rows).
    """

    data: np.ndarray
    config: StftConfig
    scale: float = 1.0
    layout: str = "shifted"

    @property
    def n_frames(self) -> int:
        return self.data.shape[1]


def stft(signal: np.ndarray, config: StftConfig) -> Spectrogram:
    """Windowed DFT of overlapping segments; column n covers samples
    [n*hop, n*hop + window_length)."""
    signal = np.asarray(signal, dtype=np.complex128)
    n_frames = config.frame_count(signal.size)
    frames = sliding_window_view(signal, config.window_length)[::config.hop][:n_frames]
    spectra = np.fft.fft(frames * config.window_samples(), n=config.fft_points, axis=1)
    data = np.fft.fftshift(spectra.T, axes=0)
    return Spectrogram(np.ascontiguousarray(data), config)


def istft(spec: Spectrogram) -> np.ndarray:
    """Least-squares overlap-add inverse of :func:`stft`.

    Returns (n_frames - 1) * hop + window_length samples. Samples whose
    accumulated window energy is zero (possible at the taper edges for
    zero-endpoint windows) are returned as zero; a zero-energy gap in the
    interior means the configuration violates COLA and raises.
    """
    cfg = spec.config
    data = spec.data
    if data.shape[0] != cfg.fft_points:
        raise ShapeMismatchError("spectrogram row count != fft_points")
    if spec.layout == "shifted":
        data = np.fft.ifftshift(data, axes=0)
    n_frames = data.shape[1]
    win = cfg.window_samples()
    length = cfg.coverage(n_frames)

    segments = np.fft.ifft(data.T, axis=1)[:, :cfg.window_length] * win
    acc = np.zeros(length, dtype=np.complex128)
    den = np.zeros(length, dtype=np.float64)
    win_sq = win * win
    for m in range(n_frames):
        start = m * cfg.hop
        acc[start:start + cfg.window_length] += segments[m]
        den[start:start + cfg.window_length] += win_sq

    covered = den > 1e-12 * den.max()
    idx = np.nonzero(covered)[0]
    if idx.size == 0:
        raise ConfigError("COLA violated: window energy is zero everywhere")
    if not covered[idx[0]:idx[-1] + 1].all():
        raise ConfigError("COLA violated: zero window energy inside the "
                          "covered interval")
    out = np.zeros(length, dtype=np.complex128)
    out[covered] = acc[covered] / den[covered]
    return out


def normalize(spec: Spectrogram) -> Spectrogram:
    """Divide by the maximum entry magnitude (stored in ``scale``)."""
    peak = float(np.max(np.abs(spec.data)))
    if peak == 0.0:
        raise DataError("cannot normalize an all-zero spectrogram")
    return replace(spec, data=spec.data / peak, scale=spec.scale * peak)


def denormalize(spec: Spectrogram) -> Spectrogram:
    """Undo :func:`normalize`; resets ``scale`` to 1."""
    if spec.scale <= 0:
        raise DataError("spectrogram scale must be positive")
    return replace(spec, data=spec.data * spec.scale, scale=1.0)


def range_profile(signal: np.ndarray, floor_db: float = -200.0) -> np.ndarray:
    """Hamming-windowed full-sweep spectrum in dB, fft-shifted, floored."""
    signal = np.asarray(signal, dtype=np.complex128)
    if signal.size == 0:
        raise DataError("cannot compute a range profile of an empty signal")
    spectrum = np.fft.fftshift(np.fft.fft(np.hamming(signal.size) * signal))
    mag = np.abs(spectrum)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag)
    return np.maximum(db, floor_db)
