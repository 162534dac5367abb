"""Chunked end-to-end processing of arbitrary-length spectrograms.

A stack of L spectrograms (M frequency bins x N time frames) is split
along the time axis into square M x M chunks that overlap by 2*N_p
frames; each chunk is normalized by a per-chunk scale, pushed through the
network, denormalized, and the predictions are re-assembled by taking
each chunk's interior (N_p frames trimmed from both seams) so that every
output frame is written exactly once.

Chunk layout for stride S = M - 2*N_p and p = floor(N/S) + 1 chunks:

    chunk 0       frames [0, M)            writes frames [0, M - N_p)
    chunk i       frames [i*S, i*S + M)    writes [i*S + N_p, i*S + M - N_p)
    chunk p-1     frames [(p-1)*S, N)      writes [(p-1)*S + N_p, N)

Chunks extending past N are left-aligned and zero-filled, and their write
windows are clamped to N; when S divides N exactly the final chunk is
empty and the preceding one supplies the trailing frames. Inputs shorter
than M frames are zero-padded up to M and trimmed after integration.

Per-chunk scales are powers of two (the smallest power of two >= the
chunk's peak magnitude), so normalize/denormalize are exact in floating
point and a pass-through predictor reproduces the input bitwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cvnn import ComplexTensor4, CvFcnModel, forward
from .errors import ConfigError, DataError, ShapeMismatchError
from .timefreq import Spectrogram, StftConfig, istft, stft
from .radar import SweepSignal


@dataclass(frozen=True)
class SplitConfig:
    chunk_size: int = 256
    overlap_points: int = 4

    def __post_init__(self):
        if self.overlap_points < 1:
            raise ConfigError("overlap_points must be >= 1")
        if self.chunk_size <= 2 * self.overlap_points:
            raise ConfigError("chunk_size must exceed 2*overlap_points")

    @property
    def stride(self) -> int:
        return self.chunk_size - 2 * self.overlap_points


@dataclass
class ChunkBatch:
    """Split result: chunks indexed chunk-major (chunk i of map l sits at
    flat index i*L + l), with per-chunk scales and the source geometry
    needed to integrate predictions back."""

    chunks: ComplexTensor4
    scales: np.ndarray
    n_maps: int
    n_frames: int           # frames after padding to at least chunk_size
    n_frames_original: int
    config: SplitConfig

    @property
    def n_chunks(self) -> int:
        return self.chunks.shape[0] // self.n_maps


def _pow2_scale(peak: float) -> float:
    """Smallest power of two >= peak (1.0 for an all-zero chunk)."""
    if peak <= 0.0:
        return 1.0
    return float(2.0 ** math.ceil(math.log2(peak)))


def split(maps: np.ndarray, cfg: SplitConfig,
          normalize: bool = True,
          scales: np.ndarray | None = None) -> ChunkBatch:
    """Split a (L, M, N) complex stack into normalized M x M chunks.

    With ``scales`` given, those values are used instead of per-chunk
    maxima (used to keep label chunks on the same scale as their inputs).
    ``normalize=False`` keeps raw values with unit scales.
    """
    maps = np.asarray(maps, dtype=np.complex128)
    if maps.ndim != 3:
        raise ShapeMismatchError("expected a (maps, bins, frames) stack")
    n_maps, m, n_orig = maps.shape
    if m != cfg.chunk_size:
        raise ConfigError(
            f"chunk_size {cfg.chunk_size} must equal the number of "
            f"frequency bins {m}")
    n = max(n_orig, cfg.chunk_size)
    if n > n_orig:
        maps = np.pad(maps, ((0, 0), (0, 0), (0, n - n_orig)))

    stride = cfg.stride
    p = n // stride + 1
    chunks = np.zeros((p * n_maps, m, m), dtype=np.complex128)
    for i in range(p):
        start = i * stride
        valid = max(0, min(m, n - start))
        if valid:
            chunks[i * n_maps:(i + 1) * n_maps, :, :valid] = \
                maps[:, :, start:start + valid]

    if scales is None:
        if normalize:
            peaks = np.abs(chunks).reshape(p * n_maps, -1).max(axis=1)
            scales = np.array([_pow2_scale(float(v)) for v in peaks])
        else:
            scales = np.ones(p * n_maps)
    else:
        scales = np.asarray(scales, dtype=np.float64)
        if scales.shape != (p * n_maps,):
            raise ShapeMismatchError("scales length != number of chunks")
    if np.any(scales <= 0):
        raise DataError("chunk scales must be positive")
    chunks /= scales[:, None, None]

    tensor = ComplexTensor4.from_complex(chunks[:, None, :, :])
    return ChunkBatch(tensor, scales, n_maps, n, n_orig, cfg)


def denormalize_chunks(batch: ChunkBatch) -> ChunkBatch:
    """Multiply every chunk by its stored scale (exact: scales are powers
    of two); the returned batch has unit scales."""
    s = batch.scales[:, None, None, None]
    tensor = ComplexTensor4(batch.chunks.re * s, batch.chunks.im * s)
    return ChunkBatch(tensor, np.ones_like(batch.scales), batch.n_maps,
                      batch.n_frames, batch.n_frames_original, batch.config)


def integrate(batch: ChunkBatch) -> np.ndarray:
    """Re-assemble a (L, M, N) stack from predicted, denormalized chunks.

    Each output frame is taken from exactly one chunk (seam frames come
    from the chunk whose interior covers them); a coverage miscount raises.
    """
    cfg = batch.config
    n_p = cfg.overlap_points
    m = cfg.chunk_size
    stride = cfg.stride
    n = batch.n_frames
    p = batch.n_chunks
    l = batch.n_maps
    data = batch.chunks.to_complex()[:, 0]

    out = np.zeros((l, m, n), dtype=np.complex128)
    writes = np.zeros(n, dtype=np.int64)
    for i in range(p):
        start = i * stride
        lo = 0 if i == 0 else start + n_p
        hi = n if i == p - 1 else min(start + m - n_p, n)
        if hi <= lo:
            continue
        out[:, :, lo:hi] = data[i * l:(i + 1) * l, :, lo - start:hi - start]
        writes[lo:hi] += 1
    if not np.all(writes == 1):
        raise DataError("chunk integration did not cover every frame "
                        "exactly once")
    return out[:, :, :batch.n_frames_original]


def _forward_batched(model: CvFcnModel, chunks: ComplexTensor4,
                     batch_size: int, dtype) -> ComplexTensor4:
    total = chunks.shape[0]
    out_re = np.empty_like(chunks.re)
    out_im = np.empty_like(chunks.im)
    for lo in range(0, total, batch_size):
        hi = min(lo + batch_size, total)
        piece = ComplexTensor4(chunks.re[lo:hi].astype(dtype),
                               chunks.im[lo:hi].astype(dtype))
        pred = forward(model, piece)
        out_re[lo:hi] = pred.re
        out_im[lo:hi] = pred.im
    return ComplexTensor4(out_re, out_im)


def run_inference(model: CvFcnModel, sweep: np.ndarray,
                  stft_cfg: StftConfig, split_cfg: SplitConfig,
                  batch_size: int = 32) -> tuple[Spectrogram, np.ndarray]:
    """Full recovery chain for one sweep: STFT -> split/normalize ->
    network -> denormalize/integrate -> inverse STFT.

    Returns the recovered spectrogram and the recovered time-domain
    signal (same length as the input sweep).
    """
    if split_cfg.chunk_size != stft_cfg.fft_points:
        raise ConfigError("chunk_size must equal fft_points")
    sweep = np.asarray(sweep, dtype=np.complex128)
    spec_in = stft(sweep, stft_cfg)
    batch = split(spec_in.data[None], split_cfg)
    dtype = model.layers[0].kernel_re.dtype
    predicted = _forward_batched(model, batch.chunks, batch_size, dtype)
    batch = ChunkBatch(predicted, batch.scales, batch.n_maps,
                       batch.n_frames, batch.n_frames_original, batch.config)
    recovered_map = integrate(denormalize_chunks(batch))[0]
    spec_out = Spectrogram(recovered_map, stft_cfg)
    time_signal = istft(spec_out)
    if time_signal.size < sweep.size:
        time_signal = np.pad(time_signal, (0, sweep.size - time_signal.size))
    return spec_out, time_signal[:sweep.size]


def make_training_pairs(dataset: list[SweepSignal],
                        stft_cfg: StftConfig, split_cfg: SplitConfig,
                        rng: np.random.Generator) -> list[tuple[np.ndarray, np.ndarray]]:
    """Chunked (interfered, clean) spectrogram pairs for training.

    Input chunks are normalized per chunk; each label chunk is divided by
    its input chunk's scale so the regression target stays commensurate
    with what the network sees. The pair list is shuffled with ``rng``.
    """
    if not dataset:
        raise DataError("training dataset is empty")
    if split_cfg.chunk_size != stft_cfg.fft_points:
        raise ConfigError("chunk_size must equal fft_points")
    pairs: list[tuple[np.ndarray, np.ndarray]] = []
    for sweep in dataset:
        noisy = split(stft(sweep.samples, stft_cfg).data[None], split_cfg)
        label = split(stft(sweep.clean, stft_cfg).data[None], split_cfg,
                      scales=noisy.scales)
        noisy_c = noisy.chunks.to_complex()[:, 0]
        label_c = label.chunks.to_complex()[:, 0]
        pairs.extend((noisy_c[i], label_c[i]) for i in range(noisy_c.shape[0]))
    order = rng.permutation(len(pairs))
    return [pairs[i] for i in order]
