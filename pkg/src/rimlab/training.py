"""Mini-batch training of the recovery network on chunked spectrogram
pairs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cvnn import (ArchitectureSpec, ComplexTensor4, CvFcnModel, adam_step,
                   backward_from_cache, forward_with_cache, init_model)
from .errors import DataError, NumericError
from .loss import LossConfig, batch_loss_and_gradient
from .pipeline import SplitConfig, make_training_pairs
from .radar import SweepSignal
from .timefreq import StftConfig


@dataclass
class TrainResult:
    model: CvFcnModel
    epoch_losses: list[float]


def train_model(dataset: list[SweepSignal],
                stft_cfg: StftConfig,
                split_cfg: SplitConfig,
                arch: ArchitectureSpec,
                epochs: int,
                lr: float = 1e-3,
                batch_size: int = 32,
                loss_cfg: LossConfig | None = None,
                seed: int = 0,
                dtype=np.float32,
                verbose: bool = False) -> TrainResult:
    """Train a model from scratch; fully deterministic for a fixed seed.

    One generator (seeded with ``seed``) drives initialization, the
    initial pair shuffle and the per-epoch permutations, so identical
    inputs reproduce the model bitwise. Raises NumericError if the loss
    stops being finite.
    """
    if not dataset:
        raise DataError("training dataset is empty")
    if epochs < 0 or batch_size < 1:
        raise DataError("epochs must be >= 0 and batch_size >= 1")
    loss_cfg = loss_cfg or LossConfig()
    rng = np.random.default_rng(seed)
    model = init_model(arch, rng, dtype=dtype)
    if epochs == 0:
        return TrainResult(model, [])

    pairs = make_training_pairs(dataset, stft_cfg, split_cfg, rng)
    # all-zero input chunks are padding artifacts of short maps and carry
    # no training signal; drop them
    pairs = [p for p in pairs if np.any(p[0])]
    if not pairs:
        raise DataError("all training chunks are empty")
    x = ComplexTensor4.from_complex(
        np.stack([p[0] for p in pairs])[:, None], dtype=dtype)
    y = ComplexTensor4.from_complex(
        np.stack([p[1] for p in pairs])[:, None], dtype=dtype)
    n = x.shape[0]

    losses = []
    for epoch in range(epochs):
        order = rng.permutation(n)
        loss_sum = 0.0
        for lo in range(0, n, batch_size):
            idx = order[lo:lo + batch_size]
            bx = ComplexTensor4(x.re[idx], x.im[idx])
            by = ComplexTensor4(y.re[idx], y.im[idx])
            out, cache = forward_with_cache(model, bx)
            loss, g_re, g_im = batch_loss_and_gradient(
                out.re, out.im, by.re, by.im, loss_cfg)
            if not np.isfinite(loss):
                raise NumericError(
                    f"non-finite loss at epoch {epoch + 1}; training aborted")
            grads = backward_from_cache(
                model, cache,
                ComplexTensor4(g_re.astype(dtype), g_im.astype(dtype)))
            adam_step(model, grads, lr)
            loss_sum += loss * idx.size
        losses.append(loss_sum / n)
        if verbose:
            print(f"epoch {epoch + 1:3d}/{epochs}  loss {losses[-1]:.6f}")
    return TrainResult(model, losses)
