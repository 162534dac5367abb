"""Prior-guided training loss: squared Frobenius data term plus a
column-sparsity penalty.

    loss = ||label - pred||_F^2 + weight * sum_j sqrt(sum_i |pred_ij|^2)

Rows (index i) are frequency bins, columns (index j) are time frames, so
the penalty charges each time frame by the Euclidean norm of its range
profile: horizontal target lines are cheap, frequency-spread interference
residue is expensive. The gradient smooths the column norm with a small
epsilon so all-zero columns contribute a zero (not undefined) gradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeMismatchError
from .timefreq import Spectrogram

_ROW_AXIS = -2  # frequency axis of (..., rows, cols) matrices


@dataclass(frozen=True)
class LossConfig:
    l21_weight: float = 400.0
    l21_epsilon: float = 1e-12

    def __post_init__(self):
        if self.l21_weight < 0:
            raise ConfigError("l21_weight must be >= 0")
        if self.l21_epsilon <= 0:
            raise ConfigError("l21_epsilon must be > 0")


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, Spectrogram):
        return x.data
    return np.asarray(x)


def l21_norm(matrix) -> float:
    """Sum over columns of per-column Euclidean norms."""
    m = _as_matrix(matrix)
    col_sq = np.sum(np.abs(m) ** 2, axis=_ROW_AXIS, dtype=np.float64)
    return float(np.sum(np.sqrt(col_sq)))


def loss_value(pred, label, cfg: LossConfig) -> float:
    p = _as_matrix(pred)
    s = _as_matrix(label)
    if p.shape != s.shape:
        raise ShapeMismatchError("prediction/label shapes differ")
    mse = float(np.sum(np.abs(s - p) ** 2, dtype=np.float64))
    return mse + cfg.l21_weight * l21_norm(p)


def loss_gradient(pred, label, cfg: LossConfig) -> np.ndarray:
    """Gradient with respect to the prediction, in the real-composite
    convention: the returned complex matrix holds d(loss)/d(Re pred) as its
    real part and d(loss)/d(Im pred) as its imaginary part."""
    p = _as_matrix(pred)
    s = _as_matrix(label)
    if p.shape != s.shape:
        raise ShapeMismatchError("prediction/label shapes differ")
    grad = 2.0 * (p - s)
    col_sq = np.sum(np.abs(p) ** 2, axis=_ROW_AXIS, keepdims=True)
    grad += cfg.l21_weight * p / np.sqrt(col_sq + cfg.l21_epsilon)
    return grad


def batch_loss_and_gradient(pred_re: np.ndarray, pred_im: np.ndarray,
                            label_re: np.ndarray, label_im: np.ndarray,
                            cfg: LossConfig) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean per-item loss over a batch of (batch, 1, rows, cols) chunks and
    the matching gradient arrays. Accumulation runs in float64 regardless
    of the tensor dtype."""
    if pred_re.shape != label_re.shape:
        raise ShapeMismatchError("prediction/label shapes differ")
    b = pred_re.shape[0]
    d_re = pred_re.astype(np.float64) - label_re
    d_im = pred_im.astype(np.float64) - label_im
    mse = float(np.sum(d_re * d_re) + np.sum(d_im * d_im))

    col_sq = np.sum(pred_re.astype(np.float64) ** 2
                    + pred_im.astype(np.float64) ** 2,
                    axis=_ROW_AXIS, keepdims=True)
    col_norm = np.sqrt(col_sq + cfg.l21_epsilon)
    penalty = float(np.sum(np.sqrt(col_sq)))
    total = (mse + cfg.l21_weight * penalty) / b

    g_re = (2.0 * d_re + cfg.l21_weight * pred_re / col_norm) / b
    g_im = (2.0 * d_im + cfg.l21_weight * pred_im / col_norm) / b
    return total, g_re, g_im
