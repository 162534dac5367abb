"""Real-valued 'same'-padding correlation primitive with two backends.

All network math above this layer (complex layer structure, activations,
gradient bookkeeping, optimizer) is implemented in this package; this
module only provides the inner sliding-window dot products:

    conv_forward      y[b,o] = sum_{c,u,v} k[o,c,u,v] * x[b,c,h+u,w+v]
    conv_input_grad   transpose of conv_forward in its input argument
    conv_weight_grad  transpose of conv_forward in its kernel argument

The numpy backend lowers to an im2col patch matrix plus GEMMs and is the
portable reference. When torch is importable its CPU convolution kernels
compute the same three operations several times faster on large batches;
select explicitly with RIMLAB_CONV_BACKEND=numpy|torch (default: torch
when available). Both backends are deterministic for fixed inputs.
"""

from __future__ import annotations

import os

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, ShapeMismatchError

_torch = None


def _detect_backend() -> str:
    choice = os.environ.get("RIMLAB_CONV_BACKEND", "auto")
    if choice not in ("auto", "numpy", "torch"):
        raise ConfigError(f"RIMLAB_CONV_BACKEND must be auto|numpy|torch, "
                          f"got {choice!r}")
    global _torch
    if choice in ("auto", "torch"):
        try:
            import torch
            _torch = torch
            return "torch"
        except ImportError:
            if choice == "torch":
                raise ConfigError("torch conv backend requested but torch "
                                  "is not importable")
    return "numpy"


_BACKEND: str | None = None


def active_backend() -> str:
    global _BACKEND
    if _BACKEND is None:
        _BACKEND = _detect_backend()
    return _BACKEND


def set_backend(name: str | None) -> None:
    """Override backend selection ('numpy', 'torch', or None to re-detect)."""
    global _BACKEND
    if name not in (None, "numpy", "torch"):
        raise ConfigError(f"unknown conv backend {name!r}")
    if name == "torch":
        global _torch
        import torch
        _torch = torch
    _BACKEND = name


def _check_channels(x: np.ndarray, kernel: np.ndarray) -> None:
    if x.ndim != 4 or kernel.ndim != 4:
        raise ShapeMismatchError("conv operands must be rank-4")
    if x.shape[1] != kernel.shape[1]:
        raise ShapeMismatchError(
            f"input has {x.shape[1]} channels, kernel expects {kernel.shape[1]}")


# -- numpy backend -------------------------------------------------------------

def _im2col(x: np.ndarray, k: int) -> np.ndarray:
    """(B, C, H, W) -> (B*H*W, C*k*k) patch matrix for 'same' padding."""
    b, c, h, w = x.shape
    p = k // 2
    xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
    win = sliding_window_view(xp, (k, k), axis=(2, 3))  # (B, C, H, W, k, k)
    cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(b * h * w, c * k * k)
    return np.ascontiguousarray(cols)


def _np_forward(x, kernel):
    cols = _im2col(x, kernel.shape[2])
    b, _, h, w = x.shape
    o = kernel.shape[0]
    out = (cols @ kernel.reshape(o, -1).T).reshape(b, h, w, o)
    return np.ascontiguousarray(out.transpose(0, 3, 1, 2)), cols


def _np_weight_grad(g, kernel_shape, cols):
    b, o, h, w = g.shape
    g_flat = np.ascontiguousarray(g.transpose(0, 2, 3, 1).reshape(b * h * w, o))
    return (g_flat.T @ cols).reshape(kernel_shape)


def _np_input_grad(g, kernel):
    flipped = np.ascontiguousarray(
        kernel[:, :, ::-1, ::-1].transpose(1, 0, 2, 3))
    return _np_forward(g, flipped)[0]


# -- torch backend -------------------------------------------------------------

def _torch_forward(x, kernel):
    import torch.nn.functional as F
    xt = _torch.from_numpy(x)
    out = F.conv2d(xt, _torch.from_numpy(kernel), padding=kernel.shape[2] // 2)
    return out.numpy(), xt


def _torch_weight_grad(g, kernel_shape, xt):
    import torch.nn.grad as TG
    gw = TG.conv2d_weight(xt, kernel_shape, _torch.from_numpy(g),
                          padding=kernel_shape[2] // 2)
    return gw.numpy()


def _torch_input_grad(g, kernel):
    import torch.nn.functional as F
    # transpose convolution is the exact adjoint for stride-1 same padding
    gx = F.conv_transpose2d(_torch.from_numpy(g), _torch.from_numpy(kernel),
                            padding=kernel.shape[2] // 2)
    return gx.numpy()


# -- dispatch ------------------------------------------------------------------

def conv_forward(x: np.ndarray, kernel: np.ndarray):
    """Returns (output, context); the context feeds conv_weight_grad."""
    _check_channels(x, kernel)
    if active_backend() == "torch":
        return _torch_forward(x, kernel)
    return _np_forward(x, kernel)


def conv_weight_grad(g: np.ndarray, kernel_shape: tuple, ctx) -> np.ndarray:
    if active_backend() == "torch":
        return _torch_weight_grad(g, kernel_shape, ctx)
    return _np_weight_grad(g, kernel_shape, ctx)


def conv_input_grad(g: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    if active_backend() == "torch":
        return _torch_input_grad(g, kernel)
    return _np_input_grad(g, kernel)
