"""Complex-valued convolutional network: tensors, layers, forward and
backward passes, Adam updates.

A complex convolution W*h with W = A + jB and h = x + jy expands to

    real part:  A*x - B*y        imag part:  A*y + B*x

which is one real convolution with the block kernel [[A, -B], [B, A]]
acting on the channel-stacked tensor [x; y]. All hot-path math therefore
runs through a single real conv2d primitive (see ``_convops``); gradients
are taken by treating every real and imaginary parameter as an
independent real variable. The CReLU activation clamps real and imaginary
parts independently, which on the stacked representation is a plain ReLU.

Real-valued mode uses the same machinery with unstructured kernels: the
input's real/imaginary planes become two real channels and the last layer
emits two channels read back as real/imaginary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._convops import conv_forward, conv_input_grad, conv_weight_grad
from .errors import ConfigError, ShapeMismatchError

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class ComplexTensor4:
    """Rank-4 complex tensor stored as separate real/imaginary arrays of
    shape (batch, channels, height, width)."""

    re: np.ndarray
    im: np.ndarray

    def __post_init__(self):
        if self.re.shape != self.im.shape:
            raise ShapeMismatchError("re/im shapes differ")

    @property
    def shape(self) -> tuple:
        return self.re.shape

    @classmethod
    def from_complex(cls, values: np.ndarray, dtype=np.float64) -> "ComplexTensor4":
        values = np.asarray(values)
        return cls(np.ascontiguousarray(values.real, dtype=dtype),
                   np.ascontiguousarray(values.imag, dtype=dtype))

    def to_complex(self) -> np.ndarray:
        out = np.empty(self.re.shape, dtype=np.complex128)
        out.real = self.re
        out.imag = self.im
        return out

    def stacked(self) -> np.ndarray:
        """Channel-stacked real view: (batch, 2*channels, h, w)."""
        return np.concatenate([self.re, self.im], axis=1)

    @classmethod
    def from_stacked(cls, stacked: np.ndarray) -> "ComplexTensor4":
        half = stacked.shape[1] // 2
        return cls(stacked[:, :half], stacked[:, half:])


@dataclass
class ComplexConvLayer:
    """One convolution layer. Complex layers hold kernel_re (A) and
    kernel_im (B); real-mode layers leave the imaginary parts as None.
    ``activation`` is 'crelu' or 'none' (applied by the forward pass)."""

    kernel_re: np.ndarray
    kernel_im: np.ndarray | None
    bias_re: np.ndarray
    bias_im: np.ndarray | None
    activation: str = "crelu"

    @property
    def is_complex(self) -> bool:
        return self.kernel_im is not None

    @property
    def out_channels(self) -> int:
        return self.kernel_re.shape[0]

    @property
    def in_channels(self) -> int:
        return self.kernel_re.shape[1]

    def stacked_kernel(self) -> np.ndarray:
        if not self.is_complex:
            return self.kernel_re
        top = np.concatenate([self.kernel_re, -self.kernel_im], axis=1)
        bottom = np.concatenate([self.kernel_im, self.kernel_re], axis=1)
        return np.concatenate([top, bottom], axis=0)

    def stacked_bias(self) -> np.ndarray:
        if not self.is_complex:
            return self.bias_re
        return np.concatenate([self.bias_re, self.bias_im])

    def params(self) -> dict[str, np.ndarray]:
        out = {"kernel_re": self.kernel_re, "bias_re": self.bias_re}
        if self.is_complex:
            out["kernel_im"] = self.kernel_im
            out["bias_im"] = self.bias_im
        return out


@dataclass(frozen=True)
class ArchitectureSpec:
    """Network family: ``depth`` convolution layers of ``filters`` each
    (complex filters in complex mode, 2x real filters in real mode), 'same'
    zero padding, CReLU/ReLU after every layer except the last. The last
    layer always produces the single recovered map (1 complex channel, or
    2 real channels carrying its real/imaginary planes). ``residual`` adds
    an input-to-output skip connection."""

    depth: int = 10
    filters: int = 16
    kernel_size: int = 3
    mode: str = "complex"
    residual: bool = False

    def __post_init__(self):
        if self.depth < 2:
            raise ConfigError("depth must be >= 2")
        if self.filters < 1:
            raise ConfigError("filters must be >= 1")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ConfigError("kernel_size must be odd")
        if self.mode not in ("complex", "real"):
            raise ConfigError("mode must be 'complex' or 'real'")

    def channel_plan(self) -> list[int]:
        # Real mode takes ``filters`` at face value: a real network matched
        # against a complex one with x filters per layer is built with 2x.
        if self.mode == "complex":
            return [1] + [self.filters] * (self.depth - 1) + [1]
        return [2] + [self.filters] * (self.depth - 1) + [2]


@dataclass
class AdamState:
    step: int = 0
    moments: list[dict[str, tuple[np.ndarray, np.ndarray]]] = field(default_factory=list)


@dataclass
class CvFcnModel:
    layers: list[ComplexConvLayer]
    arch: ArchitectureSpec
    adam: AdamState = field(default_factory=AdamState)


def init_model(arch: ArchitectureSpec, rng: np.random.Generator,
               dtype=np.float64) -> CvFcnModel:
    """Initialize a model.

    Complex kernels get Rayleigh-distributed magnitudes with
    sigma = 1/sqrt(fan_in + fan_out) and uniform phases, so
    E[|W|^2] = 2*sigma^2. Real kernels use Glorot-uniform. Biases start at
    zero and Adam state is zeroed.
    """
    plan = arch.channel_plan()
    k = arch.kernel_size
    layers = []
    moments = []
    for i in range(arch.depth):
        c_in, c_out = plan[i], plan[i + 1]
        shape = (c_out, c_in, k, k)
        fan_in, fan_out = c_in * k * k, c_out * k * k
        if arch.mode == "complex":
            sigma = 1.0 / np.sqrt(fan_in + fan_out)
            mag = rng.rayleigh(sigma, size=shape)
            phase = rng.uniform(0.0, 2.0 * np.pi, size=shape)
            layer = ComplexConvLayer(
                kernel_re=(mag * np.cos(phase)).astype(dtype),
                kernel_im=(mag * np.sin(phase)).astype(dtype),
                bias_re=np.zeros(c_out, dtype=dtype),
                bias_im=np.zeros(c_out, dtype=dtype),
                activation="crelu" if i < arch.depth - 1 else "none")
        else:
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            layer = ComplexConvLayer(
                kernel_re=rng.uniform(-limit, limit, size=shape).astype(dtype),
                kernel_im=None,
                bias_re=np.zeros(c_out, dtype=dtype),
                bias_im=None,
                activation="crelu" if i < arch.depth - 1 else "none")
        layers.append(layer)
        moments.append({name: (np.zeros_like(p), np.zeros_like(p))
                        for name, p in layer.params().items()})
    return CvFcnModel(layers, arch, AdamState(0, moments))


def count_parameters(model: CvFcnModel) -> int:
    """Total real-valued parameters (a complex layer counts its real and
    imaginary components separately)."""
    return sum(p.size for layer in model.layers for p in layer.params().values())


# -- public layer ops ---------------------------------------------------------

def complex_conv2d(inp: ComplexTensor4, layer: ComplexConvLayer) -> ComplexTensor4:
    """Single convolution, no activation.

    Complex layers implement the block-kernel expansion above. Real-mode
    layers see the input's real/imaginary planes as independent stacked
    channels, and their output channels are read back the same way
    (first half real, second half imaginary).
    """
    out, _ = conv_forward(inp.stacked(), layer.stacked_kernel())
    out += layer.stacked_bias()[None, :, None, None]
    return ComplexTensor4.from_stacked(out)


def crelu(inp: ComplexTensor4) -> ComplexTensor4:
    """ReLU applied independently to real and imaginary parts."""
    return ComplexTensor4(np.maximum(inp.re, 0.0), np.maximum(inp.im, 0.0))


# -- forward / backward -------------------------------------------------------

def _check_input(model: CvFcnModel, inp: ComplexTensor4) -> None:
    if inp.re.ndim != 4:
        raise ShapeMismatchError("network input must be rank-4")
    if inp.re.shape[1] != 1:
        raise ShapeMismatchError("network input must have 1 complex channel")


def _forward_stacked(model: CvFcnModel, x: np.ndarray,
                     keep_cache: bool):
    """Run the stacked-real network. Returns (output, cache); the cache
    holds per-layer conv contexts and activation masks."""
    cache = [] if keep_cache else None
    h = x
    for layer in model.layers:
        kernel = layer.stacked_kernel()
        out, ctx = conv_forward(h, kernel)
        out += layer.stacked_bias()[None, :, None, None]
        if layer.activation == "crelu":
            np.maximum(out, 0.0, out=out)
            mask = out > 0.0
        else:
            mask = None
        if keep_cache:
            cache.append((ctx, mask, h.shape))
        h = out
    if model.arch.residual:
        h = h + x
    return h, cache


def forward(model: CvFcnModel, inp: ComplexTensor4) -> ComplexTensor4:
    """Full forward pass: conv + CReLU for every layer but the last,
    plain conv for the last, optional residual skip. Spatial shape is
    preserved throughout ('same' padding)."""
    _check_input(model, inp)
    out, _ = _forward_stacked(model, inp.stacked(), keep_cache=False)
    return ComplexTensor4.from_stacked(out)


def forward_with_cache(model: CvFcnModel, inp: ComplexTensor4):
    _check_input(model, inp)
    out, cache = _forward_stacked(model, inp.stacked(), keep_cache=True)
    return ComplexTensor4.from_stacked(out), cache


def _split_stacked_kernel_grad(layer: ComplexConvLayer,
                               g_kernel: np.ndarray,
                               g_bias: np.ndarray) -> dict[str, np.ndarray]:
    if not layer.is_complex:
        return {"kernel_re": g_kernel, "bias_re": g_bias}
    o = layer.out_channels
    c = layer.in_channels
    # A appears in both diagonal blocks, B in the off-diagonal ones.
    g_a = g_kernel[:o, :c] + g_kernel[o:, c:]
    g_b = g_kernel[o:, :c] - g_kernel[:o, c:]
    return {"kernel_re": g_a, "kernel_im": g_b,
            "bias_re": g_bias[:o], "bias_im": g_bias[o:]}


def backward_from_cache(model: CvFcnModel, cache,
                        loss_grad: ComplexTensor4) -> list[dict[str, np.ndarray]]:
    # The residual skip (if any) carries no parameters, so it contributes
    # nothing to parameter gradients: d(out)/d(chain output) is identity.
    g = loss_grad.stacked()
    grads: list[dict[str, np.ndarray] | None] = [None] * len(model.layers)
    for i in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[i]
        ctx, mask, in_shape = cache[i]
        if mask is not None:
            g = g * mask
        kernel = layer.stacked_kernel()
        g_kernel = conv_weight_grad(g, kernel.shape, ctx)
        g_bias = g.sum(axis=(0, 2, 3))
        grads[i] = _split_stacked_kernel_grad(layer, g_kernel, g_bias)
        if i > 0:
            g = conv_input_grad(g, kernel)
            if in_shape[1] != g.shape[1]:
                raise ShapeMismatchError("gradient channel bookkeeping failed")
    return grads


def backward(model: CvFcnModel, inp: ComplexTensor4,
             loss_grad: ComplexTensor4) -> list[dict[str, np.ndarray]]:
    """Exact gradients of a scalar loss with respect to every parameter.

    ``loss_grad`` carries d(loss)/d(output real part) in ``re`` and
    d(loss)/d(output imaginary part) in ``im``.
    """
    out, cache = forward_with_cache(model, inp)
    if loss_grad.shape != out.shape:
        raise ShapeMismatchError("loss gradient shape != forward output shape")
    return backward_from_cache(model, cache, loss_grad)


def adam_step(model: CvFcnModel, grads: list[dict[str, np.ndarray]],
              lr: float) -> CvFcnModel:
    """One Adam update (beta1=0.9, beta2=0.999, eps=1e-8, bias-corrected).
    The model is updated in place and returned."""
    state = model.adam
    state.step += 1
    t = state.step
    corr1 = 1.0 - ADAM_BETA1 ** t
    corr2 = 1.0 - ADAM_BETA2 ** t
    for layer, layer_grads, layer_moments in zip(model.layers, grads, state.moments):
        params = layer.params()
        for name, p in params.items():
            g = layer_grads[name]
            if g.shape != p.shape:
                raise ShapeMismatchError(f"gradient shape mismatch for {name}")
            m, v = layer_moments[name]
            m *= ADAM_BETA1
            m += (1.0 - ADAM_BETA1) * g
            v *= ADAM_BETA2
            v += (1.0 - ADAM_BETA2) * (g * g)
            p -= lr * (m / corr1) / (np.sqrt(v / corr2) + ADAM_EPS)
    return model
