"""Binary file formats and image/CSV emission.

Dataset files ("RIMD"):
    magic 'RIMD' | u16 version | u32 record count
    per record: u32 metadata length | metadata JSON (UTF-8)
                u32 n_samples | 4 complex vectors (samples, clean,
                interference, noise), each n_samples little-endian f32
                (re, im) interleaved
    trailer: u32 CRC32 of everything between the header and the trailer

Checkpoint files ("RIMM"):
    magic 'RIMM' | u16 version | u32 json length | JSON block holding the
    architecture and a training-configuration echo | per-layer tensors
    (kernel_re, kernel_im, bias_re, bias_im; imaginary parts absent in
    real mode) as little-endian f32 | u8 adam flag | Adam first/second
    moments in parameter order | u64 step counter

Both formats round-trip bitwise: values are stored in f32, so a file
written from loaded data reproduces the original bytes.
"""

from __future__ import annotations

import dataclasses
import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .config import RunConfig, config_from_dict
from .cvnn import AdamState, ArchitectureSpec, ComplexConvLayer, CvFcnModel
from .errors import DataError, FileFormatError
from .radar import InterferenceParams, SceneSpec, SweepSignal, TargetParams

DATASET_MAGIC = b"RIMD"
CHECKPOINT_MAGIC = b"RIMM"
FORMAT_VERSION = 1


def _pack_complex_f32(vec: np.ndarray) -> bytes:
    out = np.empty((vec.size, 2), dtype="<f4")
    out[:, 0] = vec.real
    out[:, 1] = vec.imag
    return out.tobytes()


def _unpack_complex_f32(raw: bytes, n: int) -> np.ndarray:
    flat = np.frombuffer(raw, dtype="<f4", count=2 * n).reshape(n, 2)
    # assign parts separately: re + 1j*im would flip signed zeros
    out = np.empty(n, dtype=np.complex128)
    out.real = flat[:, 0]
    out.imag = flat[:, 1]
    return out


class _Reader:
    def __init__(self, raw: bytes, what: str):
        self.raw = raw
        self.pos = 0
        self.what = what

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.raw):
            raise FileFormatError(f"truncated {self.what} file")
        piece = self.raw[self.pos:self.pos + n]
        self.pos += n
        return piece

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]


# -- dataset files -------------------------------------------------------------

def _scene_to_dict(spec: SceneSpec) -> dict:
    return {
        "targets": [dataclasses.asdict(t) for t in spec.targets],
        "interferers": [dataclasses.asdict(i) for i in spec.interferers],
        "snr_db": spec.snr_db,
        "sinr_db": spec.sinr_db,
        "seed": spec.seed,
    }


def _scene_from_dict(data: dict) -> SceneSpec:
    return SceneSpec(
        targets=tuple(TargetParams(**t) for t in data["targets"]),
        interferers=tuple(InterferenceParams(**i) for i in data["interferers"]),
        snr_db=data["snr_db"], sinr_db=data["sinr_db"], seed=data["seed"])


def _record_metadata(sweep: SweepSignal, run_cfg: RunConfig | None) -> dict:
    meta = {
        "scene": _scene_to_dict(sweep.spec),
        "realized": {
            "snr_db": sweep.realized_snr_db,
            "sinr_db": sweep.realized_sinr_db,
            "interference_scale": sweep.interference_scale,
        },
        "support": [list(span) for span in sweep.interference_support],
        "n_samples": int(sweep.samples.size),
    }
    if run_cfg is not None:
        meta["config"] = run_cfg.to_dict()
    return meta


def write_dataset(path, sweeps: list[SweepSignal],
                  run_cfg: RunConfig | None = None) -> None:
    body = bytearray()
    for sweep in sweeps:
        n = sweep.samples.size
        if not (sweep.clean.size == sweep.interference.size
                == sweep.noise.size == n):
            raise DataError("record vectors have inconsistent lengths")
        meta = json.dumps(_record_metadata(sweep, run_cfg),
                          separators=(",", ":")).encode()
        body += struct.pack("<I", len(meta)) + meta
        body += struct.pack("<I", n)
        for vec in (sweep.samples, sweep.clean, sweep.interference, sweep.noise):
            body += _pack_complex_f32(vec)
    header = DATASET_MAGIC + struct.pack("<HI", FORMAT_VERSION, len(sweeps))
    trailer = struct.pack("<I", zlib.crc32(bytes(body)))
    Path(path).write_bytes(header + bytes(body) + trailer)


def read_dataset(path) -> tuple[list[SweepSignal], RunConfig | None]:
    raw = Path(path).read_bytes()
    r = _Reader(raw, "dataset")
    if r.take(4) != DATASET_MAGIC:
        raise FileFormatError("not a dataset file (bad magic)")
    if r.u16() != FORMAT_VERSION:
        raise FileFormatError("unsupported dataset version")
    count = r.u32()
    body_start = r.pos
    if len(raw) < body_start + 4:
        raise FileFormatError("truncated dataset file")
    stored_crc = struct.unpack("<I", raw[-4:])[0]
    if zlib.crc32(raw[body_start:-4]) != stored_crc:
        raise FileFormatError("dataset checksum mismatch")

    sweeps: list[SweepSignal] = []
    run_cfg: RunConfig | None = None
    for _ in range(count):
        meta = json.loads(r.take(r.u32()).decode())
        n = r.u32()
        vectors = [_unpack_complex_f32(r.take(8 * n), n) for _ in range(4)]
        realized = meta.get("realized", {})
        sweeps.append(SweepSignal(
            samples=vectors[0], clean=vectors[1], interference=vectors[2],
            noise=vectors[3],
            spec=_scene_from_dict(meta["scene"]),
            realized_snr_db=realized.get("snr_db"),
            realized_sinr_db=realized.get("sinr_db"),
            interference_scale=realized.get("interference_scale", 1.0),
            interference_support=[tuple(s) for s in meta.get("support", [])]))
        if run_cfg is None and "config" in meta:
            run_cfg = config_from_dict(meta["config"])
    if r.pos != len(raw) - 4:
        raise FileFormatError("dataset record region has trailing bytes")
    return sweeps, run_cfg


# -- checkpoint files ----------------------------------------------------------

def _param_order(layer: ComplexConvLayer) -> list[str]:
    if layer.is_complex:
        return ["kernel_re", "kernel_im", "bias_re", "bias_im"]
    return ["kernel_re", "bias_re"]


def write_checkpoint(path, model: CvFcnModel,
                     training_echo: dict | None = None) -> None:
    info = {
        "arch": dataclasses.asdict(model.arch),
        "training": training_echo or {},
    }
    blob = json.dumps(info, separators=(",", ":")).encode()
    body = bytearray()
    body += struct.pack("<I", len(blob)) + blob
    for layer in model.layers:
        params = layer.params()
        for name in _param_order(layer):
            body += params[name].astype("<f4").tobytes()
    body += struct.pack("<B", 1)
    for layer, moments in zip(model.layers, model.adam.moments):
        for name in _param_order(layer):
            m, v = moments[name]
            body += m.astype("<f4").tobytes()
            body += v.astype("<f4").tobytes()
    body += struct.pack("<Q", model.adam.step)
    header = CHECKPOINT_MAGIC + struct.pack("<H", FORMAT_VERSION)
    Path(path).write_bytes(header + bytes(body))


def read_checkpoint(path) -> tuple[CvFcnModel, dict]:
    raw = Path(path).read_bytes()
    r = _Reader(raw, "checkpoint")
    if r.take(4) != CHECKPOINT_MAGIC:
        raise FileFormatError("not a checkpoint file (bad magic)")
    if r.u16() != FORMAT_VERSION:
        raise FileFormatError("unsupported checkpoint version")
    info = json.loads(r.take(r.u32()).decode())
    try:
        arch = ArchitectureSpec(**info["arch"])
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"bad architecture block: {exc}") from None

    def tensor(shape) -> np.ndarray:
        count = int(np.prod(shape))
        return np.frombuffer(r.take(4 * count), dtype="<f4").reshape(shape) \
            .astype(np.float32)

    plan = arch.channel_plan()
    k = arch.kernel_size
    layers = []
    for i in range(arch.depth):
        c_in, c_out = plan[i], plan[i + 1]
        kshape = (c_out, c_in, k, k)
        activation = "crelu" if i < arch.depth - 1 else "none"
        if arch.mode == "complex":
            layers.append(ComplexConvLayer(
                tensor(kshape), tensor(kshape),
                tensor((c_out,)), tensor((c_out,)), activation))
        else:
            layers.append(ComplexConvLayer(
                tensor(kshape), None, tensor((c_out,)), None, activation))

    has_adam = r.take(1)[0]
    moments = []
    for layer in layers:
        layer_moments = {}
        for name in _param_order(layer):
            shape = layer.params()[name].shape
            if has_adam:
                layer_moments[name] = (tensor(shape), tensor(shape))
            else:
                layer_moments[name] = (np.zeros(shape, np.float32),
                                       np.zeros(shape, np.float32))
        moments.append(layer_moments)
    step = r.u64() if has_adam else 0
    if r.pos != len(raw):
        raise FileFormatError("checkpoint has trailing bytes")
    model = CvFcnModel(layers, arch, AdamState(step, moments))
    return model, info.get("training", {})


# -- rendering -----------------------------------------------------------------

def write_pgm(path, image: np.ndarray) -> None:
    """Binary NetPBM P5, maxval 255."""
    image = np.asarray(image, dtype=np.uint8)
    if image.ndim != 2:
        raise DataError("PGM image must be 2-D")
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(image.tobytes())


def spectrogram_to_image(data: np.ndarray, dynamic_range_db: float = 80.0,
                         floor_db: float = -200.0) -> np.ndarray:
    """Magnitude in dB mapped to uint8 over [peak - dynamic_range, peak]."""
    mag = np.abs(np.asarray(data))
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag)
    db = np.maximum(db, floor_db)
    top = float(db.max())
    clipped = np.clip(db, top - dynamic_range_db, top)
    return np.round((clipped - (top - dynamic_range_db))
                    / dynamic_range_db * 255.0).astype(np.uint8)
