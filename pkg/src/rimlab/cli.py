"""Command-line interface.

    rimlab synth  <config> --count N --seed S --out data.rimd
    rimlab train  --data data.rimd --out model.rimm [--lambda ...]
    rimlab infer  --model model.rimm --in data.rimd --out recovered.rimd
    rimlab eval   --model model.rimm --data data.rimd --report report.csv
    rimlab render --in data.rimd --index 0 --what spectrogram --out map.pgm

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
failure during training.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_run_config
from .cvnn import ArchitectureSpec, count_parameters
from .errors import ConfigError, DataError, NumericError, RimlabError
from .evaluate import (CfarConfig, cfar_detect, evaluate_method, oracle_mask,
                       write_report_csv)
from .loss import LossConfig
from .pipeline import run_inference
from .radar import generate_dataset
from .storage import (read_checkpoint, read_dataset, spectrogram_to_image,
                      write_checkpoint, write_dataset, write_pgm)
from .timefreq import range_profile, stft
from .training import train_model


def _parse_arch(text: str) -> ArchitectureSpec:
    kwargs = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ConfigError(f"bad --arch item {item!r} (expected key=value)")
        key, value = item.split("=", 1)
        key = key.strip()
        value = value.strip()
        if key in ("depth", "filters", "kernel"):
            kwargs["kernel_size" if key == "kernel" else key] = int(value)
        elif key == "mode":
            kwargs["mode"] = value
        elif key == "residual":
            kwargs["residual"] = value.lower() in ("1", "true", "yes")
        else:
            raise ConfigError(f"unknown --arch key {key!r}")
    return ArchitectureSpec(**kwargs)


def _sinr_histogram(sweeps) -> str:
    lines = []
    edges = list(range(-40, 25, 5))
    realized = [s.realized_sinr_db for s in sweeps if s.realized_sinr_db is not None]
    n_na = len(sweeps) - len(realized)
    lines.append(f"scenes: {len(sweeps)} ({n_na} without targets)")
    if realized:
        lines.append("realized SINR histogram (dB):")
        for lo, hi in zip(edges[:-1], edges[1:]):
            n = sum(1 for v in realized if lo <= v < hi or (hi == 20 and v == 20))
            lines.append(f"  [{lo:+4d},{hi:+4d}) {n:5d} " + "#" * min(n, 60))
        snrs = sorted({s.realized_snr_db for s in sweeps
                       if s.realized_snr_db is not None})
        lines.append(f"realized SNR range (dB): {snrs[0]:+.2f} .. {snrs[-1]:+.2f}")
    return "\n".join(lines)


def _cmd_synth(args) -> int:
    cfg = load_run_config(args.config)
    sweeps = generate_dataset(cfg.radar, args.count, args.seed, cfg.ranges)
    write_dataset(args.out, sweeps, cfg)
    print(_sinr_histogram(sweeps))
    print(f"wrote {args.out}")
    return 0


def _require_config(run_cfg: RunConfig | None) -> RunConfig:
    if run_cfg is None:
        raise DataError("dataset carries no generation config; cannot derive "
                        "STFT/chunk geometry")
    return run_cfg


def _cmd_train(args) -> int:
    sweeps, run_cfg = read_dataset(args.data)
    if not sweeps:
        raise DataError("training dataset is empty")
    cfg = _require_config(run_cfg)
    arch = _parse_arch(args.arch)
    result = train_model(
        sweeps, cfg.stft, cfg.split, arch,
        epochs=args.epochs, lr=args.lr, batch_size=args.batch,
        loss_cfg=LossConfig(l21_weight=args.l21_weight),
        seed=args.seed, verbose=args.verbose)
    echo = {"lambda": args.l21_weight, "lr": args.lr, "epochs": args.epochs,
            "batch": args.batch, "seed": args.seed}
    write_checkpoint(args.out, result.model, echo)
    loss_path = Path(args.out).with_suffix(".loss.csv")
    with open(loss_path, "w", newline="\n") as fh:
        fh.write("epoch,loss\n")
        for i, value in enumerate(result.epoch_losses, start=1):
            fh.write(f"{i},{value:.8e}\n")
    print(f"trained {arch.mode} model, depth {arch.depth}, "
          f"{count_parameters(result.model)} parameters")
    print(f"wrote {args.out} and {loss_path}")
    return 0


def _cmd_infer(args) -> int:
    model, _ = read_checkpoint(args.model)
    sweeps, run_cfg = read_dataset(args.input)
    cfg = _require_config(run_cfg)
    for sweep in sweeps:
        _, recovered = run_inference(model, sweep.samples, cfg.stft, cfg.split)
        sweep.clean = recovered
    write_dataset(args.out, sweeps, cfg)
    print(f"wrote {args.out} ({len(sweeps)} recovered records)")
    return 0


def _make_method(name: str, model, cfg: RunConfig):
    if name == "model":
        if model is None:
            raise ConfigError("method 'model' requires --model")
        return lambda sw: run_inference(model, sw.samples, cfg.stft, cfg.split)[1]
    if name == "identity":
        return lambda sw: sw.samples
    if name == "zero":
        return lambda sw: np.zeros_like(sw.samples)
    if name == "oracle-zero":
        return lambda sw: np.where(oracle_mask(sw), 0.0, sw.samples)
    if name == "cfar-zero":
        cfar = CfarConfig()
        return lambda sw: np.where(cfar_detect(sw, cfar), 0.0, sw.samples)
    raise ConfigError(f"unknown method {name!r}")


def _cmd_eval(args) -> int:
    sweeps, run_cfg = read_dataset(args.data)
    cfg = _require_config(run_cfg)
    model = None
    if args.model:
        model, _ = read_checkpoint(args.model)
    reports = []
    for name in args.methods.split(","):
        name = name.strip()
        method = _make_method(name, model, cfg)
        report = evaluate_method(method, sweeps, method_name=name)
        reports.append(report)
        scored = len(report.rows)
        mean_out = (sum(r.output_sinr_db for r in report.rows) / scored
                    if scored else float("nan"))
        print(f"{name}: {scored} scenes, mean output SINR {mean_out:+.2f} dB")
    write_report_csv(args.report, reports)
    print(f"wrote {args.report}")
    return 0


def _cmd_render(args) -> int:
    sweeps, run_cfg = read_dataset(args.input)
    if not 0 <= args.index < len(sweeps):
        raise DataError(f"record index {args.index} out of range "
                        f"(dataset has {len(sweeps)} records)")
    sweep = sweeps[args.index]
    signal = getattr(sweep, args.field)
    if args.what == "spectrogram":
        cfg = _require_config(run_cfg)
        spec = stft(signal, cfg.stft)
        write_pgm(args.out, spectrogram_to_image(spec.data))
    else:
        profile = range_profile(signal)
        fs = (run_cfg.radar.sampling_frequency_hz if run_cfg is not None
              else float(signal.size))  # fall back to bin indices
        freqs = np.fft.fftshift(np.fft.fftfreq(signal.size, d=1.0 / fs))
        with open(args.out, "w", newline="\n") as fh:
            fh.write("frequency_hz,magnitude_db\n")
            for f, v in zip(freqs, profile):
                fh.write(f"{f:.6f},{v:.6f}\n")
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rimlab",
        description="FMCW radar interference mitigation laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("config", help="preset name (paper-table1, desk-64) or JSON path")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="train a recovery network")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lambda", dest="l21_weight", type=float, default=400.0)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--arch", default="depth=10,filters=16,kernel=3,mode=complex")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("infer", help="run recovery over a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_infer)

    p = sub.add_parser("eval", help="score methods against clean references")
    p.add_argument("--model")
    p.add_argument("--data", required=True)
    p.add_argument("--methods", default="model,oracle-zero")
    p.add_argument("--report", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("render", help="emit a PGM spectrogram or profile CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--what", choices=("spectrogram", "range-profile"),
                   default="spectrogram")
    p.add_argument("--field", choices=("samples", "clean", "interference", "noise"),
                   default="samples")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_render)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except RimlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
