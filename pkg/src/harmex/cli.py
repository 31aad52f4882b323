"""Command-line entry point tying the pipeline together.

Subcommands: excite, filter, estimate, fit, mel, loudness, metrics,
condition, demo.  Options resolve as defaults < config file (--config or
$HARMEX_CONFIG) < explicit flags, and every run writes its fully-resolved
configuration next to its outputs so it can be reproduced from that file.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import conditioning as cond
from . import ltv, metrics, signal_core, spectral, tensor_io, wav_io
from .errors import ConfigError, HarmexError
from .signal_core import (
    AudioSignal,
    ExcitationConfig,
    F0Track,
    PhaseInit,
    gaussian_noise,
    interpolate_f0,
    read_f0_track,
    sine_excitation,
    write_f0_track,
)
from .spectral import StftConfig

CONFIG_ENV = "HARMEX_CONFIG"


def _load_config(path: str | None) -> dict:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        with open(path) as fh:
            config = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("config file not found", path=path)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON config: {exc}", path=path)
    if not isinstance(config, dict):
        raise ConfigError("config file must hold a JSON object", path=path)
    return config


def _resolve(args: argparse.Namespace, defaults: dict, config: dict) -> dict:
    """defaults < config file < explicit flags (argparse leaves unset as None)."""
    resolved = dict(defaults)
    for key in defaults:
        if key in config:
            resolved[key] = config[key]
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    return resolved


def _write_run_config(path, subcommand: str, resolved: dict) -> None:
    payload = {"subcommand": subcommand}
    payload.update({k: v for k, v in sorted(resolved.items())})
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=False)
        fh.write("\n")


def _stft_config(resolved: dict) -> StftConfig:
    return StftConfig(
        fft_size=int(resolved["fft_size"]),
        win_size=int(resolved["win_size"]),
        hop_size=int(resolved["hop_size"]),
    )


def _wav_spec(resolved: dict, sample_rate: float) -> wav_io.WavSpec:
    return wav_io.WavSpec(
        sample_rate=sample_rate, encoding=wav_io.WavEncoding(resolved["encoding"])
    )


# ---------------------------------------------------------------- subcommands


def _cmd_excite(args, config):
    defaults = {
        "sample_rate": 16000,
        "hop": 0.010,
        "amplitude": 0.1,
        "phase_init": "zero",
        "seed": 0,
        "k_max": None,
        "encoding": "float32",
        "n_samples": None,
    }
    r = _resolve(args, defaults, config)
    track = read_f0_track(args.f0_file, hop_seconds=float(r["hop"]))
    fs = float(r["sample_rate"])
    n_samples = r["n_samples"] or int(round(len(track) * float(r["hop"]) * fs))
    sample_f0 = interpolate_f0(track, fs, int(n_samples))
    cfg = ExcitationConfig(
        amplitude=float(r["amplitude"]),
        phase_init=PhaseInit.SEEDED_RANDOM if r["phase_init"] == "random" else PhaseInit.ZERO,
        seed=int(r["seed"]),
        k_max_cap=int(r["k_max"]) if r["k_max"] else None,
    )
    excitation = sine_excitation(sample_f0, cfg)
    wav_io.write_wav(args.out, excitation, _wav_spec(r, fs))
    _write_run_config(f"{args.out}.run.json", "excite", {**r, "f0_file": args.f0_file, "out": args.out})
    return 0


def _cmd_filter(args, config):
    defaults = {"encoding": "float32", "interpolate_taps": True}
    r = _resolve(args, defaults, config)
    x = wav_io.read_wav(args.wav_file)
    coeffs = ltv.read_coeffs(args.coeff_file)
    y = ltv.apply_ltv(x, coeffs, interpolate_taps=bool(r["interpolate_taps"]))
    wav_io.write_wav(args.out, y, _wav_spec(r, x.sample_rate))
    _write_run_config(
        f"{args.out}.run.json",
        "filter",
        {**r, "wav_file": args.wav_file, "coeff_file": args.coeff_file, "out": args.out},
    )
    return 0


def _cmd_estimate(args, config):
    defaults = {
        "sample_rate": 16000,
        "fft_size": 1024,
        "win_size": 640,
        "hop_size": 160,
        "f_min": 0.0,
        "f_max": 8000.0,
        "n_taps": 64,
        "floor_db": -50.0,
    }
    r = _resolve(args, defaults, config)
    frames, hop_seconds = tensor_io.read_feature_file(args.mel_file)
    cfg = _stft_config(r)
    mel = spectral.MelSpectrogram(
        frames.astype(np.float64),
        cfg,
        float(r["sample_rate"]),
        (float(r["f_min"]), float(r["f_max"])),
    )
    coeffs = ltv.estimate_coeffs_from_mel(mel, n_taps=int(r["n_taps"]), floor_db=float(r["floor_db"]))
    ltv.write_coeffs(args.out, coeffs)
    _write_run_config(
        f"{args.out}.run.json",
        "estimate",
        {**r, "mel_file": args.mel_file, "out": args.out, "hop_seconds": hop_seconds},
    )
    return 0


def _cmd_fit(args, config):
    defaults = {"n_taps": 64, "ridge_lambda": 1e-6, "hop": 0.010}
    r = _resolve(args, defaults, config)
    excitation = wav_io.read_wav(args.excitation_wav)
    target = wav_io.read_wav(args.target_wav)
    cfg = ltv.FitConfig(
        n_taps=int(r["n_taps"]),
        ridge_lambda=float(r["ridge_lambda"]),
        frame_hop_seconds=float(r["hop"]),
    )
    coeffs = ltv.fit_coeffs_least_squares(excitation, target, cfg)
    ltv.write_coeffs(args.out, coeffs)
    _write_run_config(
        f"{args.out}.run.json",
        "fit",
        {**r, "excitation_wav": args.excitation_wav, "target_wav": args.target_wav, "out": args.out},
    )
    return 0


def _cmd_mel(args, config):
    defaults = {
        "fft_size": 1024,
        "win_size": 640,
        "hop_size": 160,
        "n_mels": 80,
        "f_min": 0.0,
        "f_max": 8000.0,
    }
    r = _resolve(args, defaults, config)
    x = wav_io.read_wav(args.wav_file)
    mel = spectral.mel_spectrogram(
        x,
        _stft_config(r),
        n_mels=int(r["n_mels"]),
        f_min=float(r["f_min"]),
        f_max=float(r["f_max"]),
    )
    tensor_io.write_feature_file(args.out, mel.frames, mel.hop_seconds)
    _write_run_config(f"{args.out}.run.json", "mel", {**r, "wav_file": args.wav_file, "out": args.out})
    return 0


def _cmd_loudness(args, config):
    defaults = {"hop_size": 160}
    r = _resolve(args, defaults, config)
    x = wav_io.read_wav(args.wav_file)
    track = spectral.loudness(x, hop=int(r["hop_size"]))
    tensor_io.write_feature_file(args.out, track.values[:, None], track.hop_seconds)
    _write_run_config(
        f"{args.out}.run.json", "loudness", {**r, "wav_file": args.wav_file, "out": args.out}
    )
    return 0


def _cmd_metrics(args, config):
    defaults = {"hop": 0.010, "search_cents": 200.0, "energy_threshold_db": -40.0}
    r = _resolve(args, defaults, config)
    x = wav_io.read_wav(args.wav_x)
    y = wav_io.read_wav(args.wav_y)
    result = {}
    if args.mr_stft:
        loss = metrics.mr_stft_loss(x, y)
        result["mr_stft_sc"] = loss.sc
        result["mr_stft_mag"] = loss.mag
        result["mr_stft_total"] = loss.total
    if args.mel_mae:
        result["mel_mae"] = metrics.mel_mae(spectral.mel_spectrogram(x), spectral.mel_spectrogram(y))
    if args.pitch_jitter or args.uv_error:
        if not args.f0:
            raise ConfigError("--pitch-jitter/--uv-error need an --f0 track")
        track = read_f0_track(args.f0, hop_seconds=float(r["hop"]))
        if args.pitch_jitter:
            result["pitch_jitter_cents"] = metrics.pitch_jitter(
                x, track, search_cents=float(r["search_cents"])
            )
        if args.uv_error:
            result["uv_error_rate"] = metrics.uv_error_rate(
                x, track, energy_threshold_db=float(r["energy_threshold_db"])
            )
    print(json.dumps(result))
    return 0


def _cmd_condition(args, config):
    defaults = {"factors": "8,6,5", "channels": None}
    r = _resolve(args, defaults, config)
    signals = {}
    for name, path in (
        ("noise", args.noise_wav),
        ("raw_excitation", args.raw_wav),
        ("filtered_excitation", args.filtered_wav),
    ):
        if path:
            signals[name] = wav_io.read_wav(path)
    if r["channels"]:
        wanted = [c.strip() for c in str(r["channels"]).split(",") if c.strip()]
        unknown = set(wanted) - set(cond.CHANNEL_ORDER)
        if unknown:
            raise ConfigError(f"unknown channels: {sorted(unknown)}")
        signals = {k: v for k, v in signals.items() if k in wanted}
    bundle = cond.stack_channels(**signals)
    factors = tuple(int(f) for f in str(r["factors"]).split(","))
    pyramid = cond.downsample_multiscale(bundle, factors)
    written = cond.export_conditioning(pyramid, args.out_prefix)
    _write_run_config(
        f"{args.out_prefix}_run.json",
        "condition",
        {
            **r,
            "noise_wav": args.noise_wav,
            "raw_wav": args.raw_wav,
            "filtered_wav": args.filtered_wav,
            "out_prefix": args.out_prefix,
            "written": written,
        },
    )
    return 0


def _demo_formant_coeffs(n_frames: int, stft: StftConfig, fs: float, rng) -> ltv.LtvFirCoeffs:
    """Slowly drifting formant-like spectral envelopes, one FIR per frame."""
    n_bins = stft.n_bins
    freqs = np.arange(n_bins) * fs / stft.fft_size
    centers = np.array([700.0, 1200.0, 2600.0])
    widths = np.array([130.0, 180.0, 280.0])
    gains_db = np.array([0.0, -6.0, -12.0])
    drift = rng.uniform(-0.08, 0.08, size=3)

    taps = np.zeros((n_frames, 64))
    for f in range(n_frames):
        sweep = centers * (1.0 + drift * math.sin(2 * math.pi * f / max(n_frames, 1)))
        mag_db = np.full(n_bins, -45.0)
        for c, w, g in zip(sweep, widths, gains_db):
            mag_db = np.maximum(mag_db, g - 0.5 * ((freqs - c) / w) ** 2)
        mag_db -= 20.0 * (freqs / fs)  # gentle spectral tilt
        taps[f] = ltv.minimum_phase_fir(10 ** (mag_db / 20.0), 64, stft.fft_size)
    return ltv.LtvFirCoeffs(taps, stft.hop_size / fs, fs)


def _cmd_demo(args, config):
    defaults = {"sample_rate": 16000, "seed": 1234, "duration": 2.0, "hop": 0.010}
    r = _resolve(args, defaults, config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fs = float(r["sample_rate"])
    hop_s = float(r["hop"])
    rng = np.random.default_rng(int(r["seed"]))

    n_frames = int(round(float(r["duration"]) / hop_s))
    frame_t = np.arange(n_frames) * hop_s
    f0 = 220.0 * (1.0 + 0.02 * np.sin(2 * math.pi * 5.0 * frame_t))
    voiced = (frame_t >= 0.2) & (frame_t <= float(r["duration"]) - 0.2)
    track = F0Track(np.where(voiced, f0, 0.0), hop_s)
    write_f0_track(out / "f0.txt", track)

    n_samples = int(round(float(r["duration"]) * fs))
    sample_f0 = interpolate_f0(track, fs, n_samples)
    excitation = sine_excitation(sample_f0, ExcitationConfig(seed=int(r["seed"])))
    wav_io.write_wav(out / "excitation.wav", excitation)

    stft = StftConfig(hop_size=int(round(hop_s * fs)))
    envelope = _demo_formant_coeffs(n_frames, stft, fs, rng)
    target = ltv.apply_ltv(excitation, envelope)
    wav_io.write_wav(out / "target.wav", target)

    mel = spectral.mel_spectrogram(target, stft)
    tensor_io.write_feature_file(out / "target_mel.hmx", mel.frames, mel.hop_seconds)
    loud = spectral.loudness(target, hop=stft.hop_size)
    tensor_io.write_feature_file(out / "target_loudness.hmx", loud.values[:, None], loud.hop_seconds)

    fitted = ltv.fit_coeffs_least_squares(excitation, target, ltv.FitConfig(frame_hop_seconds=hop_s))
    ltv.write_coeffs(out / "fitted.ltvf", fitted)
    filtered = ltv.apply_ltv(excitation, fitted)
    wav_io.write_wav(out / "filtered.wav", filtered)

    report = {
        "mr_stft_raw_vs_target": metrics.mr_stft_loss(excitation, target).total,
        "mr_stft_filtered_vs_target": metrics.mr_stft_loss(filtered, target).total,
        "pitch_jitter_cents": metrics.pitch_jitter(excitation, track),
        "uv_error_rate": metrics.uv_error_rate(excitation, track),
    }
    with open(out / "metrics.json", "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")

    noise = gaussian_noise(n_samples, fs, int(r["seed"]) + 1)
    bundle = cond.stack_channels(
        noise=noise, raw_excitation=excitation, filtered_excitation=filtered
    )
    pyramid = cond.downsample_multiscale(bundle)
    cond.export_conditioning(pyramid, out / "conditioning")

    _write_run_config(out / "run_config.json", "demo", {**r, "out_dir": str(out)})
    return 0


# --------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harmex",
        description="Harmonic excitation synthesis, LTV filtering, and vocoder conditioning",
    )
    parser.add_argument("--config", help=f"JSON config file (or ${CONFIG_ENV})")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("excite", help="synthesize sine excitation from an f0 track file")
    p.add_argument("f0_file")
    p.add_argument("--out", required=True)
    p.add_argument("--sample-rate", dest="sample_rate", type=float)
    p.add_argument("--hop", type=float, help="f0 frame hop in seconds")
    p.add_argument("--amplitude", type=float)
    p.add_argument("--phase-init", dest="phase_init", choices=["zero", "random"])
    p.add_argument("--seed", type=int)
    p.add_argument("--k-max", dest="k_max", type=int)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--encoding", choices=["float32", "pcm16"])
    p.set_defaults(func=_cmd_excite)

    p = sub.add_parser("filter", help="apply a coefficient file to a WAV")
    p.add_argument("wav_file")
    p.add_argument("coeff_file")
    p.add_argument("--out", required=True)
    p.add_argument("--encoding", choices=["float32", "pcm16"])
    p.add_argument(
        "--no-interp-taps", dest="interpolate_taps", action="store_false", default=None
    )
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("estimate", help="mel feature file -> minimum-phase coefficients")
    p.add_argument("mel_file")
    p.add_argument("--out", required=True)
    p.add_argument("--sample-rate", dest="sample_rate", type=float)
    p.add_argument("--fft-size", dest="fft_size", type=int)
    p.add_argument("--win-size", dest="win_size", type=int)
    p.add_argument("--hop-size", dest="hop_size", type=int)
    p.add_argument("--f-min", dest="f_min", type=float)
    p.add_argument("--f-max", dest="f_max", type=float)
    p.add_argument("--n-taps", dest="n_taps", type=int)
    p.add_argument("--floor-db", dest="floor_db", type=float)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("fit", help="least-squares coefficients from excitation and target WAVs")
    p.add_argument("excitation_wav")
    p.add_argument("target_wav")
    p.add_argument("--out", required=True)
    p.add_argument("--n-taps", dest="n_taps", type=int)
    p.add_argument("--ridge-lambda", dest="ridge_lambda", type=float)
    p.add_argument("--hop", type=float)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("mel", help="WAV -> log-mel feature file")
    p.add_argument("wav_file")
    p.add_argument("--out", required=True)
    p.add_argument("--fft-size", dest="fft_size", type=int)
    p.add_argument("--win-size", dest="win_size", type=int)
    p.add_argument("--hop-size", dest="hop_size", type=int)
    p.add_argument("--n-mels", dest="n_mels", type=int)
    p.add_argument("--f-min", dest="f_min", type=float)
    p.add_argument("--f-max", dest="f_max", type=float)
    p.set_defaults(func=_cmd_mel)

    p = sub.add_parser("loudness", help="WAV -> log-RMS feature file")
    p.add_argument("wav_file")
    p.add_argument("--out", required=True)
    p.add_argument("--hop-size", dest="hop_size", type=int)
    p.set_defaults(func=_cmd_loudness)

    p = sub.add_parser("metrics", help="compare two WAVs; emits one JSON line")
    p.add_argument("wav_x")
    p.add_argument("wav_y")
    p.add_argument("--f0", help="reference f0 track for pitch/voicing metrics")
    p.add_argument("--hop", type=float)
    p.add_argument("--mr-stft", dest="mr_stft", action="store_true")
    p.add_argument("--mel-mae", dest="mel_mae", action="store_true")
    p.add_argument("--pitch-jitter", dest="pitch_jitter", action="store_true")
    p.add_argument("--uv-error", dest="uv_error", action="store_true")
    p.add_argument("--search-cents", dest="search_cents", type=float)
    p.add_argument("--energy-threshold-db", dest="energy_threshold_db", type=float)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("condition", help="stack channels and export multi-scale tensors")
    p.add_argument("--noise-wav", dest="noise_wav")
    p.add_argument("--raw-wav", dest="raw_wav")
    p.add_argument("--filtered-wav", dest="filtered_wav")
    p.add_argument("--factors")
    p.add_argument("--channels")
    p.add_argument("--out-prefix", dest="out_prefix", required=True)
    p.set_defaults(func=_cmd_condition)

    p = sub.add_parser("demo", help="end-to-end synthetic-vowel walkthrough")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--sample-rate", dest="sample_rate", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--duration", type=float)
    p.add_argument("--hop", type=float)
    p.set_defaults(func=_cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        return args.func(args, config)
    except HarmexError as exc:
        print(
            json.dumps({"category": exc.category, "message": str(exc)}),
            file=sys.stderr,
        )
        return 1
    except FileNotFoundError as exc:
        print(
            json.dumps({"category": "io", "message": str(exc)}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
