"""Pitch interpolation and additive sine-excitation synthesis.

The excitation is a sum of sinusoids at every integer multiple of the
fundamental that fits below Nyquist.  A single double-precision base phase
accumulator runs through each voiced region; harmonic ``k`` uses ``k`` times
the base phase, so all harmonics stay phase-locked and the accumulator drift
stays bounded over long files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import AliasingError, ConfigError, DomainError, LengthMismatchError

TAU = 2.0 * math.pi

DEFAULT_SAMPLE_RATE = 16000
DEFAULT_HOP_SECONDS = 0.010


class PhaseInit(Enum):
    """Base-phase policy at each unvoiced-to-voiced onset."""

    ZERO = "zero"
    SEEDED_RANDOM = "random"


@dataclass(frozen=True)
class F0Track:
    """Frame-level pitch sequence in Hz; 0 marks unvoiced frames."""

    values: np.ndarray
    hop_seconds: float = DEFAULT_HOP_SECONDS

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if v.ndim != 1:
            raise ConfigError("f0 track must be one-dimensional")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise DomainError("f0 values must be finite and >= 0")
        if self.hop_seconds <= 0:
            raise ConfigError("hop_seconds must be > 0")

    def __len__(self):
        return len(self.values)

    @property
    def voiced_mask(self) -> np.ndarray:
        return self.values > 0


@dataclass(frozen=True)
class SampleF0:
    """Sample-level pitch sequence, one Hz value per audio sample."""

    values: np.ndarray
    sample_rate: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise DomainError("f0 values must be finite and >= 0")
        if self.sample_rate <= 0:
            raise ConfigError("sample_rate must be > 0")

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class AudioSignal:
    """Mono waveform with its sample rate; nominal amplitude range [-1, 1]."""

    samples: np.ndarray
    sample_rate: float = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", s)
        if s.ndim != 1:
            raise ConfigError("audio must be mono (one-dimensional)")
        if not np.all(np.isfinite(s)):
            raise DomainError("audio samples must be finite")
        if self.sample_rate <= 0:
            raise ConfigError("sample_rate must be > 0")

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class ExcitationConfig:
    """Synthesis knobs the pitch track does not determine.

    amplitude is a global scale applied to the harmonic sum; the default 0.1
    keeps an 80-harmonic excitation inside the nominal range.  1.0 recovers
    the plain unit-amplitude sum.  k_max_cap freezes the harmonic count for
    experiments where harmonics popping in and out is unwanted.
    """

    amplitude: float = 0.1
    phase_init: PhaseInit = PhaseInit.ZERO
    seed: int = 0
    k_max_cap: int | None = None

    def __post_init__(self):
        if not (self.amplitude > 0):
            raise ConfigError("amplitude must be > 0")
        if self.k_max_cap is not None and self.k_max_cap < 1:
            raise ConfigError("k_max_cap must be >= 1")


def _voiced_runs(mask: np.ndarray):
    """Yield (start, stop) of maximal True runs, stop exclusive."""
    idx = np.flatnonzero(np.diff(np.concatenate(([0], mask.view(np.int8), [0]))))
    return list(zip(idx[0::2], idx[1::2]))


def interpolate_f0(track: F0Track, sample_rate: float, n_samples: int) -> SampleF0:
    """Linearly interpolate a frame-level track to sample level.

    Frame m sits at sample ``m * hop``.  Interpolation runs only between the
    centers of frames inside the same voiced run; the run's endpoint values
    are held outward to the voicing boundary, and every sample mapped to an
    unvoiced frame is exactly zero.
    """
    hop = track.hop_seconds * sample_rate
    if n_samples < 0:
        raise DomainError("n_samples must be >= 0")
    max_samples = math.ceil(len(track) * hop) + int(round(hop))
    if n_samples > max_samples:
        raise LengthMismatchError(
            f"n_samples={n_samples} exceeds track coverage {max_samples}"
        )

    out = np.zeros(n_samples)
    if len(track) == 0:
        return SampleF0(out, sample_rate)

    n = np.arange(n_samples)
    frame_idx = np.minimum((np.floor((n + hop / 2) / hop)).astype(np.intp), len(track) - 1)
    for start, stop in _voiced_runs(track.voiced_mask):
        sel = (frame_idx >= start) & (frame_idx < stop)
        if not sel.any():
            continue
        centers = np.arange(start, stop) * hop
        out[sel] = np.interp(n[sel], centers, track.values[start:stop])
    return SampleF0(out, sample_rate)


def harmonic_count(f0: float, sample_rate: float) -> int:
    """Number of harmonics of f0 that fit at or below Nyquist."""
    if f0 <= 0:
        raise DomainError(f"f0 must be > 0, got {f0}")
    return int(math.floor(sample_rate / (2.0 * f0)))


def sine_excitation(f0: SampleF0, cfg: ExcitationConfig = ExcitationConfig()) -> AudioSignal:
    """Synthesize the harmonic excitation driven by a sample-level pitch.

    Voiced samples are ``amplitude * sum_k sin(k * phi[n])`` with the base
    phase accumulated as ``phi[n] = phi[n-1] + 2*pi*f0[n]/fs`` and the
    harmonic count recomputed per sample; unvoiced samples are exactly zero.
    The base phase restarts per cfg.phase_init at each voiced onset.
    """
    v = f0.values
    fs = f0.sample_rate
    if np.any(v >= fs / 2):
        raise AliasingError("f0 at or above Nyquist")

    out = np.zeros(len(v))
    rng = np.random.default_rng(cfg.seed) if cfg.phase_init is PhaseInit.SEEDED_RANDOM else None

    for start, stop in _voiced_runs(v > 0):
        seg = v[start:stop]
        phi0 = 0.0 if rng is None else float(rng.uniform(0.0, TAU))
        base = (phi0 + np.cumsum(TAU * seg / fs)) % TAU

        k_count = np.floor(fs / (2.0 * seg)).astype(np.intp)
        if cfg.k_max_cap is not None:
            np.minimum(k_count, cfg.k_max_cap, out=k_count)

        acc = np.zeros(stop - start)
        for k in range(1, int(k_count.max(initial=0)) + 1):
            m = k_count >= k
            acc[m] += np.sin((k * base[m]) % TAU)
        out[start:stop] = cfg.amplitude * acc

    return AudioSignal(out, fs)


def gaussian_noise(n_samples: int, sample_rate: float, seed: int) -> AudioSignal:
    """Seeded i.i.d. standard-normal noise; identical seed, identical bits."""
    if n_samples < 0:
        raise DomainError("n_samples must be >= 0")
    rng = np.random.default_rng(seed)
    return AudioSignal(rng.standard_normal(n_samples), sample_rate)


def read_f0_track(path, hop_seconds: float = DEFAULT_HOP_SECONDS) -> F0Track:
    """Read a plain-text pitch track: one decimal Hz value per line."""
    values = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise ConfigError(f"bad f0 value on line {line_no}: {line!r}", path=path)
    return F0Track(np.array(values, dtype=np.float64), hop_seconds)


def write_f0_track(path, track: F0Track) -> None:
    with open(path, "w") as fh:
        for value in track.values:
            fh.write(f"{value:.6f}\n")
