"""STFT magnitudes, 80-band log-mel analysis, and log-RMS loudness.

All three extractors share the frame-count contract
``n_frames = ceil(n_samples / hop)`` so features computed at the same hop
line up frame for frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

from .errors import ConfigError, DomainError
from .signal_core import AudioSignal

MEL_FLOOR = 1e-5


@dataclass(frozen=True)
class StftConfig:
    """Analysis frame geometry.  Defaults give a 10 ms hop at 16 kHz."""

    fft_size: int = 1024
    win_size: int = 640
    hop_size: int = 160

    def __post_init__(self):
        if not (0 < self.hop_size <= self.win_size <= self.fft_size):
            raise ConfigError(
                f"need 0 < hop <= win <= fft, got {self.hop_size}/{self.win_size}/{self.fft_size}"
            )

    @property
    def n_bins(self) -> int:
        return self.fft_size // 2 + 1


@dataclass(frozen=True)
class MelSpectrogram:
    """n_frames x n_mels natural-log mel energies plus their provenance."""

    frames: np.ndarray
    config: StftConfig
    sample_rate: float
    mel_range: tuple[float, float] = (0.0, 8000.0)
    floor: float = MEL_FLOOR

    def __post_init__(self):
        f = np.asarray(self.frames, dtype=np.float64)
        object.__setattr__(self, "frames", f)
        if f.ndim != 2:
            raise ConfigError("mel frames must be 2-D (n_frames x n_mels)")
        if not np.all(np.isfinite(f)):
            raise DomainError("mel values must be finite")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_mels(self) -> int:
        return self.frames.shape[1]

    @property
    def hop_seconds(self) -> float:
        return self.config.hop_size / self.sample_rate


@dataclass(frozen=True)
class LoudnessTrack:
    """Per-frame log-RMS."""

    values: np.ndarray
    hop_seconds: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if not np.all(np.isfinite(v)):
            raise DomainError("loudness values must be finite")

    def __len__(self):
        return len(self.values)


def n_frames_for(n_samples: int, hop: int) -> int:
    return math.ceil(n_samples / hop)


def stft_magnitude(x: AudioSignal, cfg: StftConfig = StftConfig()) -> np.ndarray:
    """Magnitude STFT with centered, reflect-padded, Hann-windowed frames."""
    n = len(x)
    if n == 0:
        raise DomainError("cannot take the STFT of an empty signal")
    win, hop, fft = cfg.win_size, cfg.hop_size, cfg.fft_size
    frames = n_frames_for(n, hop)

    pad_left = win // 2
    pad_right = max(0, (frames - 1) * hop + win - pad_left - n)
    mode = "reflect" if n > max(pad_left, pad_right) else "constant"
    xp = np.pad(x.samples, (pad_left, pad_right), mode=mode)

    window = get_window("hann", win, fftbins=True)
    starts = np.arange(frames) * hop
    segs = np.lib.stride_tricks.sliding_window_view(xp, win)[starts]
    return np.abs(np.fft.rfft(segs * window, n=fft, axis=1))


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(
    n_mels: int,
    fft_size: int,
    sample_rate: float,
    f_min: float = 0.0,
    f_max: float = 8000.0,
) -> np.ndarray:
    """Triangular mel filterbank, peak-normalized, shape n_mels x n_bins."""
    if not (0 <= f_min < f_max <= sample_rate / 2):
        raise ConfigError(f"invalid mel range [{f_min}, {f_max}] at fs={sample_rate}")
    edges = mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2))
    bin_freqs = np.arange(fft_size // 2 + 1) * sample_rate / fft_size

    lower, center, upper = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    up = (bin_freqs - lower) / np.maximum(center - lower, 1e-12)
    down = (upper - bin_freqs) / np.maximum(upper - center, 1e-12)
    fbank = np.maximum(0.0, np.minimum(up, down))
    if np.any(fbank.sum(axis=1) == 0):
        raise ConfigError("degenerate mel filterbank: a band covers no FFT bin")
    return fbank


def mel_spectrogram(
    x: AudioSignal,
    cfg: StftConfig = StftConfig(),
    n_mels: int = 80,
    f_min: float = 0.0,
    f_max: float = 8000.0,
    floor: float = MEL_FLOOR,
) -> MelSpectrogram:
    """Log mel-power spectrogram: triangle filterbank over |STFT|^2, floored."""
    if f_max > x.sample_rate / 2:
        raise ConfigError(f"f_max={f_max} above Nyquist of fs={x.sample_rate}")
    mag = stft_magnitude(x, cfg)
    fbank = mel_filterbank(n_mels, cfg.fft_size, x.sample_rate, f_min, f_max)
    mel = (mag**2) @ fbank.T
    return MelSpectrogram(
        np.log(np.maximum(mel, floor)), cfg, x.sample_rate, (f_min, f_max), floor
    )


def loudness(x: AudioSignal, hop: int = 160, floor: float = MEL_FLOOR) -> LoudnessTrack:
    """Per-frame log-RMS over consecutive hop-sized frames."""
    if hop <= 0:
        raise ConfigError("hop must be > 0")
    frames = n_frames_for(len(x), hop)
    padded = np.pad(x.samples, (0, frames * hop - len(x)))
    rms = np.sqrt(np.mean(padded.reshape(frames, hop) ** 2, axis=1))
    return LoudnessTrack(np.log(np.maximum(rms, floor)), hop / x.sample_rate)
