"""Conditioning inputs for the two GAN-vocoder generator families.

Channel stacking pairs harmonic signals with a noise channel at audio rate;
the scale pyramid decimates all channels down the generator's upsampling
ladder with anti-aliased windowed-sinc FIRs in place of a learned
downsampler, so conditioning tensors are reproducible without training.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

from .errors import ConfigError, DomainError
from .signal_core import AudioSignal
from .tensor_io import write_feature_file

CHANNEL_ORDER = ("noise", "raw_excitation", "filtered_excitation")
DEFAULT_FACTORS = (8, 6, 5)


@dataclass(frozen=True)
class ConditioningBundle:
    """Equal-length named channels at one sample rate, in fixed order."""

    channels: dict[str, np.ndarray]
    sample_rate: float

    def __post_init__(self):
        if not self.channels:
            raise DomainError("bundle needs at least one channel")
        lengths = {len(v) for v in self.channels.values()}
        if len(lengths) != 1:
            raise ConfigError(f"channel lengths differ: {sorted(lengths)}")

    @property
    def length(self) -> int:
        return len(next(iter(self.channels.values())))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.channels)

    def as_matrix(self) -> np.ndarray:
        """length x n_channels, columns in bundle order."""
        return np.stack([self.channels[n] for n in self.channels], axis=1)


@dataclass(frozen=True)
class PyramidLevel:
    factor: int
    cumulative_factor: int
    channels: dict[str, np.ndarray]


@dataclass(frozen=True)
class ScalePyramid:
    levels: tuple[PyramidLevel, ...]
    base_length: int
    base_sample_rate: float
    names: tuple[str, ...]


def stack_channels(
    noise: AudioSignal | None = None,
    raw_excitation: AudioSignal | None = None,
    filtered_excitation: AudioSignal | None = None,
) -> ConditioningBundle:
    """Stack the provided signals in the fixed channel order."""
    parts = {
        "noise": noise,
        "raw_excitation": raw_excitation,
        "filtered_excitation": filtered_excitation,
    }
    present = {name: sig for name, sig in parts.items() if sig is not None}
    if not present:
        raise DomainError("no channels provided")
    rates = {sig.sample_rate for sig in present.values()}
    if len(rates) != 1:
        raise ConfigError(f"sample rates differ: {sorted(rates)}")
    lengths = {len(sig) for sig in present.values()}
    if len(lengths) != 1:
        raise ConfigError(f"channel lengths differ: {sorted(lengths)}")
    channels = {name: present[name].samples for name in CHANNEL_ORDER if name in present}
    return ConditioningBundle(channels, rates.pop())


def decimation_taps(factor: int) -> np.ndarray:
    """Hann-windowed sinc low-pass for decimation by ``factor``.

    Cutoff 0.45/factor of the incoming rate, 8*factor + 1 taps, normalized
    to unit DC gain.
    """
    if factor < 1:
        raise ConfigError("decimation factor must be >= 1")
    if factor == 1:
        return np.ones(1)
    n_taps = 8 * factor + 1
    m = np.arange(n_taps) - (n_taps - 1) / 2
    cutoff = 0.45 / factor
    taps = 2 * cutoff * np.sinc(2 * cutoff * m) * get_window("hann", n_taps, fftbins=False)
    return taps / taps.sum()


def _decimate(x: np.ndarray, factor: int) -> np.ndarray:
    if factor == 1 or len(x) == 0:
        return x[: len(x) // factor].copy()
    taps = decimation_taps(factor)
    half = len(taps) // 2
    # edge-replicated padding keeps constant signals exactly constant
    padded = np.pad(x, (half, half), mode="edge")
    filtered = np.convolve(padded, taps, mode="valid")
    return filtered[::factor][: len(x) // factor]


def downsample_multiscale(
    bundle: ConditioningBundle, factors: tuple[int, ...] = DEFAULT_FACTORS
) -> ScalePyramid:
    """Successively decimate every channel by each factor in turn."""
    factors = tuple(int(f) for f in factors)
    if any(f < 1 for f in factors):
        raise ConfigError(f"factors must be >= 1, got {factors}")

    levels = []
    current = dict(bundle.channels)
    cumulative = 1
    for factor in factors:
        cumulative *= factor
        current = {name: _decimate(sig, factor) for name, sig in current.items()}
        levels.append(PyramidLevel(factor, cumulative, current))
    return ScalePyramid(tuple(levels), bundle.length, bundle.sample_rate, bundle.names)


def export_conditioning(obj: ConditioningBundle | ScalePyramid, path_prefix) -> list[str]:
    """Write feature-tensor files, one per scale, suffixed ``_x{factor}``.

    A bare bundle exports as the single audio-rate file ``_x1``.  Channels
    become dims in bundle order; returns the written paths.
    """
    written = []
    if isinstance(obj, ConditioningBundle):
        path = f"{path_prefix}_x1.hmx"
        write_feature_file(path, obj.as_matrix(), 1.0 / obj.sample_rate)
        written.append(path)
    elif isinstance(obj, ScalePyramid):
        for level in obj.levels:
            data = np.stack([level.channels[n] for n in obj.names], axis=1)
            path = f"{path_prefix}_x{level.cumulative_factor}.hmx"
            write_feature_file(path, data, level.cumulative_factor / obj.base_sample_rate)
            written.append(path)
    else:
        raise ConfigError(f"cannot export {type(obj).__name__}")
    return written
