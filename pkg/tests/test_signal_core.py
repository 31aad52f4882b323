import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harmex import (
    AliasingError,
    DomainError,
    ExcitationConfig,
    F0Track,
    LengthMismatchError,
    PhaseInit,
    gaussian_noise,
    harmonic_count,
    interpolate_f0,
    read_f0_track,
    sine_excitation,
    write_f0_track,
)
from conftest import FS, constant_track, make_excitation


class TestInterpolateF0:
    def test_constant_track_constant_samples(self):
        sf = interpolate_f0(constant_track(100.0, 3), FS, 480)
        assert np.all(sf.values == 100.0)

    def test_linear_midpoint(self):
        track = F0Track(np.array([100.0, 200.0]))
        sf = interpolate_f0(track, FS, 240)
        assert sf.values[80] == pytest.approx(150.0)

    def test_all_unvoiced_gives_zeros(self):
        sf = interpolate_f0(F0Track(np.zeros(2)), FS, 320)
        assert np.all(sf.values == 0.0)

    def test_no_interpolation_across_voicing_boundary(self):
        # voiced frame 0-1 at 100/200 Hz, then unvoiced
        track = F0Track(np.array([100.0, 200.0, 0.0, 0.0]))
        sf = interpolate_f0(track, FS, 640)
        # samples mapped to the unvoiced frames are exactly zero
        assert np.all(sf.values[240:] == 0.0)
        # the voiced endpoint is held: samples past frame-1's center keep 200 Hz
        assert np.all(sf.values[160:240] == 200.0)

    def test_unvoiced_gap_splits_runs(self):
        track = F0Track(np.array([100.0, 0.0, 300.0]))
        sf = interpolate_f0(track, FS, 480)
        gap = sf.values[80:240]
        assert np.all(gap == 0.0)
        # no value between 100 and 300 appears (no glide through the gap)
        voiced = sf.values[sf.values > 0]
        assert set(np.unique(voiced)) <= {100.0, 300.0}

    def test_length_beyond_slack_rejected(self):
        with pytest.raises(LengthMismatchError):
            interpolate_f0(constant_track(100.0, 3), FS, 3 * 160 + 161)

    def test_length_within_slack_accepted(self):
        sf = interpolate_f0(constant_track(100.0, 3), FS, 3 * 160 + 160)
        assert len(sf) == 640


class TestHarmonicCount:
    @pytest.mark.parametrize(
        "f0,expected", [(100.0, 80), (4000.0, 2), (9000.0, 0), (200.0, 40)]
    )
    def test_known_values(self, f0, expected):
        assert harmonic_count(f0, FS) == expected

    def test_nonpositive_f0_rejected(self):
        with pytest.raises(DomainError):
            harmonic_count(0.0, FS)

    @given(f0=st.floats(1.0, 7999.0), fs=st.floats(8000.0, 48000.0))
    def test_no_harmonic_above_nyquist(self, f0, fs):
        k = harmonic_count(f0, fs)
        if k >= 1:
            assert k * f0 <= fs / 2 + 1e-9
        assert (k + 1) * f0 > fs / 2


class TestSineExcitation:
    def test_all_zero_f0_gives_silence(self):
        sf = interpolate_f0(F0Track(np.zeros(10)), FS, 1600)
        out = sine_excitation(sf)
        assert np.all(out.samples == 0.0)

    def test_two_harmonic_closed_form(self):
        # f0 = 4000 at 16 kHz: K = 2, base phase increment pi/2
        out = make_excitation(4000.0, 64, amplitude=0.1)
        n = np.arange(1, 65)
        phi1 = (np.pi / 2) * n
        expected = 0.1 * (np.sin(phi1 % (2 * np.pi)) + np.sin((2 * phi1) % (2 * np.pi)))
        np.testing.assert_allclose(out.samples, expected, atol=1e-12)

    def test_spectrum_peaks_on_harmonic_bins(self):
        # 1 s at 200 Hz: harmonics sit exactly on DFT bins of the full buffer
        out = make_excitation(200.0, FS, phase_init=PhaseInit.SEEDED_RANDOM, seed=7)
        spectrum = np.abs(np.fft.rfft(out.samples))
        harmonic_bins = np.arange(1, 41) * 200
        peak_mean = spectrum[harmonic_bins].mean()
        rest = np.ones(len(spectrum), dtype=bool)
        rest[harmonic_bins] = False
        assert spectrum[rest].max() < peak_mean * 10 ** (-40 / 20)

    def test_voicing_exactness(self):
        track = F0Track(np.concatenate([np.zeros(5), np.full(10, 220.0), np.zeros(5)]))
        sf = interpolate_f0(track, FS, 3200)
        out = sine_excitation(sf)
        assert np.all(out.samples[sf.values == 0] == 0.0)
        assert np.any(out.samples != 0.0)

    def test_amplitude_bound(self):
        out = make_excitation(100.0, FS, amplitude=0.1)
        assert np.max(np.abs(out.samples)) <= 0.1 * 80

    def test_phase_continuity_at_period_lag(self):
        out = make_excitation(200.0, FS).samples
        lag = round(FS / 200)
        r = out[:-lag] @ out[lag:] / (out @ out)
        assert r > 0.99

    def test_k_max_cap(self):
        capped = make_excitation(100.0, 1600, k_max_cap=1, amplitude=1.0)
        # one harmonic of 100 Hz: a pure sine, peak amplitude 1
        assert np.max(np.abs(capped.samples)) == pytest.approx(1.0, abs=1e-3)

    def test_aliasing_f0_rejected(self):
        sf = interpolate_f0(constant_track(7999.0, 4), FS, 640)
        bad = np.where(sf.values > 0, 8000.0, 0.0)
        with pytest.raises(AliasingError):
            sine_excitation(type(sf)(bad, FS))

    def test_determinism(self):
        cfg = dict(phase_init=PhaseInit.SEEDED_RANDOM, seed=3)
        a = make_excitation(150.0, 8000, **cfg)
        b = make_excitation(150.0, 8000, **cfg)
        np.testing.assert_array_equal(a.samples, b.samples)

    def test_random_phase_differs_from_zero_phase(self):
        a = make_excitation(150.0, 8000)
        b = make_excitation(150.0, 8000, phase_init=PhaseInit.SEEDED_RANDOM, seed=3)
        assert not np.array_equal(a.samples, b.samples)


class TestGaussianNoise:
    def test_empty(self):
        assert len(gaussian_noise(0, FS, 7)) == 0

    def test_determinism(self):
        a = gaussian_noise(FS, FS, 7)
        b = gaussian_noise(FS, FS, 7)
        np.testing.assert_array_equal(a.samples, b.samples)

    def test_moments(self):
        x = gaussian_noise(100_000, FS, 7).samples
        assert abs(x.mean()) < 0.02
        assert 0.97 < x.var() < 1.03

    def test_negative_count_rejected(self):
        with pytest.raises(DomainError):
            gaussian_noise(-1, FS, 0)


class TestF0TrackFile:
    def test_round_trip(self, tmp_path):
        track = F0Track(np.array([0.0, 123.456, 250.0]))
        path = tmp_path / "f0.txt"
        write_f0_track(path, track)
        back = read_f0_track(path)
        np.testing.assert_allclose(back.values, track.values, atol=1e-6)
        assert back.hop_seconds == 0.010

    def test_bad_line_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("100.0\nnot-a-number\n")
        with pytest.raises(Exception):
            read_f0_track(path)


class TestInvariants:
    @settings(max_examples=20, deadline=None)
    @given(
        f0=st.floats(60.0, 3000.0),
        amplitude=st.floats(0.01, 1.0),
        n=st.integers(100, 2000),
    )
    def test_amplitude_bound_property(self, f0, amplitude, n):
        out = make_excitation(f0, n, amplitude=amplitude)
        k = harmonic_count(f0, FS)
        assert np.max(np.abs(out.samples)) <= amplitude * k + 1e-9

    def test_track_rejects_negative_values(self):
        with pytest.raises(DomainError):
            F0Track(np.array([-1.0]))

    def test_track_rejects_nonfinite(self):
        with pytest.raises(DomainError):
            F0Track(np.array([math.inf]))
