import numpy as np
import pytest

from harmex import (
    AudioSignal,
    ConfigError,
    FitConfig,
    LengthMismatchError,
    LtvFirCoeffs,
    StftConfig,
    apply_ltv,
    estimate_coeffs_from_mel,
    fit_coeffs_least_squares,
    frequency_response,
    gaussian_noise,
    minimum_phase_fir,
    read_coeffs,
    write_coeffs,
)
from harmex.ltv import _lagged
from harmex.spectral import MelSpectrogram
from conftest import FS, HOP, make_excitation

N_TAPS = 64


def delta_coeffs(n_frames, n_taps=N_TAPS):
    taps = np.zeros((n_frames, n_taps))
    taps[:, 0] = 1.0
    return LtvFirCoeffs(taps, 0.010, FS)


def direct_convolution(x, taps):
    """Oracle: y[n] = sum_t taps[t] * x[n-t], causal, zero initial state."""
    y = np.zeros(len(x))
    for t, tap in enumerate(taps):
        y[t:] += tap * x[: len(x) - t]
    return y


class TestApplyLtv:
    def test_delta_is_identity(self, rng):
        x = AudioSignal(rng.normal(size=16000), FS)
        y = apply_ltv(x, delta_coeffs(100))
        np.testing.assert_array_equal(y.samples, x.samples)

    def test_constant_coeffs_match_direct_convolution(self, rng):
        taps = rng.normal(size=N_TAPS) * 0.3
        h = LtvFirCoeffs(np.tile(taps, (100, 1)), 0.010, FS)
        x = AudioSignal(rng.normal(size=16000), FS)
        y = apply_ltv(x, h)
        np.testing.assert_allclose(y.samples, direct_convolution(x.samples, taps), atol=1e-12)

    def test_linearity_in_signal(self, rng):
        h = LtvFirCoeffs(rng.normal(size=(100, N_TAPS)), 0.010, FS)
        x1 = AudioSignal(rng.normal(size=16000), FS)
        x2 = AudioSignal(rng.normal(size=16000), FS)
        a, b = 0.7, -1.3
        combined = apply_ltv(AudioSignal(a * x1.samples + b * x2.samples, FS), h)
        split = a * apply_ltv(x1, h).samples + b * apply_ltv(x2, h).samples
        np.testing.assert_allclose(combined.samples, split, atol=1e-12)

    def test_output_length_equals_input_length(self, rng):
        for n in (100, 15999, 16000):
            h = delta_coeffs(int(np.ceil(n / HOP)))
            x = AudioSignal(rng.normal(size=n), FS)
            assert len(apply_ltv(x, h)) == n

    def test_sample_rate_mismatch_rejected(self, rng):
        h = LtvFirCoeffs(np.ones((100, 4)), 0.010, 22050)
        with pytest.raises(ConfigError):
            apply_ltv(AudioSignal(np.zeros(16000), FS), h)

    def test_frame_count_mismatch_rejected(self):
        with pytest.raises(LengthMismatchError):
            apply_ltv(AudioSignal(np.zeros(16000), FS), delta_coeffs(50))

    def test_piecewise_constant_mode_uses_frame_taps(self, rng):
        taps = rng.normal(size=(10, 8))
        h = LtvFirCoeffs(taps, 0.010, FS)
        x = AudioSignal(rng.normal(size=1600), FS)
        y = apply_ltv(x, h, interpolate_taps=False)
        lag = _lagged(x.samples, 8)
        f = 4
        sl = slice(f * HOP, (f + 1) * HOP)
        np.testing.assert_allclose(y.samples[sl], lag[sl] @ taps[f], atol=1e-12)


class TestFitLeastSquares:
    def test_identity_target_recovers_delta(self):
        exc = make_excitation(120.0, 16000)
        fit = fit_coeffs_least_squares(exc, exc, FitConfig(ridge_lambda=1e-6))
        assert np.max(np.abs(fit.taps[:, 0] - 1.0)) < 1e-3
        assert np.max((fit.taps[:, 1:] ** 2).sum(axis=1)) < 1e-6

    def test_construct_then_recover(self, rng):
        exc = make_excitation(120.0, 16000)
        known = LtvFirCoeffs(rng.normal(size=(100, N_TAPS)) * 0.2, 0.010, FS)
        target = apply_ltv(exc, known, interpolate_taps=False)
        fit = fit_coeffs_least_squares(exc, target, FitConfig(ridge_lambda=0.0))
        refiltered = apply_ltv(exc, fit, interpolate_taps=False)
        err = refiltered.samples - target.samples
        for f in range(1, 99):
            sl = slice(f * HOP, (f + 1) * HOP)
            rel = np.linalg.norm(err[sl]) / np.linalg.norm(target.samples[sl])
            assert rel < 1e-6

    def test_zero_excitation_frame_gives_zero_taps(self, rng):
        exc = np.zeros(1600)
        exc[800:] = rng.normal(size=800)
        target = AudioSignal(rng.normal(size=1600), FS)
        fit = fit_coeffs_least_squares(AudioSignal(exc, FS), target, FitConfig())
        # frames 0-3 precede any excitation (frame 4 sees lags into it)
        assert np.all(fit.taps[:4] == 0.0)

    def test_residual_orthogonal_to_regressors(self, rng):
        exc = make_excitation(120.0, 16000)
        known = LtvFirCoeffs(rng.normal(size=(100, N_TAPS)) * 0.2, 0.010, FS)
        clean = apply_ltv(exc, known, interpolate_taps=False)
        target = AudioSignal(clean.samples + 0.01 * rng.normal(size=16000), FS)
        fit = fit_coeffs_least_squares(exc, target, FitConfig(ridge_lambda=0.0))
        lag = _lagged(exc.samples, N_TAPS)
        for f in range(100):
            sl = slice(f * HOP, (f + 1) * HOP)
            block = lag[sl]
            resid = target.samples[sl] - block @ fit.taps[f]
            cos = np.abs(block.T @ resid) / (
                np.linalg.norm(block, axis=0) * np.linalg.norm(resid) + 1e-300
            )
            assert cos.max() < 1e-8

    def test_fit_never_increases_per_frame_error(self, rng):
        exc = make_excitation(150.0, 16000)
        target = AudioSignal(0.4 * rng.normal(size=16000), FS)
        fit = fit_coeffs_least_squares(exc, target, FitConfig(ridge_lambda=0.0))
        refiltered = apply_ltv(exc, fit, interpolate_taps=False)
        for f in range(100):
            sl = slice(f * HOP, (f + 1) * HOP)
            rmse_fit = np.sqrt(np.mean((target.samples[sl] - refiltered.samples[sl]) ** 2))
            rmse_raw = np.sqrt(np.mean((target.samples[sl] - exc.samples[sl]) ** 2))
            assert rmse_fit <= rmse_raw + 1e-9

    def test_length_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            fit_coeffs_least_squares(
                AudioSignal(np.zeros(100), FS), AudioSignal(np.zeros(101), FS)
            )

    def test_sample_rate_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            fit_coeffs_least_squares(
                AudioSignal(np.zeros(100), FS), AudioSignal(np.zeros(100), 8000)
            )


class TestEstimateFromMel:
    def flat_mel(self, level, n_frames=3):
        return MelSpectrogram(np.full((n_frames, 80), level), StftConfig(), FS)

    def test_flat_envelope_gives_flat_response(self):
        mel = self.flat_mel(np.log(0.04))
        h = estimate_coeffs_from_mel(mel)
        resp = frequency_response(h, 0, 1024)
        freqs = np.arange(513) * FS / 1024
        band = resp[(freqs >= 100) & (freqs <= 7000)]
        # flat within +/-3 dB of the band midrange
        assert band.max() - band.min() < 6.0
        # raising the input level raises the response level
        h2 = estimate_coeffs_from_mel(self.flat_mel(np.log(0.16)))
        resp2 = frequency_response(h2, 0, 1024)
        assert resp2.mean() > resp.mean()

    def test_silence_floor_propagates(self):
        mel = self.flat_mel(np.log(1e-5), n_frames=1)
        h = estimate_coeffs_from_mel(mel, floor_db=-50.0)
        assert frequency_response(h, 0, 1024).max() <= -50.0 + 6.0

    def test_single_band_peak_in_support(self):
        from harmex import mel_filterbank

        frames = np.full((1, 80), np.log(1e-5))
        frames[0, 40] = 0.0
        mel = MelSpectrogram(frames, StftConfig(), FS)
        h = estimate_coeffs_from_mel(mel)
        peak_bin = int(np.argmax(frequency_response(h, 0, 1024)))
        support = np.flatnonzero(mel_filterbank(80, 1024, FS)[40] > 0)
        assert support.min() <= peak_bin <= support.max()

    def test_minimum_phase_roots_inside_unit_circle(self, rng):
        frames = rng.uniform(np.log(1e-4), np.log(1.0), size=(5, 80))
        mel = MelSpectrogram(frames, StftConfig(), FS)
        h = estimate_coeffs_from_mel(mel)
        for f in range(h.n_frames):
            assert np.abs(np.roots(h.taps[f])).max() <= 1.0 + 1e-6

    def test_frame_grid_matches_mel(self):
        mel = self.flat_mel(np.log(0.1), n_frames=7)
        h = estimate_coeffs_from_mel(mel)
        assert h.n_frames == 7
        assert h.hop_seconds == pytest.approx(0.010)

    def test_round_trip_with_known_envelope(self, rng):
        # response of the produced taps matches the imposed envelope in-band
        freqs = np.arange(513) * FS / 1024
        mag_db = -6.0 - 6.0 * ((freqs - 2000.0) / 3000.0) ** 2
        from harmex import mel_filterbank

        fbank = mel_filterbank(80, 1024, FS)
        power = (10 ** (mag_db / 10.0))[None, :] @ fbank.T
        mel = MelSpectrogram(np.log(power), StftConfig(), FS)
        h = estimate_coeffs_from_mel(mel, n_taps=N_TAPS)
        resp = frequency_response(h, 0, 1024)
        band = (freqs >= 300) & (freqs <= 5000)
        assert np.max(np.abs(resp[band] - mag_db[band])) < 3.0


class TestFrequencyResponse:
    def test_delta_is_flat_zero_db(self):
        resp = frequency_response(delta_coeffs(1), 0, 256)
        np.testing.assert_allclose(resp, 0.0, atol=1e-9)

    def test_two_tap_averager(self):
        h = LtvFirCoeffs(np.array([[0.5, 0.5]]), 0.010, FS)
        resp = frequency_response(h, 0, 256)
        assert resp[0] == pytest.approx(0.0, abs=1e-9)
        assert resp[-1] == -120.0

    def test_frame_out_of_range(self):
        with pytest.raises(IndexError):
            frequency_response(delta_coeffs(2), 5, 256)

    def test_nfft_too_small_rejected(self):
        with pytest.raises(ConfigError):
            frequency_response(delta_coeffs(1), 0, 16)


class TestMinimumPhaseFir:
    def test_matches_requested_magnitude(self):
        mag = np.ones(513)
        h = minimum_phase_fir(mag, 32, 1024)
        resp = np.abs(np.fft.rfft(h, 1024))
        np.testing.assert_allclose(resp, 1.0, atol=1e-6)


class TestCoeffFile:
    def test_round_trip(self, tmp_path, rng):
        h = LtvFirCoeffs(rng.normal(size=(20, 16)).astype(np.float32), 0.010, FS)
        path = tmp_path / "c.ltvf"
        write_coeffs(path, h)
        back = read_coeffs(path)
        assert back.n_frames == 20 and back.n_taps == 16
        assert back.hop_seconds == h.hop_seconds
        assert back.sample_rate == h.sample_rate
        np.testing.assert_array_equal(
            back.taps.astype(np.float32), h.taps.astype(np.float32)
        )

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.ltvf"
        path.write_bytes(b"NOPE" + b"\0" * 40)
        from harmex import FormatError

        with pytest.raises(FormatError):
            read_coeffs(path)
