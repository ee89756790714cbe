from __future__ import annotations

import numpy as np
import pytest

from conftest import sine
from oracles import naive_dct2_ortho, naive_dft_mag
from swarakit import dsp
from swarakit.audio_io import AudioBuffer
from swarakit.errors import SignalTooShort


def test_stft_zero_and_frame_count():
    z = AudioBuffer(np.zeros(5000, dtype=np.float32), 16000)
    spec = dsp.stft(z, 1024, 256)
    assert np.all(spec.magnitudes == 0)
    assert spec.n_frames == (5000 - 1024) // 256 + 1
    assert spec.n_bins == 513
    one = AudioBuffer(np.ones(1024, dtype=np.float32), 16000)
    assert dsp.stft(one, 1024, 7).n_frames == 1


def test_stft_too_short_and_bad_framing():
    with pytest.raises(SignalTooShort):
        dsp.stft(AudioBuffer(np.zeros(100, dtype=np.float32), 8000), 256, 64)
    with pytest.raises(ValueError):
        dsp.stft(AudioBuffer(np.zeros(1000, dtype=np.float32), 8000), 300, 64)


def test_stft_matches_direct_dft():
    rng = np.random.default_rng(0)
    buf = AudioBuffer(rng.standard_normal(512).astype(np.float32), 8000)
    spec = dsp.stft(buf, 256, 128)
    frame = buf.samples[128:384].astype(np.float64) * dsp.hann(256)
    assert np.allclose(spec.magnitudes[1], naive_dft_mag(frame), atol=1e-9)


def test_bin_centred_sine_energy_concentration():
    fs, n, k = 16000, 1024, 37
    buf = sine(k * fs / n, fs, 0.5)
    power = dsp.stft(buf, n, 256).magnitudes ** 2
    share = power[:, k - 1:k + 2].sum(axis=1) / power.sum(axis=1)
    assert np.all(share >= 0.95)


def test_filterbank_rows_sum_to_one():
    fb = dsp.mel_filterbank(16000, 512, 80, 0.0, 8000.0)
    assert np.allclose(fb.sum(axis=1), 1.0)
    assert np.all(fb >= 0)


def test_mel_shapes_and_zero():
    spec = dsp.stft(AudioBuffer(np.zeros(4096, dtype=np.float32), 16000), 1024, 256)
    mel = dsp.mel_spectrogram(spec, n_mels=2)
    assert mel.shape == (spec.n_frames, 2)
    assert np.all(mel == 0)


def test_tone_at_band_centre_peaks_in_that_band():
    fs, n, n_mels, m = 16000, 2048, 40, 22
    centres = dsp.mel_to_hz(np.linspace(0, dsp.hz_to_mel(fs / 2), n_mels + 2))[1:-1]
    # snap the tone onto the FFT bin nearest the band centre
    k = int(round(centres[m] * n / fs))
    fb = dsp.mel_filterbank(fs, n, n_mels, 0.0, fs / 2)
    expected = int(np.argmax(fb[:, k]))
    mel = dsp.mel_spectrogram(dsp.stft(sine(k * fs / n, fs, 0.5), n, 512), n_mels)
    assert np.all(np.argmax(mel, axis=1) == expected)
    assert expected == m


def test_mfcc_matches_naive_dct():
    rng = np.random.default_rng(1)
    mel = rng.random((4, 80)) + 1e-3
    cep = dsp.mfcc(mel, 13)
    for i in range(4):
        ref = naive_dct2_ortho(np.log(mel[i] + dsp.LOG_FLOOR))[:13]
        assert np.max(np.abs(cep.coeffs[i] - ref)) < 1e-9


def test_mfcc_finite_on_silence():
    cep = dsp.mfcc_from_audio(AudioBuffer(np.zeros(8192, dtype=np.float32), 16000))
    assert np.all(np.isfinite(cep.coeffs))


def test_spectral_centroid_of_tone():
    spec = dsp.stft(sine(1000, 44100, 1.0))
    bin_hz = 44100 / 2048
    assert np.all(np.abs(dsp.spectral_centroid(spec) - 1000) <= bin_hz)


def test_zero_crossing_rate():
    zcr = dsp.zero_crossing_rate(sine(100, 8000, 1.0))
    assert np.all(np.abs(zcr - 0.025) <= 0.0025)


def test_rms_of_sine():
    rms = dsp.rms_energy(sine(441, 44100, 0.5, amp=0.8))
    assert np.allclose(rms, 0.8 / np.sqrt(2), rtol=1e-2)


@pytest.mark.parametrize("f0", [80.0, 220.0, 440.0])
def test_f0_of_sine(f0):
    track = dsp.estimate_f0(sine(f0, 44100, 1.0))
    assert track.voicing.all()
    assert np.all(np.abs(track.f0_hz - f0) <= 2.0)


def test_f0_of_harmonic_complex_avoids_octave_error():
    fs = 16000
    t = np.arange(fs) / fs
    x = sum(np.sin(2 * np.pi * 150 * h * t) / h for h in range(1, 8))
    track = dsp.estimate_f0(AudioBuffer((0.3 * x).astype(np.float32), fs), 1024, 256)
    assert np.median(track.voiced_f0) == pytest.approx(150, abs=2)


def test_noise_is_unvoiced_and_invariants():
    rng = np.random.default_rng(2)
    buf = AudioBuffer((0.3 * rng.uniform(-1, 1, 44100)).astype(np.float32), 44100)
    track = dsp.estimate_f0(buf)
    assert track.voicing.mean() < 0.1
    assert np.all(track.f0_hz[~track.voicing] == 0.0)
    v = track.voiced_f0
    assert np.all((v >= dsp.F0_MIN) & (v <= dsp.F0_MAX))
