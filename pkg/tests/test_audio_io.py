from __future__ import annotations

import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import sine
from swarakit.audio_io import (
    AudioBuffer,
    peak_normalize,
    read_wav,
    resample,
    write_wav,
    write_wav_pcm16,
)
from swarakit.errors import EmptyAudio, MalformedHeader, UnsupportedEncoding


def _pcm16_bytes(samples: np.ndarray, rate: int, channels: int = 1, fmt_tag: int = 1) -> bytes:
    data = samples.astype("<i2").tobytes()
    fmt = struct.pack("<HHIIHH", fmt_tag, channels, rate, rate * 2 * channels, 2 * channels, 16)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", len(data)) + data
    return b"RIFF" + struct.pack("<I", len(body)) + body


def test_pcm16_mono_header(tmp_path):
    p = tmp_path / "a.wav"
    p.write_bytes(_pcm16_bytes(np.arange(1000) - 500, 8000))
    buf = read_wav(p)
    assert len(buf) == 1000
    assert buf.sample_rate == 8000
    assert buf.samples.dtype == np.float32
    assert buf.samples[0] == pytest.approx(-500 / 32768)


def test_stereo_opposite_channels_average_to_zero(tmp_path):
    p = tmp_path / "s.wav"
    frames = np.empty(2 * 400, dtype=np.int64)
    frames[0::2] = 16384
    frames[1::2] = -16384
    p.write_bytes(_pcm16_bytes(frames, 16000, channels=2))
    buf = read_wav(p)
    assert len(buf) == 400
    assert np.all(buf.samples == 0.0)


def test_not_riff(tmp_path):
    p = tmp_path / "x.wav"
    p.write_bytes(b"RIFX" + b"\0" * 40)
    with pytest.raises(MalformedHeader):
        read_wav(p)


def test_compressed_encoding_rejected(tmp_path):
    p = tmp_path / "adpcm.wav"
    p.write_bytes(_pcm16_bytes(np.zeros(10), 8000, fmt_tag=2))
    with pytest.raises(UnsupportedEncoding):
        read_wav(p)


def test_zero_frames(tmp_path):
    p = tmp_path / "e.wav"
    p.write_bytes(_pcm16_bytes(np.zeros(0), 8000))
    with pytest.raises(EmptyAudio):
        read_wav(p)


def test_pcm16_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(3)
    ints = rng.integers(-32768, 32768, 2000)
    src = tmp_path / "in.wav"
    src.write_bytes(_pcm16_bytes(ints, 22050))
    buf = read_wav(src)
    out = tmp_path / "out.wav"
    write_wav_pcm16(buf, out)
    assert out.read_bytes() == src.read_bytes()
    # the float writer preserves the same values
    write_wav(buf, tmp_path / "f.wav")
    again = read_wav(tmp_path / "f.wav")
    assert np.array_equal(np.round(again.samples.astype(np.float64) * 32768).astype(np.int64), ints)


def test_resample_identity():
    buf = sine(440, 44100, 0.1)
    assert resample(buf, 44100) is buf


def test_resample_length():
    buf = AudioBuffer(np.zeros(22050, dtype=np.float32), 22050)
    assert abs(len(resample(buf, 44100)) - 44100) <= 1


def test_resample_tone_peak_and_gain():
    out = resample(sine(1000, 8000, 1.0, amp=0.5), 44100)
    x = out.samples.astype(np.float64)
    mid = x[4410:-4410]  # steady state, away from the zero-padded edges
    spec = np.abs(np.fft.rfft(mid * np.hanning(len(mid)), n=1 << 20))
    freqs = np.fft.rfftfreq(1 << 20, 1 / 44100)
    assert abs(freqs[np.argmax(spec)] - 1000.0) <= 2.0
    rms = np.sqrt(np.mean(mid ** 2))
    gain_db = 20 * np.log10(rms / (0.5 / np.sqrt(2)))
    assert abs(gain_db) <= 0.5


def test_resample_round_trip_duration():
    buf = sine(300, 16000, 0.5)
    back = resample(resample(buf, 44100), 16000)
    assert abs(back.duration_seconds - buf.duration_seconds) <= 1 / 16000


def test_peak_normalize_cases():
    z = AudioBuffer(np.zeros(10, dtype=np.float32), 8000)
    assert peak_normalize(z) is z
    half = AudioBuffer(np.array([0.5, -0.25, 0.125], dtype=np.float32), 8000)
    assert np.array_equal(peak_normalize(half).samples, np.array([1.0, -0.5, 0.25], dtype=np.float32))
    full = AudioBuffer(np.array([1.0, -0.3], dtype=np.float32), 8000)
    assert peak_normalize(full) is full


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-1.0, 1.0, allow_nan=False, width=32), min_size=1, max_size=64),
    st.floats(0.01, 1.0),
)
def test_peak_normalize_idempotent_and_bounded(values, target):
    buf = AudioBuffer(np.array(values, dtype=np.float32), 8000)
    once = peak_normalize(buf, target)
    twice = peak_normalize(once, target)
    assert np.array_equal(once.samples, twice.samples)
    assert np.max(np.abs(once.samples)) <= np.float32(target)
    if np.any(buf.samples != 0):
        assert np.max(np.abs(once.samples)) == pytest.approx(target, rel=1e-6)
