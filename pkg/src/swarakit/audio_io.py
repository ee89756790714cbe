"""WAV ingestion, resampling and normalization.

Every downstream stage works on :class:`AudioBuffer`: mono float samples in
[-1, 1] plus a sample rate.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np

from swarakit import kernels
from swarakit.errors import EmptyAudio, MalformedHeader, UnsupportedEncoding

WAVE_FORMAT_PCM = 1
WAVE_FORMAT_IEEE_FLOAT = 3
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

KAISER_BETA = 8.6
ZERO_CROSSINGS = 32


@dataclass(frozen=True)
class AudioBuffer:
    samples: np.ndarray
    sample_rate: int
    source_id: str | None = None

    def __post_init__(self):
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        samples = np.asarray(self.samples, dtype=np.float32)
        if samples.ndim != 1:
            raise ValueError("AudioBuffer holds mono audio; samples must be 1-D")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_seconds(self) -> float:
        return len(self) / self.sample_rate


def _parse_chunks(data: bytes):
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedHeader("not a RIFF/WAVE file")
    pos = 12
    fmt = None
    payload = None
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack("<I", data[pos + 4:pos + 8])
        body = data[pos + 8:pos + 8 + size]
        if cid == b"fmt ":
            fmt = body
        elif cid == b"data":
            payload = body
        pos += 8 + size + (size & 1)
    if fmt is None or len(fmt) < 16:
        raise MalformedHeader("missing or truncated fmt chunk")
    if payload is None:
        raise MalformedHeader("missing data chunk")
    return fmt, payload


def read_wav(path: str | Path) -> AudioBuffer:
    """Read a PCM16 or float32 WAV file as a mono buffer.

    Stereo is averaged to mono. Raises :class:`MalformedHeader`,
    :class:`UnsupportedEncoding` or :class:`EmptyAudio`.
    """
    path = Path(path)
    fmt, payload = _parse_chunks(path.read_bytes())
    tag, channels, rate, _byte_rate, block_align, bits = struct.unpack("<HHIIHH", fmt[:16])
    if tag == WAVE_FORMAT_EXTENSIBLE and len(fmt) >= 26:
        # sub-format GUID starts at offset 24; its first two bytes carry the tag
        (tag,) = struct.unpack("<H", fmt[24:26])
    if channels not in (1, 2):
        raise UnsupportedEncoding(f"{channels} channels (only mono/stereo supported)")
    if rate == 0:
        raise MalformedHeader("sample rate of 0")
    if tag == WAVE_FORMAT_PCM and bits == 16:
        raw = np.frombuffer(payload[: len(payload) // 2 * 2], dtype="<i2").astype(np.float32) / 32768.0
    elif tag == WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        raw = np.frombuffer(payload[: len(payload) // 4 * 4], dtype="<f4").astype(np.float32)
    else:
        raise UnsupportedEncoding(f"format tag {tag} with {bits} bits per sample")

    frames = raw.shape[0] // channels
    if frames == 0:
        raise EmptyAudio(f"{path} contains no audio frames")
    raw = raw[: frames * channels].reshape(frames, channels)
    mono = raw[:, 0] if channels == 1 else raw.mean(axis=1, dtype=np.float64).astype(np.float32)
    return AudioBuffer(mono, rate, source_id=str(path))


def write_wav(buf: AudioBuffer, path: str | Path) -> None:
    """Write ``buf`` as a mono IEEE-float32 WAV at its own sample rate."""
    data = np.asarray(buf.samples, dtype="<f4").tobytes()
    fmt = struct.pack("<HHIIHH", WAVE_FORMAT_IEEE_FLOAT, 1, buf.sample_rate, buf.sample_rate * 4, 4, 32)
    # float formats carry a fact chunk per the RIFF spec
    fact = struct.pack("<I", len(buf))
    body = (
        b"WAVE"
        + b"fmt " + struct.pack("<I", len(fmt)) + fmt
        + b"fact" + struct.pack("<I", len(fact)) + fact
        + b"data" + struct.pack("<I", len(data)) + data
    )
    Path(path).write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)


def write_wav_pcm16(buf: AudioBuffer, path: str | Path, channels: int = 1) -> None:
    """Write 16-bit PCM (optionally duplicated to stereo). Used for fixtures."""
    pcm = np.clip(np.round(np.asarray(buf.samples, dtype=np.float64) * 32768.0), -32768, 32767).astype("<i2")
    if channels == 2:
        pcm = np.repeat(pcm, 2)
    data = pcm.tobytes()
    fmt = struct.pack("<HHIIHH", WAVE_FORMAT_PCM, channels, buf.sample_rate,
                      buf.sample_rate * 2 * channels, 2 * channels, 16)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", len(data)) + data
    Path(path).write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)


@lru_cache(maxsize=32)
def _polyphase_table(up: int, down: int) -> tuple[np.ndarray, int]:
    """Kaiser-windowed sinc taps for each of the ``up`` output phases.

    Row ``p`` holds the weights for an output instant that falls ``p/up``
    input samples past an integer input index.
    """
    cutoff = min(1.0, up / down)  # fraction of the input Nyquist band kept
    half = int(np.ceil(ZERO_CROSSINGS / cutoff))
    offsets = np.arange(-half + 1, half + 1)  # input index relative to floor(t)
    frac = np.arange(up) / up
    t = offsets[None, :] - frac[:, None]
    taps = cutoff * np.sinc(cutoff * t)
    taps *= _kaiser(t / half)
    taps /= taps.sum(axis=1, keepdims=True)  # unity DC gain per phase
    return taps, half


def _kaiser(u: np.ndarray) -> np.ndarray:
    """Continuous Kaiser window over u in [-1, 1], zero outside."""
    inside = np.abs(u) <= 1.0
    arg = np.sqrt(np.clip(1.0 - u * u, 0.0, None))
    return np.where(inside, np.i0(KAISER_BETA * arg) / np.i0(KAISER_BETA), 0.0)


def resample(buf: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Band-limited rate conversion (polyphase Kaiser-windowed sinc)."""
    target_rate = int(target_rate)
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if target_rate == buf.sample_rate:
        return buf
    ratio = Fraction(target_rate, buf.sample_rate)
    up, down = ratio.numerator, ratio.denominator
    n_in = len(buf)
    n_out = int(round(n_in * target_rate / buf.sample_rate))
    if n_out == 0:
        return AudioBuffer(np.zeros(0, dtype=np.float32), target_rate, buf.source_id)

    taps, half = _polyphase_table(up, down)
    pos = np.arange(n_out, dtype=np.int64) * down
    bases = pos // up
    phases = pos % up
    # pad so every tap window stays in range; index base-half+1 maps to 0
    xp = np.concatenate([np.zeros(half - 1), buf.samples.astype(np.float64), np.zeros(half + 1)])
    out = kernels.polyphase_apply(xp, taps, bases, phases)
    return AudioBuffer(out.astype(np.float32), target_rate, buf.source_id)


def peak_normalize(buf: AudioBuffer, target_peak: float = 1.0) -> AudioBuffer:
    if not 0.0 < target_peak <= 1.0:
        raise ValueError(f"target_peak must be in (0, 1], got {target_peak}")
    peak = float(np.max(np.abs(buf.samples))) if len(buf) else 0.0
    if peak == 0.0 or peak == float(np.float32(target_peak)):
        return buf
    scaled = buf.samples.astype(np.float64) * (target_peak / peak)
    out = scaled.astype(np.float32)
    # float32 rounding may overshoot the target by one ulp
    np.clip(out, -np.float32(target_peak), np.float32(target_peak), out=out)
    return AudioBuffer(out, buf.sample_rate, buf.source_id)
