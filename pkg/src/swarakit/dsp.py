"""Frame-level analysis: STFT, mel filterbank, MFCC, ZCR, RMS, centroid, F0.

Defaults assume 44.1 kHz input: 2048-sample frames (46 ms) with a 512-sample
hop, 80 mel bands and 13 cepstral coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.fft import dct

from swarakit.audio_io import AudioBuffer
from swarakit.errors import SignalTooShort

FRAME_LEN = 2048
HOP = 512
N_MELS = 80
N_MFCC = 13
LOG_FLOOR = 1e-10

F0_MIN = 50.0
F0_MAX = 500.0
VOICING_THRESHOLD = 0.3
# among autocorrelation peaks, take the shortest lag within this fraction of
# the best one; suppresses octave-down errors on strongly periodic frames
OCTAVE_TOLERANCE = 0.9


@dataclass(frozen=True)
class Spectrogram:
    magnitudes: np.ndarray  # (n_frames, frame_len // 2 + 1)
    frame_len: int
    hop: int
    sample_rate: int

    @property
    def n_frames(self) -> int:
        return self.magnitudes.shape[0]

    @property
    def n_bins(self) -> int:
        return self.magnitudes.shape[1]

    @property
    def bin_frequencies(self) -> np.ndarray:
        return np.arange(self.n_bins) * (self.sample_rate / self.frame_len)


@dataclass(frozen=True)
class MelCepstra:
    coeffs: np.ndarray  # (n_frames, n_coeffs); column 0 is the energy term
    n_coeffs: int
    sample_rate: int | None = None
    hop: int | None = None

    @property
    def n_frames(self) -> int:
        return self.coeffs.shape[0]


@dataclass(frozen=True)
class PitchTrack:
    f0_hz: np.ndarray  # 0.0 on unvoiced frames
    voicing: np.ndarray
    hop: int
    sample_rate: int

    @property
    def voiced_f0(self) -> np.ndarray:
        return self.f0_hz[self.voicing]


def _check_framing(n_samples: int, frame_len: int, hop: int) -> None:
    if frame_len < 2 or frame_len & (frame_len - 1):
        raise ValueError(f"frame_len must be a power of two >= 2, got {frame_len}")
    if not 0 < hop <= frame_len:
        raise ValueError(f"hop must be in (0, frame_len], got {hop}")
    if n_samples < frame_len:
        raise SignalTooShort(f"{n_samples} samples is shorter than one {frame_len}-sample frame")


def frames(buf: AudioBuffer, frame_len: int = FRAME_LEN, hop: int = HOP) -> np.ndarray:
    """View of the signal as ``(n_frames, frame_len)`` float64 frames (no padding)."""
    _check_framing(len(buf), frame_len, hop)
    x = buf.samples.astype(np.float64)
    return sliding_window_view(x, frame_len)[::hop]


@lru_cache(maxsize=16)
def hann(frame_len: int) -> np.ndarray:
    """Periodic Hann window."""
    n = np.arange(frame_len)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / frame_len)


def stft(buf: AudioBuffer, frame_len: int = FRAME_LEN, hop: int = HOP) -> Spectrogram:
    fr = frames(buf, frame_len, hop)
    mags = np.abs(np.fft.rfft(fr * hann(frame_len), axis=1))
    return Spectrogram(mags, frame_len, hop, buf.sample_rate)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=16)
def mel_filterbank(sample_rate: int, frame_len: int, n_mels: int, fmin: float, fmax: float) -> np.ndarray:
    """Triangular filters on the HTK mel scale, each row summing to 1.

    A filter too narrow to cover any FFT bin collapses onto the bin nearest
    its center so that no band is identically zero.
    """
    n_bins = frame_len // 2 + 1
    freqs = np.arange(n_bins) * (sample_rate / frame_len)
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))
    weights = np.zeros((n_mels, n_bins))
    for m in range(n_mels):
        lo, mid, hi = edges[m], edges[m + 1], edges[m + 2]
        rise = (freqs - lo) / (mid - lo)
        fall = (hi - freqs) / (hi - mid)
        w = np.clip(np.minimum(rise, fall), 0.0, None)
        total = w.sum()
        if total <= 0.0:
            w = np.zeros(n_bins)
            w[int(np.argmin(np.abs(freqs - mid)))] = 1.0
            total = 1.0
        weights[m] = w / total
    weights.setflags(write=False)
    return weights


def mel_spectrogram(spec: Spectrogram, n_mels: int = N_MELS, fmin: float = 0.0, fmax: float | None = None) -> np.ndarray:
    """Mel-band power, shape ``(n_frames, n_mels)``."""
    if fmax is None:
        fmax = spec.sample_rate / 2
    if not 0.0 <= fmin < fmax <= spec.sample_rate / 2:
        raise ValueError(f"need 0 <= fmin < fmax <= {spec.sample_rate / 2}, got fmin={fmin}, fmax={fmax}")
    if n_mels < 2:
        raise ValueError("n_mels must be >= 2")
    fb = mel_filterbank(spec.sample_rate, spec.frame_len, n_mels, float(fmin), float(fmax))
    return (spec.magnitudes ** 2) @ fb.T


def log_mel(mel: np.ndarray) -> np.ndarray:
    return np.log(np.asarray(mel, dtype=np.float64) + LOG_FLOOR)


def cepstra_from_log_mel(logmel: np.ndarray, n_coeffs: int = N_MFCC) -> np.ndarray:
    logmel = np.atleast_2d(np.asarray(logmel, dtype=np.float64))
    if n_coeffs > logmel.shape[1]:
        raise ValueError(f"n_coeffs={n_coeffs} exceeds n_mels={logmel.shape[1]}")
    return dct(logmel, type=2, norm="ortho", axis=1)[:, :n_coeffs]


def mfcc(mel: np.ndarray, n_coeffs: int = N_MFCC, sample_rate: int | None = None, hop: int | None = None) -> MelCepstra:
    return MelCepstra(cepstra_from_log_mel(log_mel(mel), n_coeffs), n_coeffs, sample_rate, hop)


def mfcc_from_audio(buf: AudioBuffer, n_coeffs: int = N_MFCC, frame_len: int = FRAME_LEN,
                    hop: int = HOP, n_mels: int = N_MELS) -> MelCepstra:
    spec = stft(buf, frame_len, hop)
    return mfcc(mel_spectrogram(spec, n_mels), n_coeffs, buf.sample_rate, hop)


def zero_crossing_rate(buf: AudioBuffer, frame_len: int = FRAME_LEN, hop: int = HOP) -> np.ndarray:
    fr = frames(buf, frame_len, hop)
    crossings = np.count_nonzero(fr[:, :-1] * fr[:, 1:] < 0.0, axis=1)
    return crossings / (frame_len - 1)


def rms_energy(buf: AudioBuffer, frame_len: int = FRAME_LEN, hop: int = HOP) -> np.ndarray:
    fr = frames(buf, frame_len, hop)
    return np.sqrt(np.mean(fr * fr, axis=1))


def spectral_centroid(spec: Spectrogram) -> np.ndarray:
    total = spec.magnitudes.sum(axis=1)
    weighted = spec.magnitudes @ spec.bin_frequencies
    out = np.zeros(spec.n_frames)
    nz = total > 0.0
    out[nz] = weighted[nz] / total[nz]
    return out


def _autocorr_ratio(fr: np.ndarray) -> np.ndarray:
    """Unbiased autocorrelation of each row, normalized by its zero lag."""
    n = fr.shape[1]
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(fr, nfft, axis=1)
    r = np.fft.irfft(spec.real ** 2 + spec.imag ** 2, nfft, axis=1)[:, :n]
    r0 = r[:, :1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (r / r0) * (n / (n - np.arange(n)))
    return np.where(r0 > 0.0, ratio, 0.0)


def estimate_f0(buf: AudioBuffer, frame_len: int = FRAME_LEN, hop: int = HOP) -> PitchTrack:
    """Autocorrelation pitch tracker over 50-500 Hz.

    A frame is voiced when its selected autocorrelation peak reaches 0.3 of
    the zero-lag value; the peak lag is refined by parabolic interpolation.
    """
    fs = buf.sample_rate
    if fs < 2000:
        raise ValueError(f"sample_rate must be >= 2000 Hz for F0 analysis, got {fs}")
    fr = frames(buf, frame_len, hop)
    fr = fr - fr.mean(axis=1, keepdims=True)
    energy = np.einsum("ij,ij->i", fr, fr)
    ratio = _autocorr_ratio(fr)

    min_lag = int(np.ceil(fs / F0_MAX))
    max_lag = min(int(np.floor(fs / F0_MIN)), frame_len // 2)
    f0 = np.zeros(fr.shape[0])
    voiced = np.zeros(fr.shape[0], dtype=bool)
    tiny = frame_len * 1e-12
    for i in range(fr.shape[0]):
        if energy[i] <= tiny:
            continue
        seg = ratio[i, min_lag - 1:max_lag + 2]
        mid = seg[1:-1]
        peaks = np.flatnonzero((mid >= seg[:-2]) & (mid > seg[2:]))
        if peaks.size == 0:
            continue
        best = mid[peaks].max()
        if best < VOICING_THRESHOLD:
            continue
        k = peaks[np.argmax(mid[peaks] >= max(OCTAVE_TOLERANCE * best, VOICING_THRESHOLD))]
        a, b, c = seg[k], seg[k + 1], seg[k + 2]
        denom = a - 2.0 * b + c
        shift = 0.5 * (a - c) / denom if denom != 0.0 else 0.0
        lag = min_lag + k + shift
        hz = fs / lag
        if F0_MIN <= hz <= F0_MAX:
            f0[i] = hz
            voiced[i] = True
    return PitchTrack(f0, voiced, hop, fs)
