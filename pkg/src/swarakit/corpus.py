"""Synthetic speech-like mini-corpus and test-signal helpers.

The bundled corpus (``swarakit/data/minicorpus``) was produced by
:func:`build_minicorpus`; regenerate it with ``python3 -m swarakit.corpus DIR``.
Each utterance is a chain of voiced "syllables" (harmonic complexes with a
gliding F0 and two formant-like resonances) separated by short fricative
noise bursts, with leading and trailing silence, a noise floor and a short
exponential reverb tail.
"""

from __future__ import annotations

import argparse
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from swarakit.audio_io import AudioBuffer, write_wav, write_wav_pcm16
from swarakit.translit import count_phonemes


@dataclass(frozen=True)
class UtteranceSpec:
    stem: str
    transcription: str
    language: str
    emotion: str
    speaker: str
    sample_rate: int
    encoding: str  # pcm16 | float32 | pcm16-stereo
    f0_hz: float
    f0_spread: float  # semitones of syllable-to-syllable movement
    noise_dbfs: float
    rt60_s: float
    phones_per_s: float = 10.0


MINICORPUS = (
    UtteranceSpec("u01_hi_default", "नमस्ते, आप कैसे हैं?", "hindi", "default", "Asha",
                  16000, "pcm16", 210.0, 2.0, -55.0, 0.20),
    UtteranceSpec("u02_en_happy", "The weather is lovely today.", "english", "happy", "Ravi",
                  22050, "float32", 140.0, 4.0, -60.0, 0.15, phones_per_s=14.0),
    UtteranceSpec("u03_mx_default", "Namaste, let's talk about मौसम", "mixed", "default", "Asha",
                  44100, "pcm16-stereo", 220.0, 2.5, -50.0, 0.30, phones_per_s=12.0),
    UtteranceSpec("u04_hi_sad", "मुझे यह गाना बहुत पसंद है", "hindi", "sad", "Ravi",
                  8000, "pcm16", 120.0, 0.8, -45.0, 0.25, phones_per_s=8.0),
    UtteranceSpec("u05_en_enunciation", "Please speak clearly and slowly.", "english", "enunciation", "Asha",
                  48000, "float32", 200.0, 1.5, -65.0, 0.10, phones_per_s=9.0),
    UtteranceSpec("u06_mx_confused", "Aaj ka meeting बहुत important है", "mixed", "confused", "Ravi",
                  24000, "pcm16", 130.0, 3.0, -52.0, 0.35, phones_per_s=16.0),
)


def _syllable(n: int, fs: int, f0_start: float, f0_end: float, formants: tuple[float, float]) -> np.ndarray:
    f0 = np.geomspace(f0_start, f0_end, n)
    phase = 2.0 * np.pi * np.cumsum(f0) / fs
    out = np.zeros(n)
    for h in range(1, 40):
        fh = f0 * h
        if fh[0] >= 0.45 * fs:
            break
        gain = 1.0 / h
        for fc in formants:
            gain = gain + 2.0 * np.exp(-0.5 * ((fh - fc) / (0.15 * fc)) ** 2) / h
        out += np.where(fh < 0.45 * fs, gain, 0.0) * np.sin(h * phase)
    ramp = min(n // 4, int(0.03 * fs))
    env = np.ones(n)
    env[:ramp] = 0.5 - 0.5 * np.cos(np.pi * np.arange(ramp) / ramp)
    env[n - ramp:] = env[:ramp][::-1]
    return out * env


def synthesize(spec: UtteranceSpec, seed: int = 0) -> AudioBuffer:
    fs = spec.sample_rate
    rng = np.random.default_rng(seed)
    phones = count_phonemes(spec.transcription, spec.language)
    speech_s = phones / spec.phones_per_s
    n_syll = max(4, int(round(phones / 2.5)))
    syll_s = speech_s / n_syll

    parts = [np.zeros(int(0.25 * fs))]
    semis = np.cumsum(rng.normal(0.0, spec.f0_spread, n_syll + 1))
    semis -= semis.mean()
    vowels = ((700.0, 1200.0), (300.0, 2300.0), (500.0, 1000.0), (400.0, 1900.0), (600.0, 1700.0))
    for k in range(n_syll):
        f_a = spec.f0_hz * 2.0 ** (semis[k] / 12.0)
        f_b = spec.f0_hz * 2.0 ** (semis[k + 1] / 12.0)
        voiced_n = int(syll_s * 0.7 * fs)
        parts.append(_syllable(voiced_n, fs, f_a, f_b, vowels[int(rng.integers(len(vowels)))]))
        gap = int(syll_s * 0.3 * fs)
        if rng.random() < 0.5:
            burst = np.diff(rng.standard_normal(gap + 1)) * 0.15
            parts.append(burst * np.hanning(gap))
        else:
            parts.append(np.zeros(gap))
    parts.append(np.zeros(int(0.35 * fs)))
    dry = np.concatenate(parts)
    dry /= np.max(np.abs(dry))

    # exponential-decay noise IR, mixed in as a mild tail
    ir_n = int(spec.rt60_s * fs)
    t = np.arange(ir_n) / fs
    ir = rng.standard_normal(ir_n) * 10.0 ** (-3.0 * t / spec.rt60_s)
    ir[0] = 0.0
    wet = np.convolve(dry, ir)[: dry.size]
    wet *= 0.25 / max(np.max(np.abs(wet)), 1e-12)
    x = dry + wet
    x = 0.7 * x / np.max(np.abs(x))
    x += 10.0 ** (spec.noise_dbfs / 20.0) * rng.standard_normal(x.size)
    return AudioBuffer(np.clip(x, -1.0, 1.0).astype(np.float32), fs, spec.stem)


def sidecar(spec: UtteranceSpec) -> dict:
    return {
        "transcription": spec.transcription,
        "language": spec.language,
        "emotion": spec.emotion,
        "speaker": spec.speaker,
    }


def build_minicorpus(out_dir: str | Path, seed: int = 0) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for i, spec in enumerate(MINICORPUS):
        buf = synthesize(spec, seed + i)
        wav = out / f"{spec.stem}.wav"
        if spec.encoding == "float32":
            write_wav(buf, wav)
        else:
            write_wav_pcm16(buf, wav, channels=2 if spec.encoding == "pcm16-stereo" else 1)
        (out / f"{spec.stem}.json").write_text(
            json.dumps(sidecar(spec), ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
        written.append(wav)
    return written


def minicorpus_dir() -> Path:
    """Location of the bundled mini-corpus."""
    return Path(str(resources.files("swarakit").joinpath("data/minicorpus")))


def add_noise(buf: AudioBuffer, snr_db: float, seed: int = 0) -> AudioBuffer:
    """Mix in seeded white noise at ``snr_db`` relative to the signal's mean power."""
    x = buf.samples.astype(np.float64)
    power = float(np.mean(x * x))
    noise = np.random.default_rng(seed).standard_normal(x.size)
    noise *= np.sqrt(power / 10.0 ** (snr_db / 10.0) / np.mean(noise * noise))
    return AudioBuffer((x + noise).astype(np.float32), buf.sample_rate, buf.source_id)


def tone_burst_mixture(snr_db: float, fs: int = 16000, seed: int = 0, duration_s: float = 4.0) -> AudioBuffer:
    """Alternating 1 kHz tone bursts and gaps plus white noise at a known SNR.

    The SNR is the ratio of burst power to noise power.
    """
    n = int(duration_s * fs)
    t = np.arange(n) / fs
    gate = (np.floor(t / 0.25) % 2 == 0).astype(np.float64)
    tone = 0.5 * np.sin(2.0 * np.pi * 1000.0 * t) * gate
    noise_power = 0.125 / 10.0 ** (snr_db / 10.0)  # burst power is 0.5**2 / 2
    noise = np.random.default_rng(seed).standard_normal(n) * np.sqrt(noise_power)
    return AudioBuffer((tone + noise).astype(np.float32), fs)


def reverberant_clicks(rt60_s: float, fs: int = 16000, seed: int = 0, duration_s: float = 4.0,
                       period_s: float = 1.0) -> AudioBuffer:
    """Impulse train convolved with an exponentially decaying noise IR of the given RT60."""
    n = int(duration_s * fs)
    x = np.zeros(n)
    x[int(0.1 * fs)::int(period_s * fs)] = 1.0
    ir_n = int(min(period_s * 0.9, 1.5 * rt60_s) * fs)
    t = np.arange(ir_n) / fs
    ir = np.random.default_rng(seed).standard_normal(ir_n) * 10.0 ** (-3.0 * t / rt60_s)
    y = np.convolve(x, ir)[:n]
    return AudioBuffer((0.5 * y / np.max(np.abs(y))).astype(np.float32), fs)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="Regenerate the synthetic mini-corpus.")
    ap.add_argument("out_dir")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    for path in build_minicorpus(args.out_dir, args.seed):
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
