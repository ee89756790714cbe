"""Utterance-level tags and their text-bin labels.

Continuous features: speaking rate, SNR, reverberation time, pitch
monotony, mean RMS energy and duration. Each is mapped to a descriptive
label ("quite noisy", "very fast", ...) through a bin-edges file.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np

from swarakit import dsp
from swarakit.audio_io import AudioBuffer
from swarakit.errors import (
    AllSilent,
    EmptyTranscript,
    InsufficientVoicing,
    NonpositiveDuration,
    SignalTooShort,
    UnknownEmotion,
    UnknownFeature,
)
from swarakit.translit import count_phonemes

SNR_FRAME_S = 0.025
SNR_MAX_DB = 60.0
SILENCE_POWER = 1e-8  # -80 dBFS

REVERB_FRAME_S = 0.010
REVERB_MIN_DROP_DB = 20.0
REVERB_FIT_DB = (5.0, 25.0)  # fit window below the onset peak
REVERB_RISE_TOL_DB = 0.5
REVERB_PEAK_RANGE_DB = 60.0  # peaks quieter than this below the loudest frame are ignored
REVERB_FLOOR_DB = 120.0

MIN_VOICED_FRAMES = 5
MIN_ANALYSIS_S = 0.5

# bin-edges feature name -> FeatureTags attribute
FEATURE_FIELDS = {
    "speaking_rate": "speaking_rate",
    "snr_db": "snr_db",
    "reverberation": "reverb_rt_ms",
    "monotony": "monotony_semitones",
    "mean_energy": "mean_energy",
    "duration": "duration_s",
}


class EmotionLabel(str, enum.Enum):
    WHISPER = "whisper"
    ENUNCIATION = "enunciation"
    SAD = "sad"
    DEFAULT = "default"
    LAUGHING = "laughing"
    CONFUSED = "confused"
    HAPPY = "happy"
    EMPHASIS = "emphasis"

    @classmethod
    def parse(cls, value: str) -> "EmotionLabel":
        try:
            return cls(value)
        except ValueError:
            raise UnknownEmotion(
                f"unknown emotion {value!r}; expected one of {', '.join(e.value for e in cls)}"
            ) from None

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class FeatureTags:
    speaking_rate: float
    snr_db: float
    reverb_rt_ms: float
    monotony_semitones: float
    mean_energy: float
    duration_s: float
    labels: Mapping[str, str] = field(default_factory=dict)

    def value(self, feature: str) -> float:
        if feature not in FEATURE_FIELDS:
            raise UnknownFeature(f"no tag feature named {feature!r}")
        return getattr(self, FEATURE_FIELDS[feature])

    def to_json(self) -> dict:
        return {
            "speaking_rate": self.speaking_rate,
            "snr_db": self.snr_db,
            "reverb_rt_ms": self.reverb_rt_ms,
            "monotony_semitones": self.monotony_semitones,
            "mean_energy": self.mean_energy,
            "duration_s": self.duration_s,
            "labels": {k: self.labels[k] for k in sorted(self.labels)},
        }

    @classmethod
    def from_json(cls, doc: dict) -> "FeatureTags":
        return cls(
            speaking_rate=float(doc["speaking_rate"]),
            snr_db=float(doc["snr_db"]),
            reverb_rt_ms=float(doc["reverb_rt_ms"]),
            monotony_semitones=float(doc["monotony_semitones"]),
            mean_energy=float(doc["mean_energy"]),
            duration_s=float(doc["duration_s"]),
            labels=dict(doc.get("labels", {})),
        )


@dataclass(frozen=True)
class Bins:
    edges: tuple[float, ...]
    labels: tuple[str, ...]


class BinEdges:
    """Immutable feature -> (edges, labels) table."""

    def __init__(self, features: Mapping[str, tuple]):
        table = {}
        for name, (edges, labels) in features.items():
            edges = tuple(float(e) for e in edges)
            labels = tuple(str(lab) for lab in labels)
            if any(b <= a for a, b in zip(edges, edges[1:])):
                raise ValueError(f"bin edges for {name!r} must be strictly increasing")
            if len(labels) != len(edges) + 1:
                raise ValueError(f"{name!r}: {len(edges)} edges need {len(edges) + 1} labels, got {len(labels)}")
            table[name] = Bins(edges, labels)
        self._table = MappingProxyType(table)

    def __contains__(self, name: str) -> bool:
        return name in self._table

    def __getitem__(self, name: str) -> Bins:
        return self._table[name]

    @property
    def features(self) -> tuple[str, ...]:
        return tuple(self._table)

    def to_json(self) -> dict:
        return {
            "format": "swarakit-bin-edges",
            "version": 1,
            "features": {
                name: {"edges": list(b.edges), "labels": list(b.labels)} for name, b in self._table.items()
            },
        }

    @classmethod
    def from_json(cls, doc: dict) -> "BinEdges":
        feats = doc.get("features", doc)
        return cls({name: (spec["edges"], spec["labels"]) for name, spec in feats.items()})


def load_bin_edges(path: str | Path) -> BinEdges:
    return BinEdges.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def default_bin_edges() -> BinEdges:
    text = resources.files("swarakit").joinpath("data/bin_edges_v1.json").read_text(encoding="utf-8")
    return BinEdges.from_json(json.loads(text))


def bin_index(value: float, edges: tuple[float, ...]) -> int:
    # boundary values go to the upper bin
    return int(np.searchsorted(np.asarray(edges), value, side="right"))


def bin_feature(value: float, feature_name: str, edges: BinEdges) -> str:
    if feature_name not in edges:
        raise UnknownFeature(f"feature {feature_name!r} is not in the bin-edges table")
    bins = edges[feature_name]
    return bins.labels[bin_index(value, bins.edges)]


# --------------------------------------------------------------------------
# features

def speaking_rate(transcription: str, duration_s: float, language: str) -> float:
    """Phones per second of audio."""
    if not transcription or not transcription.strip():
        raise EmptyTranscript("transcript is empty")
    if not duration_s > 0:
        raise NonpositiveDuration(f"duration must be positive, got {duration_s}")
    return count_phonemes(transcription, language) / duration_s


def block_power(buf: AudioBuffer, frame_s: float) -> np.ndarray:
    size = max(1, int(round(frame_s * buf.sample_rate)))
    n = len(buf) // size
    x = buf.samples[: n * size].astype(np.float64).reshape(n, size)
    return np.mean(x * x, axis=1)


def _require_duration(buf: AudioBuffer) -> None:
    if buf.duration_seconds < MIN_ANALYSIS_S:
        raise SignalTooShort(f"need at least {MIN_ANALYSIS_S} s of audio, got {buf.duration_seconds:.3f} s")


def estimate_snr(buf: AudioBuffer) -> float:
    """Blind SNR from the spread of 25 ms frame powers.

    The 90th-percentile frame power is taken as speech plus noise and the
    10th percentile as noise; the noise estimate is subtracted from the
    former before forming the ratio. Clamped to [0, 60] dB.
    """
    _require_duration(buf)
    power = block_power(buf, SNR_FRAME_S)
    if np.all(power < SILENCE_POWER):
        raise AllSilent("every frame is below -80 dBFS")
    p90, p10 = np.percentile(power, [90.0, 10.0])
    if p10 <= 0.0:
        return SNR_MAX_DB
    speech = p90 - p10
    if speech <= 0.0:
        return 0.0
    return float(np.clip(10.0 * np.log10(speech / p10), 0.0, SNR_MAX_DB))


def _decay_time_ms(e: np.ndarray, p: int, j_end: int, frame_s: float) -> float | None:
    top = e[p]
    seg = e[p:j_end + 1]
    if top - seg.min() < REVERB_MIN_DROP_DB:
        return None
    hi, lo = top - REVERB_FIT_DB[0], top - REVERB_FIT_DB[1]
    idx = np.flatnonzero((seg <= hi) & (seg >= lo))
    if idx.size >= 3:
        slope = np.polyfit(idx * frame_s, seg[idx], 1)[0]
    else:
        # decay faster than the frame rate: two-point slope to the -20 dB crossing
        k = int(np.argmax(seg <= top - REVERB_MIN_DROP_DB))
        slope = (seg[k] - top) / (k * frame_s)
    if slope >= 0.0:
        return None
    return -60.0 / slope * 1000.0


def estimate_reverb(buf: AudioBuffer) -> float:
    """Blind RT60-style decay time in milliseconds (0 when no offset is found).

    Works on 10 ms frame energies: every local energy peak followed by a
    monotone fall of at least 20 dB is an offset; the log-energy slope over
    the -5..-25 dB part of the fall is extrapolated to 60 dB. The median over
    offsets is reported.
    """
    _require_duration(buf)
    power = block_power(buf, REVERB_FRAME_S)
    with np.errstate(divide="ignore"):
        e = 10.0 * np.log10(power)
    top = np.max(e)
    if not np.isfinite(top):
        return 0.0
    e = np.maximum(e, top - REVERB_FLOOR_DB)
    n = e.shape[0]
    times = []
    p = 1
    while p < n - 1:
        if e[p] >= e[p - 1] and e[p] > e[p + 1] and e[p] >= top - REVERB_PEAK_RANGE_DB:
            j = p
            while j + 1 < n and e[j + 1] <= e[j] + REVERB_RISE_TOL_DB:
                j += 1
            rt = _decay_time_ms(e, p, j, REVERB_FRAME_S)
            if rt is not None:
                times.append(rt)
            p = max(j, p + 1)
        else:
            p += 1
    return float(np.median(times)) if times else 0.0


def monotony(track: dsp.PitchTrack) -> float:
    """Std-dev (semitones) of voiced F0 about its geometric mean."""
    f0 = track.voiced_f0
    if f0.size < MIN_VOICED_FRAMES:
        raise InsufficientVoicing(f"need {MIN_VOICED_FRAMES} voiced frames, got {f0.size}")
    if np.all(f0 == f0[0]):
        return 0.0  # avoid rounding residue from the mean of identical logs
    logf = np.log2(f0)
    semis = 12.0 * (logf - logf.mean())
    return float(np.sqrt(np.mean(semis * semis)))


def label_features(tags_values: Mapping[str, float], edges: BinEdges) -> dict[str, str]:
    return {name: bin_feature(tags_values[name], name, edges) for name in FEATURE_FIELDS if name in edges}


def tag_utterance(record, buf: AudioBuffer, edges: BinEdges) -> FeatureTags:
    """Compute every tag for one utterance; any component error propagates."""
    duration = buf.duration_seconds
    rate = speaking_rate(record.transcription, duration, record.language)
    snr = estimate_snr(buf)
    reverb = estimate_reverb(buf)
    mono = monotony(dsp.estimate_f0(buf))
    energy = float(np.mean(dsp.rms_energy(buf)))
    values = {
        "speaking_rate": rate,
        "snr_db": snr,
        "reverberation": reverb,
        "monotony": mono,
        "mean_energy": energy,
        "duration": duration,
    }
    return FeatureTags(
        speaking_rate=rate,
        snr_db=snr,
        reverb_rt_ms=reverb,
        monotony_semitones=mono,
        mean_energy=energy,
        duration_s=duration,
        labels=label_features(values, edges),
    )
