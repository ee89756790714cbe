"""Corpus manifests: one JSON object per line, UTF-8.

Fields, in the order they are written:

==============  ========  =====================================================
field           required  meaning
==============  ========  =====================================================
id              yes       unique utterance id
audio_path      yes       WAV path relative to the manifest's directory
transcription   yes       non-empty Unicode text (Devanagari kept as-is)
language        yes       ``hindi`` | ``english`` | ``mixed``
emotion         yes       one of the eight emotion labels
speaker         no        speaker name (default ``""``)
tags            no        object with the numeric tags and a ``labels`` map
description     no        rendered natural-language description
==============  ========  =====================================================

Absent optional fields are written as ``null``. Floats use Python's
shortest round-trip repr, so ``load_manifest(write_manifest(r)) == r``.
Blank lines are ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from swarakit.audio_io import AudioBuffer
from swarakit.errors import (
    DanglingAudioPath,
    DuplicateId,
    ParseError,
    ScriptMismatch,
    UnknownEmotion,
)
from swarakit.tagging import SILENCE_POWER, EmotionLabel, FeatureTags, block_power, speaking_rate
from swarakit.translit import segment_scripts

LANGUAGES = ("hindi", "english", "mixed")

MIN_DURATION_S = 0.3
MAX_DURATION_S = 60.0
MIN_RATE = 1.0
MAX_RATE = 30.0
CLIP_FRACTION = 0.001
CLIP_LEVEL = 1.0 - 1.0 / 32768.0  # full-scale 16-bit sample


@dataclass(frozen=True)
class UtteranceRecord:
    id: str
    audio_path: str
    transcription: str
    language: str
    emotion: EmotionLabel
    speaker: str = ""
    tags: FeatureTags | None = None
    description: str | None = None

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "audio_path": self.audio_path,
            "transcription": self.transcription,
            "language": self.language,
            "emotion": self.emotion.value,
            "speaker": self.speaker,
            "tags": self.tags.to_json() if self.tags is not None else None,
            "description": self.description,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "UtteranceRecord":
        if not isinstance(doc, dict):
            raise ValueError("record must be a JSON object")
        for key in ("id", "audio_path", "transcription", "language", "emotion"):
            if not isinstance(doc.get(key), str):
                raise ValueError(f"field {key!r} is missing or not a string")
        if not doc["id"]:
            raise ValueError("field 'id' is empty")
        if not doc["transcription"].strip():
            raise ValueError("field 'transcription' is empty")
        if doc["language"] not in LANGUAGES:
            raise ValueError(f"language must be one of {LANGUAGES}, got {doc['language']!r}")
        tags = doc.get("tags")
        return cls(
            id=doc["id"],
            audio_path=doc["audio_path"],
            transcription=doc["transcription"],
            language=doc["language"],
            emotion=EmotionLabel.parse(doc["emotion"]),
            speaker=doc.get("speaker") or "",
            tags=FeatureTags.from_json(tags) if tags is not None else None,
            description=doc.get("description"),
        )


def script_consistent(record: UtteranceRecord) -> bool:
    scripts = {s.script for s in segment_scripts(record.transcription)}
    if record.language == "hindi":
        return "devanagari" in scripts
    if record.language == "english":
        return "latin" in scripts and "devanagari" not in scripts
    return "latin" in scripts and "devanagari" in scripts


def resolve_audio(root: Path, audio_path: str) -> Path:
    return (root / audio_path).resolve()


def load_manifest(path: str | Path, check_audio: bool = True) -> list[UtteranceRecord]:
    path = Path(path)
    root = path.parent.resolve()
    records: list[UtteranceRecord] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = UtteranceRecord.from_json(json.loads(line))
            except (ValueError, KeyError, TypeError, UnknownEmotion) as exc:
                raise ParseError(str(exc), lineno) from None
            if rec.id in seen:
                raise DuplicateId(f"duplicate id {rec.id!r}", lineno)
            seen.add(rec.id)
            if check_audio:
                audio = resolve_audio(root, rec.audio_path)
                if not audio.is_relative_to(root) or not audio.is_file():
                    raise DanglingAudioPath(f"audio {rec.audio_path!r} does not resolve under {root}", lineno)
            if not script_consistent(rec):
                raise ScriptMismatch(f"transcription script does not match language {rec.language!r}", lineno)
            records.append(rec)
    return records


def dumps_record(rec: UtteranceRecord) -> str:
    return json.dumps(rec.to_json(), ensure_ascii=False, allow_nan=False)


def write_manifest(records: Iterable[UtteranceRecord], path: str | Path) -> None:
    records = list(records)
    seen: set[str] = set()
    for i, rec in enumerate(records, start=1):
        if rec.id in seen:
            raise DuplicateId(f"duplicate id {rec.id!r}", i)
        seen.add(rec.id)
    text = "".join(dumps_record(r) + "\n" for r in records)
    Path(path).write_text(text, encoding="utf-8")


@dataclass(frozen=True)
class Diagnostic:
    code: str  # duration | speaking_rate | clipping | silence
    message: str


def validate_pairing(record: UtteranceRecord, buf: AudioBuffer) -> tuple[Diagnostic, ...]:
    """Flag audio/transcript pairs that look inconsistent. Never raises."""
    flags: list[Diagnostic] = []
    dur = buf.duration_seconds
    if not MIN_DURATION_S <= dur <= MAX_DURATION_S:
        flags.append(Diagnostic("duration", f"duration {dur:.3f} s outside [{MIN_DURATION_S}, {MAX_DURATION_S}] s"))
    if dur > 0:
        rate = speaking_rate(record.transcription, dur, record.language)
        if not MIN_RATE <= rate <= MAX_RATE:
            flags.append(Diagnostic(
                "speaking_rate", f"{rate:.1f} phonemes/s outside [{MIN_RATE}, {MAX_RATE}]; transcript may not match audio"
            ))
    if len(buf):
        clipped = np.count_nonzero(np.abs(buf.samples) >= CLIP_LEVEL) / len(buf)
        if clipped >= CLIP_FRACTION:
            flags.append(Diagnostic("clipping", f"{clipped:.2%} of samples at full scale"))
        power = block_power(buf, 0.025)
        if power.size == 0 or np.all(power < SILENCE_POWER):
            flags.append(Diagnostic("silence", "every frame is below -80 dBFS"))
    return tuple(flags)


def by_id(records: Sequence[UtteranceRecord]) -> dict[str, UtteranceRecord]:
    return {r.id: r for r in records}
