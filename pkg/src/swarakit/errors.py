"""Exception types shared across the toolkit.

Everything derives from :class:`SwaraError` so the CLI can map data errors to
exit code 1 with a single ``except`` clause.
"""

from __future__ import annotations


class SwaraError(Exception):
    """Base class for all data errors raised by swarakit."""


# audio_io
class MalformedHeader(SwaraError):
    pass


class UnsupportedEncoding(SwaraError):
    pass


class EmptyAudio(SwaraError):
    pass


# dsp / tagging / metrics
class SignalTooShort(SwaraError):
    pass


class AllSilent(SwaraError):
    pass


class InsufficientVoicing(SwaraError):
    pass


class EmptyTranscript(SwaraError):
    pass


class NonpositiveDuration(SwaraError):
    pass


class UnknownFeature(SwaraError):
    pass


class UnknownEmotion(SwaraError):
    pass


# describe
class MissingSlot(SwaraError):
    def __init__(self, slot: str, record_id: str | None = None):
        self.slot = slot
        self.record_id = record_id
        where = f" (record {record_id!r})" if record_id is not None else ""
        super().__init__(f"template references label {slot!r} which is not present{where}")


# translit
class UnmappableCharacter(SwaraError):
    def __init__(self, char: str, offset: int):
        self.char = char
        self.offset = offset
        super().__init__(f"no mapping for {char!r} (U+{ord(char):04X}) at offset {offset}")


class UnparseableSequence(SwaraError):
    def __init__(self, text: str, offset: int):
        self.text = text
        self.offset = offset
        super().__init__(f"cannot tokenize {text[offset:offset + 8]!r} at offset {offset}")


# codec
class TooFewFrames(SwaraError):
    pass


class DegenerateData(SwaraError):
    pass


class DimensionMismatch(SwaraError):
    pass


class IndexOutOfRange(SwaraError):
    pass


class EmptyCodes(SwaraError):
    pass


# metrics
class EmptyReference(SwaraError):
    pass


class CoeffMismatch(SwaraError):
    pass


class LengthMismatch(SwaraError):
    pass


class RateMismatch(SwaraError):
    pass


class MissingMetric(SwaraError):
    def __init__(self, record_id: str, metric: str):
        self.record_id = record_id
        self.metric = metric
        super().__init__(f"utterance {record_id!r} is missing metric {metric!r}")


# manifest
class ManifestError(SwaraError):
    """A manifest problem tied to a line number (1-based)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class ParseError(ManifestError):
    pass


class DuplicateId(ManifestError):
    pass


class DanglingAudioPath(ManifestError):
    pass


class ScriptMismatch(ManifestError):
    pass


class UnknownStage(SwaraError):
    pass


class UntaggedRecord(SwaraError):
    def __init__(self, record_id: str):
        self.record_id = record_id
        super().__init__(f"record {record_id!r} has no tags; run `swarakit tag` first")
