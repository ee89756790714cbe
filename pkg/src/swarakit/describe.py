"""Template-driven utterance descriptions.

A template is an ordered list of clauses. Each clause has several phrasing
variants with ``{slot}`` placeholders naming a bin label (``{snr_db}``,
``{monotony}``, ...) or the reserved ``{speaker}`` slot. The seed alone picks
one variant per clause, so rendering is reproducible.

Template file layout (JSON)::

    {"format": "swarakit-description-template", "version": 1,
     "clauses": [{"variants": ["..."], "connector": false}, ...],
     "connectors": [",", ";"]}

A clause with ``"connector": true`` is attached to the previous clause with
one of ``connectors`` (also seed-selected) instead of a plain space.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import random
import string
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from swarakit.errors import MissingSlot, UntaggedRecord
from swarakit.tagging import FeatureTags

SPEAKER_SLOT = "speaker"


@dataclass(frozen=True)
class Clause:
    variants: tuple[str, ...]
    connector: bool = False

    @property
    def slots(self) -> frozenset[str]:
        names = set()
        for v in self.variants:
            names.update(f for _, f, _, _ in string.Formatter().parse(v) if f)
        return frozenset(names)


@dataclass(frozen=True)
class DescriptionTemplate:
    clauses: tuple[Clause, ...]
    connectors: tuple[str, ...] = (",",)

    def __post_init__(self):
        if not self.clauses:
            raise ValueError("template needs at least one clause")
        for c in self.clauses:
            if not c.variants:
                raise ValueError("every clause needs at least one variant")
        if not self.connectors:
            raise ValueError("template needs at least one connector")

    @property
    def slots(self) -> frozenset[str]:
        out: set[str] = set()
        for c in self.clauses:
            out |= c.slots
        return frozenset(out)

    @property
    def label_slots(self) -> frozenset[str]:
        return self.slots - {SPEAKER_SLOT}

    def to_json(self) -> dict:
        return {
            "format": "swarakit-description-template",
            "version": 1,
            "clauses": [{"variants": list(c.variants), "connector": c.connector} for c in self.clauses],
            "connectors": list(self.connectors),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "DescriptionTemplate":
        clauses = tuple(
            Clause(tuple(c["variants"]), bool(c.get("connector", False))) for c in doc["clauses"]
        )
        return cls(clauses, tuple(doc.get("connectors", [","])))


def load_template(path: str | Path) -> DescriptionTemplate:
    return DescriptionTemplate.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def default_template() -> DescriptionTemplate:
    text = resources.files("swarakit").joinpath("data/description_template_v1.json").read_text(encoding="utf-8")
    return DescriptionTemplate.from_json(json.loads(text))


def render_description(tags: FeatureTags, speaker: str, template: DescriptionTemplate, seed: int) -> str:
    for slot in sorted(template.label_slots):
        if slot not in tags.labels:
            raise MissingSlot(slot)
    values = dict(tags.labels)
    values[SPEAKER_SLOT] = speaker
    rng = random.Random(seed)
    parts: list[str] = []
    for clause in template.clauses:
        text = clause.variants[rng.randrange(len(clause.variants))].format_map(values)
        if clause.connector and parts:
            parts[-1] += template.connectors[rng.randrange(len(template.connectors))]
        parts.append(text)
    sentence = " ".join(parts).strip()
    sentence = sentence[:1].upper() + sentence[1:]
    if not sentence.endswith((".", "!", "?")):
        sentence += "."
    return sentence


def stable_hash(record_id: str) -> int:
    return int.from_bytes(hashlib.sha256(record_id.encode("utf-8")).digest()[:8], "big")


def record_seed(base_seed: int, record_id: str) -> int:
    return base_seed ^ stable_hash(record_id)


def describe_corpus(records: Sequence, template: DescriptionTemplate, base_seed: int = 0,
                    speaker: str | None = None) -> list:
    """Return copies of ``records`` with ``description`` filled in, order preserved.

    ``speaker`` forces one name for every record (single-speaker corpora);
    otherwise each record's own speaker field is used.
    """
    out = []
    for rec in records:
        if rec.tags is None:
            raise UntaggedRecord(rec.id)
        name = speaker if speaker is not None else rec.speaker
        try:
            text = render_description(rec.tags, name, template, record_seed(base_seed, rec.id))
        except MissingSlot as exc:
            raise MissingSlot(exc.slot, rec.id) from None
        out.append(dataclasses.replace(rec, description=text))
    return out

