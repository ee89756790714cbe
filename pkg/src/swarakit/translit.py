"""Devanagari <-> Latin transliteration, script segmentation, phoneme counts.

The built-in scheme is an ITRANS-style ASCII romanization made fully
reversible:

* consonants carry an inherent ``a`` unless followed by a vowel sign or
  virama (``k`` + ``a`` = क, a bare ``k`` = क्);
* rarely used letters get marker characters (``~ri`` ऋ, ``^e`` ऎ, ``Qn`` ऩ,
  ``Z`` nukta) so that no two tokens collide;
* ``_`` separates two units whose concatenation would otherwise tokenize
  differently (``ka_i`` = कइ, ``kai`` = कै, ``k_ha`` = क्ह, ``kha`` = ख).

``deva_to_latin`` inserts the separator only where it is needed, which makes
``latin_to_deva(deva_to_latin(x)) == x`` hold for all accepted input.
ASCII letters, digits and the scheme's marker characters are reserved in
Devanagari input.

Phoneme counting rules
----------------------
Devanagari: each consonant is one phone, each vowel sign or independent
vowel one phone, the inherent schwa one phone except word-finally in words
of two or more syllables. Virama adds nothing; anusvara and visarga add one;
candrabindu and nukta add nothing.

Latin (English rules): ``th``, ``sh``, ``ch``, ``ph`` are one phone; a run of
vowels (a, e, i, o, u) is one phone; a final ``e`` after a consonant is
silent when an earlier vowel exists; every other letter is one phone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable

from swarakit.errors import EmptyTranscript, UnmappableCharacter, UnparseableSequence

SEPARATOR = "_"

_CONSONANTS = {
    "क": "k", "ख": "kh", "ग": "g", "घ": "gh", "ङ": "~N",
    "च": "ch", "छ": "Ch", "ज": "j", "झ": "jh", "ञ": "~n",
    "ट": "T", "ठ": "Th", "ड": "D", "ढ": "Dh", "ण": "N",
    "त": "t", "थ": "th", "द": "d", "ध": "dh", "न": "n", "ऩ": "Qn",
    "प": "p", "फ": "ph", "ब": "b", "भ": "bh", "म": "m",
    "य": "y", "र": "r", "ऱ": "Qr", "ल": "l", "ळ": "L", "ऴ": "QL", "व": "v",
    "श": "sh", "ष": "Sh", "स": "s", "ह": "h",
    "क़": "q", "ख़": "K", "ग़": "G", "ज़": "z", "ड़": "R", "ढ़": "Rh", "फ़": "f", "य़": "Y",
}

_VOWELS = {
    "अ": "a", "आ": "aa", "इ": "i", "ई": "ii", "उ": "u", "ऊ": "uu",
    "ऋ": "~ri", "ॠ": "~rii", "ऌ": "~li", "ॡ": "~lii",
    "ए": "e", "ऐ": "ai", "ओ": "o", "औ": "au",
    "ऍ": "~e", "ऑ": "~o", "ऎ": "^e", "ऒ": "^o", "ऄ": "^a",
}

_MATRAS = {
    "ा": "aa", "ि": "i", "ी": "ii", "ु": "u", "ू": "uu",
    "ृ": "~ri", "ॄ": "~rii", "ॢ": "~li", "ॣ": "~lii",
    "े": "e", "ै": "ai", "ो": "o", "ौ": "au",
    "ॅ": "~e", "ॉ": "~o", "ॆ": "^e", "ॊ": "^o",
}

_SIGNS = {
    "ं": "M", "ँ": "~M", "ः": "H", "ऽ": "~a", "ॐ": "OM", "।": "|", "॥": "||",
    "०": "0", "१": "1", "२": "2", "३": "3", "४": "4",
    "५": "5", "६": "6", "७": "7", "८": "8", "९": "9",
}

VIRAMA = "्"
NUKTA = "़"
NUKTA_LATIN = "Z"

# phone contributions of signs (default 0)
_SIGN_PHONES = {"ं": 1, "ः": 1}


def _is_devanagari(ch: str) -> bool:
    return "ऀ" <= ch <= "ॿ"


def _is_latin_letter(ch: str) -> bool:
    return ("a" <= ch <= "z") or ("A" <= ch <= "Z")


@dataclass(frozen=True)
class ScriptSpan:
    text: str
    script: str  # "latin" | "devanagari" | "neutral"
    start: int
    end: int


@dataclass(frozen=True)
class TranslitScheme:
    name: str
    consonants: dict
    vowels: dict
    matras: dict
    signs: dict
    virama: str = VIRAMA
    nukta: str = NUKTA
    nukta_latin: str = NUKTA_LATIN
    separator: str = SEPARATOR
    _tokens: dict = field(init=False, repr=False, compare=False)
    _max_token: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        # latin token -> (kind, independent deva, matra deva or None)
        tokens: dict[str, tuple[str, str, str | None]] = {}

        def add(latin: str, entry):
            if not latin or latin in tokens or latin == self.separator:
                raise ValueError(f"scheme {self.name!r}: Latin token {latin!r} is empty or not unique")
            tokens[latin] = entry

        matra_by_latin = {}
        for deva, latin in self.matras.items():
            if latin in matra_by_latin:
                raise ValueError(f"scheme {self.name!r}: two vowel signs share {latin!r}")
            matra_by_latin[latin] = deva
        for deva, latin in self.consonants.items():
            add(latin, ("consonant", deva, None))
        for deva, latin in self.vowels.items():
            add(latin, ("vowel", deva, matra_by_latin.get(latin)))
        orphan = set(matra_by_latin) - set(self.vowels.values())
        if orphan:
            raise ValueError(f"scheme {self.name!r}: vowel signs without an independent vowel: {sorted(orphan)}")
        for deva, latin in self.signs.items():
            add(latin, ("sign", deva, None))
        add(self.nukta_latin, ("nukta", self.nukta, None))
        if "a" not in tokens or tokens["a"][0] != "vowel":
            raise ValueError(f"scheme {self.name!r} must map the inherent vowel to 'a'")
        object.__setattr__(self, "_tokens", tokens)
        object.__setattr__(self, "_max_token", max(len(t) for t in tokens))

    @property
    def deva_to_latin_map(self) -> dict:
        out = {}
        for table in (self.consonants, self.vowels, self.matras, self.signs):
            out.update(table)
        out[self.nukta] = self.nukta_latin
        return out

    @property
    def latin_to_deva_map(self) -> dict:
        return {latin: deva for latin, (_kind, deva, _m) in self._tokens.items()}

    @property
    def reserved_ascii(self) -> frozenset:
        chars = {self.separator}
        for latin in self._tokens:
            chars.update(c for c in latin if ord(c) < 128)
        return frozenset(chars)

    def match(self, text: str, pos: int) -> str | None:
        """Longest token starting at ``pos``."""
        for size in range(min(self._max_token, len(text) - pos), 0, -1):
            cand = text[pos:pos + size]
            if cand in self._tokens:
                return cand
        return None

    def to_json(self) -> dict:
        return {
            "format": "swarakit-translit-scheme",
            "version": 1,
            "name": self.name,
            "consonants": self.consonants,
            "vowels": self.vowels,
            "matras": self.matras,
            "signs": self.signs,
            "virama": self.virama,
            "nukta": self.nukta,
            "nukta_latin": self.nukta_latin,
            "separator": self.separator,
        }


def default_scheme() -> TranslitScheme:
    return _builtin()


@lru_cache(maxsize=1)
def _builtin() -> TranslitScheme:
    return TranslitScheme("itrans-rev", dict(_CONSONANTS), dict(_VOWELS), dict(_MATRAS), dict(_SIGNS))


def load_scheme(path: str | Path) -> TranslitScheme:
    """Load a scheme file (JSON, same layout as :meth:`TranslitScheme.to_json`)."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return TranslitScheme(
        name=doc.get("name", Path(path).stem),
        consonants=doc["consonants"],
        vowels=doc["vowels"],
        matras=doc.get("matras", {}),
        signs=doc.get("signs", {}),
        virama=doc.get("virama", VIRAMA),
        nukta=doc.get("nukta", NUKTA),
        nukta_latin=doc.get("nukta_latin", NUKTA_LATIN),
        separator=doc.get("separator", SEPARATOR),
    )


# --------------------------------------------------------------------------
# segmentation

def _classify(ch: str) -> str:
    if _is_devanagari(ch):
        return "devanagari"
    if _is_latin_letter(ch):
        return "latin"
    return "neutral"


def segment_scripts(text: str) -> list[ScriptSpan]:
    """Partition ``text`` into maximal Latin / Devanagari / neutral spans.

    Neutral characters (digits, punctuation, whitespace, other scripts) join
    the span before them; a neutral run at the very start stands alone.
    """
    runs: list[list] = []  # [script, start, end]
    for i, ch in enumerate(text):
        script = _classify(ch)
        if runs and runs[-1][0] == script:
            runs[-1][2] = i + 1
        else:
            runs.append([script, i, i + 1])

    merged: list[list] = []
    for script, start, end in runs:
        if script == "neutral" and merged:
            merged[-1][2] = end
        elif merged and merged[-1][0] == script:
            merged[-1][2] = end
        else:
            merged.append([script, start, end])
    return [ScriptSpan(text[s:e], script, s, e) for script, s, e in merged]


# --------------------------------------------------------------------------
# Latin -> Devanagari

def latin_to_deva(text: str, scheme: TranslitScheme | None = None) -> str:
    """Greedy longest-match parse of scheme-canonical Latin."""
    scheme = scheme or default_scheme()
    tokens = scheme._tokens
    out: list[str] = []
    pending = False  # a consonant is waiting for its vowel
    pos = 0
    n = len(text)
    while pos < n:
        tok = scheme.match(text, pos)
        if tok is None:
            ch = text[pos]
            if ch == scheme.separator:
                if pending:
                    out.append(scheme.virama)
                pending = False
                pos += 1
                continue
            if _is_latin_letter(ch) or ch in scheme.reserved_ascii:
                raise UnparseableSequence(text, pos)
            if pending:
                out.append(scheme.virama)
                pending = False
            out.append(ch)
            pos += 1
            continue

        kind, deva, matra = tokens[tok]
        if kind == "consonant":
            if pending:
                out.append(scheme.virama)
            out.append(deva)
            pending = True
        elif kind == "nukta":
            if not pending:
                raise UnparseableSequence(text, pos)
            out.append(deva)
        elif kind == "vowel":
            if pending:
                if tok != "a":
                    if matra is None:
                        raise UnparseableSequence(text, pos)
                    out.append(matra)
                pending = False
            else:
                out.append(deva)
        else:
            if pending:
                out.append(scheme.virama)
                pending = False
            out.append(deva)
        pos += len(tok)
    if pending:
        out.append(scheme.virama)
    return "".join(out)


# --------------------------------------------------------------------------
# Devanagari -> Latin

def _deva_units(text: str, scheme: TranslitScheme) -> list[tuple[str, str, bool]]:
    """Split into (latin, deva, is_neutral) units; consonant units include their vowel."""
    cons, vowels, matras, signs = scheme.consonants, scheme.vowels, scheme.matras, scheme.signs
    reserved = scheme.reserved_ascii
    units: list[tuple[str, str, bool]] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in cons:
            start = i
            latin = [cons[ch]]
            i += 1
            while i < n and text[i] == scheme.nukta:
                latin.append(scheme.nukta_latin)
                i += 1
            if i < n and text[i] in matras:
                latin.append(matras[text[i]])
                i += 1
            elif i < n and text[i] == scheme.virama:
                i += 1
            else:
                latin.append("a")
            units.append(("".join(latin), text[start:i], False))
        elif ch in vowels:
            units.append((vowels[ch], ch, False))
            i += 1
        elif ch in signs:
            units.append((signs[ch], ch, False))
            i += 1
        elif _is_devanagari(ch) or _is_latin_letter(ch) or ch in reserved:
            # unknown code point, or a sign / virama / nukta with no consonant
            raise UnmappableCharacter(ch, i)
        else:
            units.append((ch, ch, True))
            i += 1
    return units


def _parses_to(latin: str, deva: str, scheme: TranslitScheme) -> bool:
    try:
        return latin_to_deva(latin, scheme) == deva
    except UnparseableSequence:
        return False


def deva_to_latin(text: str, scheme: TranslitScheme | None = None) -> str:
    scheme = scheme or default_scheme()
    out: list[str] = []
    win_latin, win_deva = "", ""
    for latin, deva, neutral in _deva_units(text, scheme):
        if neutral:
            out.append(win_latin + latin)
            win_latin, win_deva = "", ""
            continue
        target = win_deva + deva
        if _parses_to(win_latin + latin, target, scheme):
            win_latin += latin
        else:
            joined = win_latin + scheme.separator + latin
            if not _parses_to(joined, target, scheme):  # pragma: no cover - scheme invariant
                raise UnmappableCharacter(deva[0], len("".join(out)))
            win_latin = joined
        win_deva = target
    out.append(win_latin)
    return "".join(out)


# --------------------------------------------------------------------------
# phoneme counting

_ENGLISH_DIGRAPHS = ("th", "sh", "ch", "ph")
_ENGLISH_VOWELS = frozenset("aeiou")


def _english_word_phones(word: str) -> int:
    w = word.lower()
    if len(w) >= 3 and w[-1] == "e" and w[-2] not in _ENGLISH_VOWELS and any(c in _ENGLISH_VOWELS for c in w[:-2]):
        w = w[:-1]
    count = i = 0
    while i < len(w):
        if w[i:i + 2] in _ENGLISH_DIGRAPHS:
            i += 2
        elif w[i] in _ENGLISH_VOWELS:
            while i < len(w) and w[i] in _ENGLISH_VOWELS:
                i += 1
        else:
            i += 1
        count += 1
    return count


def _latin_words(text: str) -> Iterable[str]:
    word: list[str] = []
    for ch in text:
        if _is_latin_letter(ch):
            word.append(ch)
        elif ch == "'" or ch == "’":
            continue  # "let's" is one word
        elif word:
            yield "".join(word)
            word = []
    if word:
        yield "".join(word)


def english_phones(text: str) -> int:
    return sum(_english_word_phones(w) for w in _latin_words(text))


def _deva_word_phones(word: str, scheme: TranslitScheme) -> int:
    cons, vowels, matras = scheme.consonants, scheme.vowels, scheme.matras
    phones = 0
    syllables = 0
    final_schwa = False
    i, n = 0, len(word)
    while i < n:
        ch = word[i]
        final_schwa = False
        if ch in cons:
            phones += 1
            i += 1
            while i < n and word[i] == scheme.nukta:
                i += 1
            if i < n and word[i] in matras:
                phones += 1
                syllables += 1
                i += 1
            elif i < n and word[i] == scheme.virama:
                i += 1
            else:
                phones += 1
                syllables += 1
                final_schwa = True
        elif ch in vowels:
            phones += 1
            syllables += 1
            i += 1
        else:
            phones += _SIGN_PHONES.get(ch, 0)
            i += 1
    if final_schwa and syllables >= 2:
        phones -= 1
    return phones


def hindi_phones(text: str, scheme: TranslitScheme | None = None) -> int:
    scheme = scheme or default_scheme()
    total = 0
    word: list[str] = []
    for ch in text + " ":
        if _is_devanagari(ch) and ch not in ("।", "॥") and not ("०" <= ch <= "९"):
            word.append(ch)
        elif word:
            total += _deva_word_phones("".join(word), scheme)
            word = []
    return total


def count_phonemes(text: str, language: str = "mixed", scheme: TranslitScheme | None = None) -> int:
    """Rule-based phone count (see module docstring for the rules).

    Devanagari spans always use the Hindi rules. Latin spans use the English
    rules, except for ``language="hindi"`` where they are first read as
    romanized Hindi when the scheme can parse them.
    """
    if language not in ("hindi", "english", "mixed"):
        raise ValueError(f"language must be hindi, english or mixed, got {language!r}")
    if not text or not text.strip():
        raise EmptyTranscript("transcript is empty")
    scheme = scheme or default_scheme()
    total = 0
    for span in segment_scripts(text):
        if span.script == "devanagari":
            total += hindi_phones(span.text, scheme)
        elif span.script == "latin":
            if language == "hindi":
                try:
                    total += hindi_phones(latin_to_deva(span.text, scheme), scheme)
                    continue
                except UnparseableSequence:
                    pass
            total += english_phones(span.text)
    return total
