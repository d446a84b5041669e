"""Key signatures: tonic/mode parsing and the letter alterations they imply."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import TuneError

LETTER_PC = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}
_LETTER_FIFTHS = {"F": -1, "C": 0, "G": 1, "D": 2, "A": 3, "E": 4, "B": 5}
_SHARP_ORDER = "FCGDAEB"
_FLAT_ORDER = "BEADGCF"

MODES = ("major", "dorian", "mixolydian", "minor")
# fifths offset relative to the major key on the same tonic
_MODE_FIFTHS = {"major": 0, "dorian": -2, "mixolydian": -1, "minor": -3}
_MODE_ALIASES = {
    "": "major", "maj": "major", "ion": "major",
    "m": "minor", "min": "minor", "aeo": "minor",
    "dor": "dorian", "mix": "mixolydian",
}
_KEY_RE = re.compile(r"^\s*([A-Ga-g])([#b]?)\s*([A-Za-z]*)")


@dataclass(frozen=True)
class KeySignature:
    tonic: int
    mode: str = "major"

    def __post_init__(self):
        if not 0 <= self.tonic <= 11:
            raise ValueError(f"tonic pitch class out of range: {self.tonic}")
        if self.mode not in MODES:
            raise ValueError(f"unsupported mode: {self.mode!r}")


@dataclass(frozen=True)
class ParsedKey:
    """A key as written: the signature plus its spelling (number of fifths)."""

    signature: KeySignature
    fifths: int

    def alterations(self) -> dict[str, int]:
        """Map of letter -> semitone alteration implied by the key signature."""
        return key_alterations(self.fifths)


def key_alterations(fifths: int) -> dict[str, int]:
    if not -7 <= fifths <= 7:
        raise TuneError("bad_format", f"key signature needs {fifths} fifths")
    alt = dict.fromkeys("CDEFGAB", 0)
    if fifths > 0:
        for letter in _SHARP_ORDER[:fifths]:
            alt[letter] = 1
    else:
        for letter in _FLAT_ORDER[:-fifths]:
            alt[letter] = -1
    return alt


def parse_key(text: str) -> ParsedKey:
    """Parse the value of a ``K:`` field, e.g. ``D``, ``Gmaj``, ``Ador``, ``F#m``."""
    m = _KEY_RE.match(text)
    if not m:
        raise TuneError("bad_format", f"unreadable key {text!r}")
    letter = m.group(1).upper()
    acc = {"": 0, "#": 1, "b": -1}[m.group(2)]
    word = m.group(3).lower()
    mode_word = word[:3]
    if mode_word not in _MODE_ALIASES:
        if mode_word in ("lyd", "phr", "loc"):
            raise TuneError("wrong_mode", f"mode {word!r} not supported")
        raise TuneError("bad_format", f"unknown mode {word!r}")
    mode = _MODE_ALIASES[mode_word]
    fifths = _LETTER_FIFTHS[letter] + 7 * acc + _MODE_FIFTHS[mode]
    tonic = (LETTER_PC[letter] + acc) % 12
    return ParsedKey(KeySignature(tonic, mode), fifths)
