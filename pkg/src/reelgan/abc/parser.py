"""ABC tune parser for monophonic dance tunes.

Only the subset found in session-style transcriptions is understood: header
fields, notes with accidentals/octave marks/length modifiers, bar lines and
repeats, ties, broken rhythm, and decorations (which are dropped). Anything
that cannot be represented as a plain pitch sequence raises :class:`TuneError`
with a reason code.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import TuneError
from .keys import LETTER_PC, ParsedKey, parse_key
from .model import NoteEvent, Tune, TuneHeader

_FIELD_RE = re.compile(r"^([A-Za-z+]):\s*(.*)$")
_NOTE_RE = re.compile(r"(\^\^|\^|__|_|=)?([A-Ga-g])([',]*)(\d*)(/*)(\d*)")
_BAR_RE = re.compile(r"\[\||\|\]|::|:*\|\|?:*")
_ENDING_RE = re.compile(r"\s*\d+([,-]\d+)*")
_DECORATIONS = set("~.HLMOPSTuvJR")
_ACCIDENTALS = {"^": 1, "^^": 2, "_": -1, "__": -2, "=": 0}
# body lines starting with these fields are skipped silently
_IGNORED_BODY_FIELDS = set("wWPNTRCHZIOrAS")


def parse_meter(text: str) -> tuple[int, int]:
    text = text.strip()
    if text == "C":
        return (4, 4)
    if text == "C|":
        return (2, 2)
    m = re.fullmatch(r"(\d+)\s*/\s*(\d+)", text)
    if not m or int(m.group(1)) <= 0 or int(m.group(2)) <= 0:
        raise TuneError("bad_format", f"unreadable meter {text!r}")
    return (int(m.group(1)), int(m.group(2)))


def parse_length(text: str) -> Fraction:
    m = re.fullmatch(r"\s*(\d+)\s*/\s*(\d+)\s*", text)
    if not m or int(m.group(1)) <= 0 or int(m.group(2)) <= 0:
        raise TuneError("bad_format", f"unreadable note length {text!r}")
    return Fraction(int(m.group(1)), int(m.group(2)))


def split_header(text: str) -> tuple[TuneHeader, ParsedKey, list[str]]:
    """Read header fields up to and including ``K:``; return the body lines too."""
    lines = [ln.rstrip() for ln in text.strip("\n").splitlines()]
    fields: dict[str, str] = {}
    key_text = None
    body_start = None
    for i, raw in enumerate(lines):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        m = _FIELD_RE.match(line)
        if not m:
            raise TuneError("bad_format", f"body before K: field: {line!r}")
        name, value = m.group(1), m.group(2).strip()
        if name == "K":
            key_text = value
            body_start = i + 1
            break
        fields.setdefault(name, value)
    if key_text is None:
        raise TuneError("bad_format", "missing K: field")
    if "L" not in fields and "M" not in fields:
        raise TuneError("bad_format", "header needs L: or M:")
    key = parse_key(key_text)
    meter = parse_meter(fields["M"]) if "M" in fields else (4, 4)
    if "L" in fields:
        length = parse_length(fields["L"])
    else:
        # ABC default: 1/16 for meters below 3/4, otherwise 1/8
        length = Fraction(1, 16) if Fraction(*meter) < Fraction(3, 4) else Fraction(1, 8)
    header = TuneHeader(
        title=fields.get("T", ""),
        meter=meter,
        default_note_length=length,
        key=key.signature,
        source_id=fields.get("X", ""),
    )
    return header, key, lines[body_start:]


def _strip_comment(line: str) -> str:
    idx = line.find("%")
    return line if idx < 0 else line[:idx]


class _BodyReader:
    def __init__(self, key: ParsedKey, length: Fraction):
        self.key_alt = key.alterations()
        self.length = length
        self.bars: list[list[list]] = []
        self.bar: list[list] = []  # [pitch, Fraction duration]
        self.bar_acc: dict[tuple[str, int], int] = {}
        self.markers: list[tuple[int, str]] = []
        self.tie_pending = False
        self.broken_next: Fraction | None = None

    def close_bar(self):
        if self.broken_next is not None:
            raise TuneError("bad_format", "broken rhythm across a bar line")
        if self.bar:
            self.bars.append(self.bar)
        self.bar = []
        self.bar_acc = {}
        self.tie_pending = False

    def add_note(self, acc: str | None, letter: str, octave_marks: str, dur: Fraction):
        upper = letter.upper()
        octave = (1 if letter.islower() else 0) + octave_marks.count("'") - octave_marks.count(",")
        slot = (upper, octave)
        if acc is not None:
            self.bar_acc[slot] = _ACCIDENTALS[acc]
        alter = self.bar_acc.get(slot, self.key_alt[upper])
        pitch = 60 + 12 * octave + LETTER_PC[upper] + alter
        if not 0 <= pitch <= 127:
            raise TuneError("out_of_range", f"pitch {pitch} outside MIDI range")
        dur = dur * self.length * 16
        if self.broken_next is not None:
            dur *= self.broken_next
            self.broken_next = None
        if self.tie_pending and self.bar and self.bar[-1][0] == pitch:
            self.bar[-1][1] += dur
        else:
            self.bar.append([pitch, dur])
        self.tie_pending = False

    def broken(self, symbol: str):
        if not self.bar:
            raise TuneError("bad_format", "broken rhythm without a preceding note")
        n = len(symbol)
        short = Fraction(1, 2 ** n)
        long_ = 2 - short
        first, second = (long_, short) if symbol[0] == ">" else (short, long_)
        self.bar[-1][1] *= first
        self.broken_next = second

    def finish(self) -> tuple[tuple[tuple[NoteEvent, ...], ...], tuple[tuple[int, str], ...]]:
        self.close_bar()
        bars = []
        for bar in self.bars:
            events = []
            for pitch, dur in bar:
                if dur.denominator != 1 or dur < 1:
                    raise TuneError("bad_format", f"duration {dur} sixteenths is not a whole unit")
                events.append(NoteEvent(pitch, int(dur)))
            bars.append(tuple(events))
        return tuple(bars), tuple(self.markers)


def _looks_like_music(line: str) -> bool:
    # "e:|" is a note followed by a repeat sign, not an information field
    return line[0] in "ABCDEFGabcdefg" and line[2:3] in ("|", ":")


def _scan_until(text: str, i: int, closing: str) -> int:
    j = text.find(closing, i + 1)
    if j < 0:
        raise TuneError("bad_format", f"unterminated {text[i]!r}")
    return j + 1


def parse_body(lines: list[str], key: ParsedKey, length: Fraction):
    reader = _BodyReader(key, length)
    for raw in lines:
        line = _strip_comment(raw)
        stripped = line.strip()
        if not stripped:
            continue
        fm = _FIELD_RE.match(stripped)
        if fm and not _looks_like_music(stripped):
            name = fm.group(1)
            if name == "L":
                reader.length = parse_length(fm.group(2))
                continue
            if name in ("K", "M"):
                raise TuneError("bad_format", f"mid-tune {name}: change")
            if name in _IGNORED_BODY_FIELDS:
                continue
            raise TuneError("bad_format", f"unexpected field {name}:")
        _scan_line(line, reader)
    return reader.finish()


def _scan_line(line: str, r: _BodyReader):
    i = 0
    n = len(line)
    while i < n:
        ch = line[i]
        if ch in " \t`\\y":
            i += 1
        elif ch == '"':
            i = _scan_until(line, i, '"')
        elif ch in "!+":
            i = _scan_until(line, i, ch)
        elif ch == "{":
            i = _scan_until(line, i, "}")
        elif ch in _DECORATIONS:
            i += 1
        elif ch == "(":
            if i + 1 < n and line[i + 1].isdigit():
                raise TuneError("has_triplets", "tuplet marker")
            i += 1
        elif ch == ")":
            i += 1
        elif ch in "zxZX":
            raise TuneError("has_rests", "rest")
        elif ch == "-":
            if not r.bar:
                raise TuneError("bad_format", "tie without a preceding note")
            r.tie_pending = True
            i += 1
        elif ch in "<>":
            j = i
            while j < n and line[j] == ch:
                j += 1
            r.broken(line[i:j])
            i = j
        elif ch == "[":
            nxt = line[i + 1] if i + 1 < n else ""
            if nxt.isdigit():
                r.close_bar()
                r.markers.append((len(r.bars), "ending"))
                m = _ENDING_RE.match(line, i + 1)
                i = m.end()
            elif nxt == "|":
                i = _bar(line, i, r)
            elif re.match(r"[A-Za-z]:", line[i + 1:i + 3]):
                j = _scan_until(line, i, "]")
                field, value = line[i + 1], line[i + 3:j - 1]
                if field == "L":
                    r.length = parse_length(value)
                elif field in ("K", "M"):
                    raise TuneError("bad_format", f"inline {field}: change")
                i = j
            else:
                raise TuneError("has_chords", "chord bracket")
        elif ch in "|:":
            i = _bar(line, i, r)
        else:
            m = _NOTE_RE.match(line, i)
            if not m:
                raise TuneError("bad_format", f"unknown token {ch!r}")
            acc, letter, octs, num, slashes, den = m.groups()
            r.add_note(acc, letter, octs, _duration(num, slashes, den))
            i = m.end()


def _duration(num: str, slashes: str, den: str) -> Fraction:
    top = int(num) if num else 1
    if not slashes:
        if den:
            raise TuneError("bad_format", "malformed length")
        return Fraction(top)
    bottom = int(den) * 2 ** (len(slashes) - 1) if den else 2 ** len(slashes)
    if top == 0 or bottom == 0:
        raise TuneError("bad_format", "zero length")
    return Fraction(top, bottom)


def _bar(line: str, i: int, r: _BodyReader) -> int:
    m = _BAR_RE.match(line, i)
    if not m:
        raise TuneError("bad_format", f"stray {line[i]!r}")
    token = m.group(0)
    r.close_bar()
    boundary = len(r.bars)
    if token == "::" or (token.startswith(":") and token.endswith(":")):
        r.markers.append((boundary, "end"))
        r.markers.append((boundary, "start"))
    elif token.startswith(":"):
        r.markers.append((boundary, "end"))
    elif token.endswith(":"):
        r.markers.append((boundary, "start"))
    j = m.end()
    em = _ENDING_RE.match(line, j)
    if em and em.group(0).strip() and not token.endswith(":") and token != "[|":
        r.markers.append((boundary, "ending"))
        j = em.end()
    return j


def parse_tune(text: str) -> Tune:
    """Parse one ABC tune block into bars of :class:`NoteEvent`.

    Repeat signs are recorded in ``Tune.repeat_markers`` but not expanded;
    see :func:`~reelgan.abc.repeats.unroll_repeats`.
    """
    header, key, body = split_header(text)
    bars, markers = parse_body(body, key, header.default_note_length)
    return Tune(header, bars, markers)
