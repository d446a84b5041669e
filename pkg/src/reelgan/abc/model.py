from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .keys import KeySignature


class NoteEvent(NamedTuple):
    pitch: int  # MIDI number, 60 = middle C
    duration: int  # sixteenth-note units


@dataclass(frozen=True)
class TuneHeader:
    title: str = ""
    meter: tuple[int, int] = (4, 4)
    default_note_length: Fraction = Fraction(1, 8)
    key: KeySignature = KeySignature(2, "major")
    source_id: str = ""

    def __post_init__(self):
        if self.meter[0] <= 0 or self.meter[1] <= 0:
            raise ValueError(f"meter must be positive: {self.meter}")
        if self.default_note_length <= 0:
            raise ValueError("default note length must be positive")


@dataclass(frozen=True)
class Tune:
    header: TuneHeader
    bars: tuple[tuple[NoteEvent, ...], ...]
    # (bar boundary index, "start" | "end" | "ending"); empty once unrolled
    repeat_markers: tuple[tuple[int, str], ...] = field(default=(), compare=False)

    def events(self) -> list[NoteEvent]:
        return [ev for bar in self.bars for ev in bar]

    def same_events(self, other: "Tune") -> bool:
        return self.bars == other.bars

    def bar_units(self) -> list[int]:
        return [sum(ev.duration for ev in bar) for bar in self.bars]
