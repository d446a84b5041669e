from __future__ import annotations

from dataclasses import replace

from .errors import TuneError
from .keys import KeySignature
from .model import NoteEvent, Tune

D_PITCH_CLASS = 2
RANGE_CENTER = 74


def d_major_offset(tonic: int, pitches, center: int = RANGE_CENTER) -> int:
    """Semitone shift taking ``tonic`` to D, choosing the octave that keeps
    the melody closest to ``center`` (worst-case distance); ties go to the
    smaller shift, then downward."""
    up = (D_PITCH_CLASS - tonic) % 12
    candidates = [up] if up == 0 else [up, up - 12]
    pitches = list(pitches)

    def spread(offset):
        worst = max((abs(p + offset - center) for p in pitches), default=0)
        return (worst, abs(offset), offset)

    return min(candidates, key=spread)


def transpose(tune: Tune, offset: int) -> Tune:
    bars = tuple(tuple(NoteEvent(ev.pitch + offset, ev.duration) for ev in bar) for bar in tune.bars)
    for bar in bars:
        for ev in bar:
            if not 0 <= ev.pitch <= 127:
                raise TuneError("out_of_range", f"transposed pitch {ev.pitch}")
    key = KeySignature((tune.header.key.tonic + offset) % 12, tune.header.key.mode)
    return replace(tune, header=replace(tune.header, key=key), bars=bars)


def transpose_to_d_major(tune: Tune) -> Tune:
    if tune.header.key.mode != "major":
        raise TuneError("wrong_mode", f"cannot move a {tune.header.key.mode} tune to D major")
    offset = d_major_offset(tune.header.key.tonic, (ev.pitch for ev in tune.events()))
    return transpose(tune, offset)
