from __future__ import annotations

from .keys import key_alterations
from .model import Tune

# spelling of each pitch class in D major as (letter, alteration)
_D_MAJOR_SPELLING = {
    0: ("C", 0), 1: ("C", 1), 2: ("D", 0), 3: ("D", 1), 4: ("E", 0), 5: ("F", 0),
    6: ("F", 1), 7: ("G", 0), 8: ("G", 1), 9: ("A", 0), 10: ("B", -1), 11: ("B", 0),
}
_ACC_TEXT = {-2: "__", -1: "_", 0: "=", 1: "^", 2: "^^"}
_D_MAJOR_FIFTHS = 2
_LETTER_PC = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}


def _note_text(pitch: int, alter: int, letter: str) -> str:
    natural = pitch - alter
    octave = (natural - _LETTER_PC[letter]) // 12 - 5  # 0 = middle-C octave
    if octave >= 1:
        return letter.lower() + "'" * (octave - 1)
    return letter + "," * (-octave)


def write_abc(tune: Tune, index: int = 1, bars_per_line: int = 4) -> str:
    """Render a D-major tune with ``L:1/16`` so every duration is an integer
    multiplier. Key-implied sharps are left implicit; other accidentals are
    written only when the bar's running accidental state requires it."""
    key_alt = key_alterations(_D_MAJOR_FIFTHS)
    title = tune.header.title or "Untitled"
    lines = [f"X:{index}", f"T:{title}", "M:4/4", "L:1/16", "K:D"]
    bar_texts = []
    for bar in tune.bars:
        state: dict[tuple[str, int], int] = {}
        tokens = []
        for ev in bar:
            letter, alter = _D_MAJOR_SPELLING[ev.pitch % 12]
            text = _note_text(ev.pitch, alter, letter)
            slot = (letter, ev.pitch - alter)
            implied = state.get(slot, key_alt[letter])
            if implied != alter:
                text = _ACC_TEXT[alter] + text
                state[slot] = alter
            if ev.duration != 1:
                text += str(ev.duration)
            tokens.append(text)
        bar_texts.append(_group_beats(tokens, bar))
    for start in range(0, len(bar_texts), bars_per_line):
        chunk = bar_texts[start:start + bars_per_line]
        lines.append("|" + "|".join(chunk) + "|")
    return "\n".join(lines) + "\n"


def _group_beats(tokens: list[str], bar) -> str:
    # a space after each completed half bar keeps the output readable
    out = []
    pos = 0
    for tok, ev in zip(tokens, bar):
        out.append(tok)
        pos += ev.duration
        if pos % 8 == 0 and pos < 16:
            out.append(" ")
    return "".join(out)
