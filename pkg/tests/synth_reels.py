"""Seeded generator of reel-like ABC tunes used as test fixtures.

Melodies are composed on the D-major scale (MIDI 64-85), shaped into four
4-bar phrases, then written out in one of several major keys with the
notation habits of session transcriptions (repeat signs, rolls, grace notes,
chord symbols, broken rhythm). Within a beat no two consecutive notes share a
pitch, so the beat-merge decoder reproduces every event exactly.

Run as a script to rebuild ``fixtures/reels.abc``.
"""

from __future__ import annotations

import random
from pathlib import Path

D_SCALE = (62, 64, 66, 67, 69, 71, 73, 74, 76, 78, 79, 81, 83, 85, 86)
LO, HI = 1, 13  # scale indices in use: 64 .. 85
TONIC_IDX = 7   # 74
CHORD_IDX = (2, 4, 7, 9, 11)  # F#, A, d, f#, a

LETTERS = "CDEFGAB"
LETTER_PC = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}
# written key -> (semitone shift from D, key letter, sharps(+)/flats(-))
KEYS = {
    "D": (0, "D", 2), "G": (5, "G", 1), "A": (-5, "A", 3), "C": (-2, "C", 0),
    "F": (3, "F", -1), "E": (2, "E", 4), "Bb": (-4, "B", -2), "Eb": (1, "E", -3),
}
SHARPS, FLATS = "FCGDAEB", "BEADGCF"

MERRY_BLACKSMITH = """X:1
T:The Merry Blacksmith
R:reel
M:4/4
L:1/8
K:D
d2dA BAFA|ABdA BAFA|ABde f2ed|Beed egfe|
d2dA BAFA|ABdA BAFA|ABde f2ed|Bedc dAFA|
faaf agfe|dBAF ABde|faaf agfe|dBAG FDD2|
faaf agfe|dBAF ABde|fedB AFEF|D2FA d2D2|
"""


def _rhythm(rng: random.Random) -> list[int]:
    r = rng.random()
    if r < 0.72:
        return [2, 2]
    if r < 0.86:
        return [4]
    if r < 0.95:
        return [3, 1]
    return [1, 1, 2]


def _step(rng: random.Random, idx: int) -> int:
    if rng.random() < 0.25:
        return rng.choice(CHORD_IDX + (TONIC_IDX, TONIC_IDX))
    return min(max(idx + rng.choice((-2, -1, -1, 1, 1, 2, 3)), LO), HI)


def _beat(rng: random.Random, idx: int, start: int | None = None) -> tuple[list[tuple[int, int]], int]:
    events = []
    for k, dur in enumerate(_rhythm(rng)):
        if k == 0 and start is not None:
            nxt = start
        else:
            nxt = _step(rng, idx)
            while events and nxt == events[-1][0]:
                nxt = _step(rng, nxt)
        events.append((nxt, dur))
        idx = nxt
    return events, idx


def _bar(rng: random.Random, idx: int, final: bool = False, register: int = 0) -> tuple[list, int]:
    events = []
    for beat in range(4):
        start = None
        if beat == 0 and rng.random() < 0.55:
            start = min(max(rng.choice((TONIC_IDX, TONIC_IDX, TONIC_IDX + register, 4, 9)), LO), HI)
        if final and beat == 3:
            # phrase cadence on the tonic
            events.append((TONIC_IDX, 4))
            idx = TONIC_IDX
            continue
        beat_events, idx = _beat(rng, idx, start)
        events.extend(beat_events)
    return events, idx


def _phrase(rng: random.Random, register: int = 0) -> list[list]:
    idx = TONIC_IDX + register
    bars = []
    for b in range(4):
        bar, idx = _bar(rng, idx, final=(b == 3), register=register)
        bars.append(bar)
    return bars


def _vary_ending(rng: random.Random, phrase: list[list]) -> list[list]:
    bars = [list(b) for b in phrase]
    bars[3], _ = _bar(rng, bars[2][-1][0], final=True)
    return bars


def compose(rng: random.Random, form: str = "AABB") -> list[list[tuple[int, int]]]:
    """Sixteen bars of (scale index, sixteenths) events following ``form``."""
    a = _phrase(rng)
    b = _phrase(rng, register=2)
    parts = {"A": a, "B": b, "C": _phrase(rng, register=1)}
    phrases, seen = [], set()
    for letter in form:
        p = parts[letter]
        if letter in seen and rng.random() < 0.6:
            p = _vary_ending(rng, p)
        seen.add(letter)
        phrases.append(p)
    return [bar for phrase in phrases for bar in phrase]


def to_midi(tune) -> list[list[tuple[int, int]]]:
    return [[(D_SCALE[i], d) for i, d in bar] for bar in tune]


def _key_alterations(acc: int) -> dict[str, int]:
    alt = dict.fromkeys(LETTERS, 0)
    for letter in (SHARPS[:acc] if acc > 0 else FLATS[:-acc]):
        alt[letter] = 1 if acc > 0 else -1
    return alt


def _spell(idx: int, key: str) -> str:
    shift, key_letter, acc = KEYS[key]
    pitch = D_SCALE[idx] + shift
    degree = (idx - TONIC_IDX) % 7
    letter = LETTERS[(LETTERS.index(key_letter) + degree) % 7]
    natural = pitch - _key_alterations(acc)[letter]
    octave = (natural - LETTER_PC[letter]) // 12 - 5
    assert 60 + 12 * octave + LETTER_PC[letter] == natural
    if octave >= 1:
        return letter.lower() + "'" * (octave - 1)
    return letter + "," * (-octave)


_LENGTH_TEXT = {1: "/", 2: "", 3: "3/2", 4: "2", 6: "3", 8: "4"}


def _bar_text(rng: random.Random, bar, key: str, ornate: bool) -> str:
    out = []
    i = 0
    pos = 0
    while i < len(bar):
        idx, dur = bar[i]
        note = _spell(idx, key)
        if ornate and dur == 4 and rng.random() < 0.3:
            note = "~" + note
        elif ornate and rng.random() < 0.04:
            note = "{" + _spell(min(idx + 1, HI), key).lower().rstrip("'") + "}" + note
        if dur == 3 and i + 1 < len(bar) and bar[i + 1][1] == 1:
            out.append(note + ">" + _spell(bar[i + 1][0], key))
            pos += 4
            i += 2
        else:
            out.append(note + _LENGTH_TEXT[dur])
            pos += dur
            i += 1
        if pos == 8:
            out.append(" ")
    return "".join(out)


def write_tune(rng: random.Random, number: int, bars, key: str, ornate: bool = True) -> str:
    """Render composed bars as ABC in ``key``; exact phrase repeats may be
    folded into ``|: ... :|`` sections."""
    header = [f"X:{number}", f"T:Synthetic Reel No. {number}", "R:reel", "M:4/4"]
    if rng.random() < 0.8:
        header.append("L:1/8")
    header.append(f"K:{key}" + rng.choice(("", "", "maj", " major")))
    texts = [_bar_text(rng, bar, key, ornate) for bar in bars]
    if ornate and rng.random() < 0.3:
        texts[0] = '"' + key + '"' + texts[0]
    phrases = [texts[i:i + 4] for i in range(0, 16, 4)]
    lines = []
    raw = [tuple(map(tuple, bars[i:i + 4])) for i in range(0, 16, 4)]
    if raw[0] == raw[1] and raw[2] == raw[3] and rng.random() < 0.8:
        lines.append("|:" + "|".join(phrases[0]) + ":|")
        lines.append("|:" + "|".join(phrases[2]) + ":|")
    else:
        for p in phrases:
            lines.append("|".join(p) + "|")
    if ornate and rng.random() < 0.2:
        lines.insert(0, "% transcribed from a session recording")
    return "\n".join(header + lines) + "\n"


def synthetic_corpus(n: int, seed: int = 0, forms=("AABB", "AABB", "AABA", "ABAB", "AABC"), keys=tuple(KEYS), ornate=True) -> list[str]:
    rng = random.Random(seed)
    tunes = []
    for k in range(n):
        bars = compose(rng, rng.choice(forms))
        tunes.append(write_tune(rng, k + 2, bars, rng.choice(keys), ornate))
    return tunes


def fixture_text(n: int = 60, seed: int = 2024) -> str:
    return "\n".join([MERRY_BLACKSMITH] + synthetic_corpus(n, seed))


if __name__ == "__main__":
    out = Path(__file__).parent / "fixtures" / "reels.abc"
    out.parent.mkdir(exist_ok=True)
    out.write_text(fixture_text())
    print(f"wrote {out}")
