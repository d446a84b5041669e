"""Pitch-grid codec: tunes <-> 4x64 arrays, quantisation, and dataset files.

A grid has one row per 4-bar phrase and one column per sixteenth slot, so
bar ``k`` of a phrase occupies columns ``16k .. 16k+15``. Values are
normalised pitches ``(midi - center) / half_range``.
"""

from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .abc.keys import KeySignature
from .abc.model import NoteEvent, Tune, TuneHeader

ROWS, COLS = 4, 64
SLOTS = ROWS * COLS
BAR_SLOTS = 16
BEAT_SLOTS = 4

D_MAJOR_TABLE = (62, 64, 66, 67, 69, 71, 73, 74, 76, 78, 79, 81, 83, 85, 86)

GRID_MAGIC = b"RGRD"
GRID_VERSION = 1
_CLAMP_SLACK = 1e-6


@dataclass(frozen=True)
class NormalizationSpec:
    center_midi: int = 74
    half_range: int = 12

    def __post_init__(self):
        if self.half_range <= 0:
            raise ValueError("half_range must be positive")

    def normalize(self, midi):
        return (np.asarray(midi, dtype=np.float64) - self.center_midi) / self.half_range

    def denormalize(self, value):
        return self.center_midi + self.half_range * np.asarray(value, dtype=np.float64)


DEFAULT_NORM = NormalizationSpec()


def check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=np.float64)
    if grid.shape != (ROWS, COLS):
        raise ValueError(f"grid must be {ROWS}x{COLS}, got {grid.shape}")
    if not np.all(np.abs(grid) <= 1 + _CLAMP_SLACK):
        raise ValueError("grid values must lie in [-1, 1]")
    return grid


def tune_to_grid(tune: Tune, spec: NormalizationSpec = DEFAULT_NORM) -> np.ndarray:
    slots = []
    for bar in tune.bars:
        for ev in bar:
            slots.extend([ev.pitch] * ev.duration)
    if len(slots) != SLOTS:
        raise ValueError(f"tune covers {len(slots)} sixteenth slots, expected {SLOTS}")
    return spec.normalize(slots).reshape(ROWS, COLS)


def quantize_pitch(v: float, table=D_MAJOR_TABLE, spec: NormalizationSpec = DEFAULT_NORM) -> int:
    """Nearest scale-table pitch to the denormalised value; ties go down."""
    if abs(v) > 1 + _CLAMP_SLACK:
        raise ValueError(f"value {v} outside [-1, 1]")
    target = float(spec.denormalize(min(max(v, -1.0), 1.0)))
    best = table[0]
    for pitch in table[1:]:
        if abs(pitch - target) < abs(best - target):
            best = pitch
    return best


def quantize_grid(grid, table=D_MAJOR_TABLE, spec: NormalizationSpec = DEFAULT_NORM) -> np.ndarray:
    """Vectorised :func:`quantize_pitch` over an array of any shape."""
    values = np.asarray(grid, dtype=np.float64)
    if values.size and np.max(np.abs(values)) > 1 + _CLAMP_SLACK:
        raise ValueError("values outside [-1, 1]")
    target = spec.denormalize(np.clip(values, -1.0, 1.0))
    t = np.asarray(table, dtype=np.float64)
    hi = np.clip(np.searchsorted(t, target), 1, len(t) - 1)
    lo = hi - 1
    take_hi = (t[hi] - target) < (target - t[lo])
    return np.where(take_hi, t[hi], t[lo]).astype(np.int64)


def grid_to_tune(
    grid,
    title: str = "Generated reel",
    table=D_MAJOR_TABLE,
    spec: NormalizationSpec = DEFAULT_NORM,
    source_id: str = "",
) -> Tune:
    """Quantise a grid and merge equal pitches within each beat.

    Runs never cross a beat boundary, so the result always has 16 bars of
    16 sixteenths each.
    """
    pitches = quantize_grid(check_grid(grid), table, spec).reshape(-1)
    bars = []
    for b in range(SLOTS // BAR_SLOTS):
        events = []
        for beat in range(BAR_SLOTS // BEAT_SLOTS):
            start = b * BAR_SLOTS + beat * BEAT_SLOTS
            run_pitch, run_len = int(pitches[start]), 1
            for p in pitches[start + 1:start + BEAT_SLOTS]:
                if p == run_pitch:
                    run_len += 1
                else:
                    events.append(NoteEvent(run_pitch, run_len))
                    run_pitch, run_len = int(p), 1
            events.append(NoteEvent(run_pitch, run_len))
        bars.append(tuple(events))
    header = TuneHeader(
        title=title,
        meter=(4, 4),
        default_note_length=Fraction(1, 16),
        key=KeySignature(2, "major"),
        source_id=source_id,
    )
    return Tune(header, tuple(bars))


def write_grid_file(path: str | Path, grids) -> None:
    data = np.asarray(grids, dtype="<f4").reshape(-1, ROWS, COLS)
    with open(path, "wb") as fh:
        fh.write(GRID_MAGIC)
        fh.write(struct.pack("<ii", GRID_VERSION, data.shape[0]))
        fh.write(data.tobytes(order="C"))


def read_grid_file(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:4] != GRID_MAGIC:
        raise ValueError(f"{path}: not a grid dataset (bad magic)")
    version, count = struct.unpack("<ii", raw[4:12])
    if version != GRID_VERSION:
        raise ValueError(f"{path}: unsupported grid format version {version}")
    expected = 12 + count * SLOTS * 4
    if count < 0 or len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes for {count} grids, found {len(raw)}")
    return np.frombuffer(raw, dtype="<f4", offset=12).reshape(count, ROWS, COLS).astype(np.float32)


def grids_to_csv(grids) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for grid in np.asarray(grids, dtype=np.float32).reshape(-1, SLOTS):
        writer.writerow([repr(float(v)) for v in grid])
    return buf.getvalue()


def grids_from_csv(text: str) -> np.ndarray:
    rows = [[float(v) for v in row] for row in csv.reader(text.splitlines()) if row]
    arr = np.asarray(rows, dtype=np.float32).reshape(-1, ROWS, COLS)
    return arr
