from __future__ import annotations

import numpy as np

from ..grid import D_MAJOR_TABLE, DEFAULT_NORM, quantize_grid


def note_histogram(grids, table=D_MAJOR_TABLE, spec=DEFAULT_NORM) -> dict[int, int]:
    """Count of each quantised MIDI pitch over every slot of every grid."""
    counts = dict.fromkeys(table, 0)
    arr = np.asarray(grids, dtype=np.float64)
    if arr.size == 0:
        return counts
    values, freq = np.unique(quantize_grid(arr.reshape(-1, 4, 64), table, spec), return_counts=True)
    for v, c in zip(values.tolist(), freq.tolist()):
        counts[v] = counts.get(v, 0) + c
    return counts


def pitch_class_totals(histogram: dict[int, int]) -> dict[int, int]:
    totals = dict.fromkeys(range(12), 0)
    for pitch, count in histogram.items():
        totals[pitch % 12] += count
    return totals
