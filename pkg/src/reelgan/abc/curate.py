"""Corpus curation: the gate sequence that turns raw ABC into training reels."""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import REASONS, TuneError
from .model import Tune
from .parser import parse_body, split_header
from .repeats import unroll_tune
from .transpose import transpose_to_d_major


@dataclass(frozen=True)
class FilterGates:
    meters: tuple[tuple[int, int], ...] = ((4, 4),)
    mode: str = "major"
    bar_count: int = 16
    min_pitch: int = 62
    max_pitch: int = 86


@dataclass
class FilterReport:
    total_seen: int = 0
    kept: int = 0
    rejected_by_reason: dict[str, int] = field(default_factory=lambda: dict.fromkeys(REASONS, 0))

    def add(self, reason: str | None):
        self.total_seen += 1
        if reason is None:
            self.kept += 1
        else:
            self.rejected_by_reason[reason] += 1

    @property
    def rejected(self) -> int:
        return sum(self.rejected_by_reason.values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["reason", "count"])
        w.writerow(["kept", self.kept])
        for reason in REASONS:
            w.writerow([reason, self.rejected_by_reason[reason]])
        return buf.getvalue()


def curate_tune(item: str | Tune, gates: FilterGates = FilterGates()) -> Tune:
    """Run one tune through every gate; return it unrolled and in D major.

    Raises:
        TuneError: with the reason of the first gate that failed.
    """
    if isinstance(item, str):
        header, key, body = split_header(item)
        _check_header(header, gates)
        bars, markers = parse_body(body, key, header.default_note_length)
        tune = Tune(header, bars, markers)
    else:
        tune = item
        _check_header(tune.header, gates)
    tune = unroll_tune(tune)
    if len(tune.bars) != gates.bar_count:
        raise TuneError("bar_count", f"{len(tune.bars)} bars after unrolling")
    bar_units = Fraction(16 * tune.header.meter[0], tune.header.meter[1])
    for i, units in enumerate(tune.bar_units()):
        if units != bar_units:
            raise TuneError("bad_format", f"bar {i + 1} holds {units} sixteenths")
    tune = transpose_to_d_major(tune)
    pitches = [ev.pitch for ev in tune.events()]
    if min(pitches) < gates.min_pitch or max(pitches) > gates.max_pitch:
        raise TuneError("out_of_range", f"pitches span {min(pitches)}-{max(pitches)}")
    return tune


def _check_header(header, gates: FilterGates):
    if tuple(header.meter) not in gates.meters:
        raise TuneError("wrong_meter", f"meter {header.meter[0]}/{header.meter[1]}")
    if header.key.mode != gates.mode:
        raise TuneError("wrong_mode", header.key.mode)


def _curate_or_reason(args) -> Tune | str:
    item, gates = args
    try:
        return curate_tune(item, gates)
    except TuneError as err:
        return err.reason


def filter_corpus(
    tunes: Iterable[str | Tune], gates: FilterGates = FilterGates(), workers: int = 1
) -> tuple[list[Tune], FilterReport]:
    """Keep the tunes that pass every gate, tallying the rest by reason.

    Results are merged in input order regardless of ``workers``.
    """
    items = [(t, gates) for t in tunes]
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_curate_or_reason, items, chunksize=32))
    else:
        outcomes = [_curate_or_reason(it) for it in items]
    report = FilterReport()
    kept = []
    for out in outcomes:
        if isinstance(out, str):
            report.add(out)
        else:
            report.add(None)
            kept.append(out)
    return kept, report
