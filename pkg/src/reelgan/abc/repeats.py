from __future__ import annotations

from collections.abc import Sequence

from .errors import TuneError
from .model import Tune


def unroll_repeats(bars: Sequence, repeat_markers: Sequence[tuple[int, str]]) -> list:
    """Expand ``|: ... :|`` sections in place.

    An end sign without a matching start repeats from the beginning of the
    tune or from the previous end sign. Alternate endings are rejected.
    """
    if any(kind == "ending" for _, kind in repeat_markers):
        raise TuneError("bad_format", "alternate endings are not supported")
    at: dict[int, list[str]] = {}
    for boundary, kind in repeat_markers:
        if not 0 <= boundary <= len(bars):
            raise TuneError("bad_format", f"repeat marker outside the tune: {boundary}")
        at.setdefault(boundary, []).append(kind)
    out = []
    section_start = 0
    for b in range(len(bars) + 1):
        kinds = at.get(b, ())
        if "end" in kinds:
            out.extend(bars[section_start:b])
            section_start = b
        if "start" in kinds:
            section_start = b
        if b < len(bars):
            out.append(bars[b])
    return out


def unroll_tune(tune: Tune) -> Tune:
    bars = unroll_repeats(tune.bars, tune.repeat_markers)
    return Tune(tune.header, tuple(bars), ())
