REASONS = (
    "bad_format",
    "has_triplets",
    "wrong_meter",
    "wrong_mode",
    "bar_count",
    "has_rests",
    "has_chords",
    "out_of_range",
)


class TuneError(ValueError):
    """A tune was rejected; ``reason`` is one of :data:`REASONS`."""

    def __init__(self, reason: str, message: str = ""):
        if reason not in REASONS:
            raise ValueError(f"unknown rejection reason {reason!r}")
        super().__init__(f"{reason}: {message}" if message else reason)
        self.reason = reason
