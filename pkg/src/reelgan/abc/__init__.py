"""Parsing, curation and re-emission of monophonic ABC tunes."""

from .curate import FilterGates, FilterReport, curate_tune, filter_corpus
from .errors import REASONS, TuneError
from .io import read_tune_texts, record_to_abc, split_tunebook, write_corpus
from .keys import KeySignature, parse_key
from .model import NoteEvent, Tune, TuneHeader
from .parser import parse_tune
from .repeats import unroll_repeats, unroll_tune
from .transpose import transpose, transpose_to_d_major
from .writer import write_abc

__all__ = [
    "FilterGates", "FilterReport", "KeySignature", "NoteEvent", "REASONS", "Tune",
    "TuneError", "TuneHeader", "curate_tune", "filter_corpus", "parse_key", "parse_tune",
    "read_tune_texts", "record_to_abc", "split_tunebook", "transpose",
    "transpose_to_d_major", "unroll_repeats", "unroll_tune", "write_abc", "write_corpus",
]
