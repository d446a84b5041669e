"""Reading ABC tunebooks and session-style corpus dumps."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .model import Tune
from .writer import write_abc

_TUNE_SUFFIXES = (".abc", ".json", ".csv")


def split_tunebook(text: str) -> list[str]:
    """Split a tunebook into tune blocks at blank lines.

    Blocks made only of comments or free text without any field line are
    dropped (tunebook preambles).
    """
    blocks, current = [], []
    for line in text.splitlines():
        if line.strip():
            current.append(line)
        elif current:
            blocks.append(current)
            current = []
    if current:
        blocks.append(current)
    tunes = []
    for block in blocks:
        if any(ln.lstrip()[:2] in ("X:", "K:", "T:") for ln in block):
            tunes.append("\n".join(block))
    return tunes


def _mode_to_key(value: str) -> str:
    # session dumps spell keys like "Dmajor" / "Adorian"
    value = value.strip()
    if value.startswith("K:"):
        value = value[2:].strip()
    for word, short in (("major", "maj"), ("minor", "min"), ("dorian", "dor"), ("mixolydian", "mix")):
        if value.lower().endswith(word):
            return value[: -len(word)] + short
    return value


def record_to_abc(record: dict) -> str:
    """Build a tune block from a dump record carrying an ``abc`` body."""
    body = record["abc"].replace("\\r\\n", "\n").replace("\r\n", "\n")
    key = _mode_to_key(str(record.get("mode") or record.get("key") or record.get("K") or ""))
    meter = str(record.get("meter") or record.get("M") or "4/4")
    title = record.get("name") or record.get("title") or record.get("T") or ""
    ident = record.get("setting_id") or record.get("tune_id") or record.get("id") or record.get("X") or ""
    length = record.get("L") or "1/8"
    return f"X:{ident}\nT:{title}\nM:{meter}\nL:{length}\nK:{key}\n{body}"


def read_tune_texts(path: str | Path) -> list[str]:
    """Collect tune blocks from an ABC file, a JSON/CSV dump, or a directory of them."""
    path = Path(path)
    if path.is_dir():
        texts = []
        for child in sorted(path.iterdir()):
            if child.suffix.lower() in _TUNE_SUFFIXES and child.is_file():
                texts.extend(read_tune_texts(child))
        return texts
    suffix = path.suffix.lower()
    text = path.read_text(encoding="utf-8")
    if suffix == ".json":
        data = json.loads(text)
        if isinstance(data, dict):
            data = data.get("tunes") or data.get("settings") or [data]
        return [record_to_abc(rec) for rec in data]
    if suffix == ".csv":
        return [record_to_abc(rec) for rec in csv.DictReader(text.splitlines())]
    return split_tunebook(text)


def write_corpus(tunes: list[Tune]) -> str:
    return "\n".join(write_abc(t, index=i + 1) for i, t in enumerate(tunes))
