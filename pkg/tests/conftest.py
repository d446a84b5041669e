from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))

FIXTURE_CORPUS = HERE / "fixtures" / "reels.abc"

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def fixture_texts():
    from reelgan.abc import read_tune_texts

    return read_tune_texts(FIXTURE_CORPUS)


@pytest.fixture(scope="session")
def curated(fixture_texts):
    from reelgan.abc import filter_corpus

    kept, report = filter_corpus(fixture_texts)
    return kept, report


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
