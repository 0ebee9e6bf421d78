from __future__ import annotations

from pathlib import Path

import pytest

from statreason.corpus import load_corpus

FIXTURE_MANIFEST = Path(__file__).parent / "fixtures" / "corpus" / "manifest.txt"


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(FIXTURE_MANIFEST)


@pytest.fixture
def manifest_path() -> Path:
    return FIXTURE_MANIFEST
