from __future__ import annotations

from pathlib import Path

import pytest

from hepar import hepar_network

FIXTURES_DIR = Path(__file__).resolve().parent.parent / "fixtures"
HEPAR_FIXTURE = FIXTURES_DIR / "hepar_disorder.cptn"


@pytest.fixture
def hepar():
    return hepar_network()


@pytest.fixture
def hepar_path() -> Path:
    return HEPAR_FIXTURE
