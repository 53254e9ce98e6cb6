import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=150, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"


@pytest.fixture(scope="session")
def corpus():
    from soas.cli.parser import parse_file
    return {p.stem: parse_file(p.read_text()) for p in sorted(CORPUS.glob("*.soas"))}


@pytest.fixture(scope="session")
def stlc(corpus):
    return corpus["stlc"]


@pytest.fixture(scope="session")
def untyped(corpus):
    return corpus["untyped"]
