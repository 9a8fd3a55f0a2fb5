from __future__ import annotations

import shlex
import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent

if str(TESTS_DIR) not in sys.path:
    sys.path.insert(0, str(TESTS_DIR))


def stub_worker_command(*flags: str) -> str:
    parts = [sys.executable, str(TESTS_DIR / "stub_worker.py"), *flags]
    return " ".join(shlex.quote(p) for p in parts)


@pytest.fixture
def stub_command() -> str:
    return stub_worker_command()
