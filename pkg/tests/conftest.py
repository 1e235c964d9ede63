from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from treegen import worked_example_tree  # noqa: E402


@pytest.fixture
def example_tree():
    return worked_example_tree()
