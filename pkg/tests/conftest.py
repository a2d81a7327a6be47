"""
Pytest configuration for KloosterLab tests.

Adds project root to Python path for imports.
"""

import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

import math
import pytest

from shared.config import settings
from engine.table_cache import clear_cache, get_table



@pytest.fixture(autouse=True)
def no_disk_cache(monkeypatch):
    """Keep tests off any cache directory configured in the environment."""
    monkeypatch.setattr(settings, "cache", None)
    yield
    clear_cache()


@pytest.fixture
def table5():
    return get_table(5, 1)


@pytest.fixture
def table7():
    return get_table(7, 1)


@pytest.fixture
def table503():
    return get_table(503, 1)


@pytest.fixture
def sqrt5():
    return math.sqrt(5)
