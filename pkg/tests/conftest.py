import sys
from pathlib import Path

import numpy as np
import pytest

# modules import each other as top-level names, the way main.py runs from src/
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

SERIES8 = [3, 1, 7, 0, 4, 1, 6, 3]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def series8():
    return list(SERIES8)
