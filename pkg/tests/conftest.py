"""Shared fixtures; modules live at the repository root next to cli.py."""

import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from geometry2d import ConvexPolygon, builtin_polygon  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long-running numerical checks')


@pytest.fixture
def rng():
    return np.random.default_rng(20140101)


@pytest.fixture
def heptagon() -> ConvexPolygon:
    return builtin_polygon('heptagon')


@pytest.fixture
def square() -> ConvexPolygon:
    return ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))


@pytest.fixture
def triangle() -> ConvexPolygon:
    return builtin_polygon('triangle')
