# Shared pytest fixtures. The repository is flat (scripts import lib.* and config from the
# root), so the root goes on sys.path first.

import os
import sys

import numpy as np
import pytest

ROOT = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, ROOT)

from lib import gallery  # noqa: E402
from lib import scanners  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def function_root():
    return os.path.join(ROOT, "warehouse", "functions")


@pytest.fixture
def h():
    return gallery.product_example()


@pytest.fixture
def slice_constant():
    return gallery.slice_constant_example()


@pytest.fixture
def injective():
    return gallery.injective_example()


@pytest.fixture
def square():
    return gallery.square()


@pytest.fixture
def small_grid():
    return scanners.GridSpec(8, 8, 8, 16)


@pytest.fixture
def tiny_grid():
    return scanners.GridSpec(4, 2, 4, 8)
