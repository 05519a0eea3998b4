import warnings

import numpy as np
import pytest

from llstab.dynamics import EquilibriumPoint, SimParams
from llstab.grid_field import GridSpec, MagnetizationField

_ACCEPTANCE = []


def unit_field(raw, grid):
    raw = np.asarray(raw, dtype=float)
    return MagnetizationField(raw / np.linalg.norm(raw, axis=1)[:, None], grid, on_sphere=True)


@pytest.fixture
def grid64():
    return GridSpec(64, 1.0)


@pytest.fixture
def r_x():
    return EquilibriumPoint([1.0, 0.0, 0.0])


@pytest.fixture
def params64(grid64):
    return SimParams(nu=0.02, k=0.25, grid=grid64)


@pytest.fixture
def quiet_r1_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


@pytest.fixture
def criterion():
    """Record one acceptance line, then assert it."""

    def record(label, name, ok, detail):
        _ACCEPTANCE.append(f"{'PASS' if ok else 'FAIL'} criterion {label} ({name}): {detail}")
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
