import numpy as np
import pytest

from kplab.spectral import Field, Grid


@pytest.fixture
def grid64():
    return Grid(64, 64, 2 * np.pi, 2 * np.pi)


@pytest.fixture
def grid128():
    return Grid(128, 128, 32.0, 32.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def mode_field(grid: Grid, jx: int, jy: int, kind: str = "cos") -> Field:
    """Real field cos/sin(xi_jx x + eta_jy y) on the grid."""
    X, Y = grid.meshgrid()
    xi = 2 * np.pi * jx / grid.lx
    eta = 2 * np.pi * jy / grid.ly
    phase = xi * X + eta * Y
    vals = np.cos(phase) if kind == "cos" else np.sin(phase)
    return Field.from_values(grid, vals)
