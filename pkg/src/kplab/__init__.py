"""kplab: a pseudospectral laboratory for weighted-energy diagnostics of the
KP-II equation on a large periodic box."""

__version__ = "0.1.0"

from .spectral import Field, Grid, MultiIndex  # noqa: F401
from .weights import WeightSpec, make_weight  # noqa: F401
from .solver import SolverConfig, Trajectory, evolve  # noqa: F401
from .datagen import DataSpec  # noqa: F401
from .diagnostics import BracketSpec  # noqa: F401
