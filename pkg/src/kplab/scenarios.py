"""Canonical scenario configurations.

These are the desk-scale experiments the acceptance suite runs; they are
also exported as JSON (``python -m kplab.scenarios DIR``) so the same runs
can be reproduced through ``kplab run`` / ``kplab sweep``.

Geometry notes:

* propagation / mollification: 32x32 box at 256^2, datum smooth except for
  one planted singular line at x_s = -1 left of the window threshold x0 = 0;
  the moving window x >= x0 + eps - nu t never crosses the singular line
  within T = 1.
* backward contrast: a 96x96 box with an |xi| <= 4.5 cap so that no
  retained mode can cross the box within |t| <= 0.5.  Backward evolution
  sweeps the singular tail band rightward into the window at x >= 6, which
  only the fine grid resolves (refinement instability); forward evolution
  sweeps it leftward, leaving the window's smooth anchor packet unchanged
  (refinement stability).  Data amplitudes are kept small so the nonlinear
  cascade into fast low-xi modes stays under the contrast signal.
"""

from __future__ import annotations

import os
import sys

from .datagen import DataSpec
from .experiments import ScenarioConfig
from .solver import SolverConfig
from .spectral import Grid
from .weights import make_weight


def propagation_rough(nx: int = 256, dt: float = 5e-4) -> ScenarioConfig:
    grid = Grid(nx, nx, 32.0, 32.0)
    return ScenarioConfig(
        name="prop_rough",
        experiment="propagation",
        data=DataSpec(kind="one_sided_rough", x0=0.0, gamma=2.6, x_s=-1.0,
                      amplitude=0.5, center=(2.0, 0.0), width=(4.0, 4.0),
                      sing_amplitude=1.0, sing_width=2.0),
        solver=SolverConfig(grid, dt=dt, t_end=1.0),
        weights=(make_weight(0.25, 1.25, nu=1.0),),
        monitor_n=3,
        sample_count=81,
    )


def propagation_control(nx: int = 256, dt: float = 5e-4) -> ScenarioConfig:
    grid = Grid(nx, nx, 32.0, 32.0)
    return ScenarioConfig(
        name="prop_control",
        experiment="propagation",
        data=DataSpec(kind="smooth_packet", x0=0.0, amplitude=0.3,
                      center=(6.0, 0.0), width=(4.0, 4.0)),
        solver=SolverConfig(grid, dt=dt, t_end=1.0),
        weights=(make_weight(0.25, 1.25, nu=1.0),),
        monitor_n=3,
        sample_count=81,
    )


def backward_contrast(nx: int = 256, dt: float = 1e-3) -> ScenarioConfig:
    grid = Grid(nx, nx, 96.0, 96.0)
    return ScenarioConfig(
        name="backward_contrast",
        experiment="backward_contrast",
        data=DataSpec(kind="one_sided_rough", x0=-4.0, gamma=2.1, x_s=-8.0,
                      amplitude=0.25, center=(-2.0, 0.0), width=(3.0, 3.0),
                      sing_amplitude=1.0, sing_width=2.0,
                      extra_packets=((0.4, 10.0, 0.0, 2.0, 2.0),)),
        solver=SolverConfig(grid, dt=dt, t_end=0.5, kx_cut=4.5),
        weights=(make_weight(0.25, 1.25, nu=1.0),),
        monitor_n=3,
        sample_count=21,
        windows=(6.0,),
    )


def mollification_sweep(nx: int = 256, dt: float = 5e-4) -> ScenarioConfig:
    base = propagation_rough(nx=nx, dt=dt)
    return ScenarioConfig(
        name="mollification_sweep",
        experiment="mollification",
        data=base.data,
        solver=base.solver,
        weights=base.weights,
        monitor_n=3,
        sample_count=41,
        taus=(0.2, 0.1, 0.05),
    )


BUILTIN = {
    "prop_rough": propagation_rough,
    "prop_control": propagation_control,
    "backward_contrast": backward_contrast,
    "mollification_sweep": mollification_sweep,
}


def dump_configs(out_dir: str) -> list[str]:
    """Write every builtin scenario as JSON; returns the file paths."""
    from .checkpoint import atomic_write_json

    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, builder in BUILTIN.items():
        path = os.path.join(out_dir, f"{name}.json")
        atomic_write_json(path, builder().to_dict())
        paths.append(path)
    return paths


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else "configs"
    for p in dump_configs(target):
        print(p)
