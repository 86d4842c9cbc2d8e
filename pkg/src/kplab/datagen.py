"""Initial-data construction and hypothesis checking.

Two families are provided:

* ``smooth_packet``: x-derivative of a sum of separable Gaussian envelopes.
  Taking the derivative spectrally makes the zero-x-mean constraint exact
  by construction.
* ``one_sided_rough``: the envelope is multiplied by ``1 + c_s * S(x)``
  where S plants a single singular line at x = x_s,

      S(x) = |x - x_s|^(gamma+1) * B((x - x_s)/w_s),

  with B a compactly supported C-infinity bump.  The resulting field is
  smooth on every half-plane to the right of x_s; across x_s its x-profile
  carries |x - x_s|^gamma behaviour, i.e. an H^sigma ceiling at
  sigma = gamma + 1/2 (spectral tail ~ |xi|^-(gamma+1)).  With gamma < n - 1/2
  the global windowed H^n sum containing x_s diverges under refinement,
  which is the operational meaning of one-sided roughness here; the
  restriction to (x0, oo) stays refinement-stable regardless.

Mollification uses a compactly supported radial bump of radius tau, applied
by FFT convolution with a discretely renormalized kernel so that sub-grid
tau degenerates to the identity and means are preserved exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import HypothesisFailed, SpecInfeasible
from .spectral import (
    Field,
    Grid,
    apply_alpha,
    coarsen_field,
    l2_norm,
    sharp_window_integral,
    sobolev_norm,
    windowed_derivative_sum,
)

STABILITY_RTOL = 0.10  # refinement ratio accepted as "stable"


@dataclass(frozen=True)
class Packet:
    amp: float
    cx: float
    cy: float
    sx: float
    sy: float


@dataclass(frozen=True)
class DataSpec:
    """Initial-data recipe; see module docstring for the construction."""

    kind: str = "smooth_packet"  # or "one_sided_rough"
    x0: float = 0.0
    gamma: float = 2.6
    n_target: int = 3
    x_s: float = -1.0
    amplitude: float = 0.5
    center: tuple = (2.0, 0.0)
    width: tuple = (4.0, 4.0)
    sing_amplitude: float = 1.0
    sing_width: float = 2.0
    extra_packets: tuple = ()
    x_order: int = 1  # d/dx powers applied to the envelope; >1 also localizes dx^{-1}u0

    def __post_init__(self):
        if self.kind not in ("smooth_packet", "one_sided_rough"):
            raise ValueError(f"unknown data kind {self.kind!r}")
        if self.n_target < 3:
            raise ValueError("n_target must be >= 3")
        if self.x_order < 1:
            raise ValueError("x_order must be >= 1")
        if self.kind == "one_sided_rough":
            if self.gamma <= 2:
                raise ValueError("gamma must be > 2")
            if not self.x_s < self.x0:
                raise ValueError("singular abscissa x_s must lie left of x0")

    def packets(self) -> list[Packet]:
        out = [Packet(self.amplitude, self.center[0], self.center[1],
                      self.width[0], self.width[1])]
        out.extend(Packet(*p) for p in self.extra_packets)
        return out

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "x0": self.x0, "gamma": self.gamma,
            "n_target": self.n_target, "x_s": self.x_s,
            "amplitude": self.amplitude, "center": list(self.center),
            "width": list(self.width), "sing_amplitude": self.sing_amplitude,
            "sing_width": self.sing_width,
            "extra_packets": [list(p) for p in self.extra_packets],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DataSpec":
        kw = dict(d)
        kw["center"] = tuple(kw.get("center", (2.0, 0.0)))
        kw["width"] = tuple(kw.get("width", (4.0, 4.0)))
        kw["extra_packets"] = tuple(tuple(p) for p in kw.get("extra_packets", ()))
        return cls(**kw)


def _envelope(grid: Grid, spec: DataSpec) -> np.ndarray:
    """Sum of Gaussian packets, periodized over nearest box images.

    Without the image sum a wide Gaussian leaves an O(exp(-L^2/8 s^2))
    mismatch at the box seam whose jump-like spectral tail would swamp the
    planted power-law tail and break every refinement-stability check.
    """
    X, Y = grid.meshgrid()
    out = np.zeros_like(X)
    for p in spec.packets():
        gx = np.zeros_like(X)
        gy = np.zeros_like(Y)
        for m in (-1, 0, 1):
            gx += np.exp(-((X - p.cx + m * grid.lx) ** 2) / (2 * p.sx**2))
            gy += np.exp(-((Y - p.cy + m * grid.ly) ** 2) / (2 * p.sy**2))
        out += p.amp * gx * gy
    return out


def _deriv_x(grid: Grid, values: np.ndarray, order: int = 1) -> Field:
    hat = sfft.fft2(values)
    mult = (1j * grid.kx) ** order
    if order % 2 == 1:
        mult[grid.nx // 2] = 0.0
    return Field.from_spectral(grid, hat * mult[:, None])


def smooth_packet(grid: Grid, spec: DataSpec) -> Field:
    """u0 = (d/dx)^x_order of a smooth separable envelope; structurally mean-free."""
    return _deriv_x(grid, _envelope(grid, spec), spec.x_order)


def one_sided_rough(grid: Grid, spec: DataSpec) -> Field:
    """u0 = d/dx [G(x,y) (1 + c_s S(x))] with a singular line at x = x_s.

    Raises SpecInfeasible when x_s is closer than 4 grid cells to x0 (the
    singularity must be separable from the smooth window).
    """
    if spec.x0 - spec.x_s < 4 * grid.dx:
        raise SpecInfeasible(
            f"x0 - x_s = {spec.x0 - spec.x_s:.4g} < 4 dx = {4 * grid.dx:.4g}"
        )
    X, _ = grid.meshgrid()
    # Gaussian localization (periodized) rather than a compactly supported
    # bump: flat bumps approach zero so slowly that their own spectral tail
    # would bury the planted |x - x_s|^gamma power law.
    S = np.zeros_like(X)
    for m in (-1, 0, 1):
        d = X - spec.x_s + m * grid.lx
        S += np.abs(d) ** (spec.gamma + 1.0) * np.exp(-(d * d) / (2 * spec.sing_width**2))
    F = _envelope(grid, spec) * (1.0 + spec.sing_amplitude * S)
    return _deriv_x(grid, F, spec.x_order)


def make_data(grid: Grid, spec: DataSpec) -> Field:
    if spec.kind == "smooth_packet":
        return smooth_packet(grid, spec)
    return one_sided_rough(grid, spec)


def mollify_data(u0: Field, tau: float) -> Field:
    """Convolve with the radial bump rho_tau (support = disc of radius tau).

    The sampled kernel is renormalized to unit discrete mass, so the
    operation is linear, commutes with grid translations, preserves the
    field mean exactly, and degenerates to the identity once tau drops
    below the grid scale.
    """
    if tau <= 0:
        raise ValueError("tau must be > 0")
    g = u0.grid
    offx = (((np.arange(g.nx) + g.nx // 2) % g.nx) - g.nx // 2) * g.dx
    offy = (((np.arange(g.ny) + g.ny // 2) % g.ny) - g.ny // 2) * g.dy
    r2 = (offx[:, None] / tau) ** 2 + (offy[None, :] / tau) ** 2
    kernel = np.where(r2 < 1.0, (1.0 - np.minimum(r2, 1.0)) ** 4, 0.0)
    kernel /= kernel.sum() * g.dA
    transfer = sfft.fft2(kernel) * g.dA
    return Field.from_spectral(g, u0.hat * transfer)


def spectral_tail_slope(u: Field, j_lo: int = 20, j_hi: int | None = None) -> float:
    """Log-log slope of the y-averaged x-spectrum over mode band [j_lo, j_hi].

    For data whose x-profile behaves like |x - x_s|^gamma across the
    singular line the expected slope is -(gamma + 1); the default band
    starts at j_lo = 20 because the power law only sets in once the mode
    scale is well inside the localization window.
    """
    g = u.grid
    if j_hi is None:
        j_hi = g.nx // 3
    amp = np.sqrt(np.mean(np.abs(u.hat) ** 2, axis=1))
    js = np.arange(j_lo, j_hi)
    xi = g.kx[js]
    p = amp[js]
    keep = p > 0
    coef = np.polyfit(np.log(xi[keep]), np.log(p[keep]), 1)
    return float(coef[0])


# ---------------------------------------------------------------------------
# hypothesis checking
# ---------------------------------------------------------------------------

@dataclass
class CheckedValue:
    value: float
    coarse: float
    stable: bool

    def to_dict(self) -> dict:
        return {"value": self.value, "coarse": self.coarse, "stable": self.stable}


def _checked(fine: float, coarse: float, rtol: float = STABILITY_RTOL) -> CheckedValue:
    ref = max(abs(fine), abs(coarse), 1e-300)
    return CheckedValue(fine, coarse, abs(fine - coarse) / ref <= rtol)


@dataclass
class HypothesisReport:
    """Outcome of the initial-data checks for (x0, n, s)."""

    x0: float
    n: int
    s: float
    hs_norm: CheckedValue            # ||u0||_{H^s}
    hs_anti_norm: CheckedValue       # ||dx^{-1} u0||_{H^s}
    window_sum: CheckedValue         # sum_{|a|<=n} ||d^a u0||^2 on (x0, oo)
    anti_y3_window: CheckedValue     # ||dx^{-1} dy^3 u0||_{L2(x0, oo)}
    global_hn: CheckedValue          # informational: full-box H^n norm
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (self.hs_norm.stable and self.hs_anti_norm.stable
                and self.window_sum.stable and self.anti_y3_window.stable)

    def failing(self) -> list[str]:
        out = []
        for name in ("hs_norm", "hs_anti_norm", "window_sum", "anti_y3_window"):
            if not getattr(self, name).stable:
                out.append(name)
        return out

    def to_dict(self) -> dict:
        return {
            "x0": self.x0, "n": self.n, "s": self.s, "ok": self.ok,
            "hs_norm": self.hs_norm.to_dict(),
            "hs_anti_norm": self.hs_anti_norm.to_dict(),
            "window_sum": self.window_sum.to_dict(),
            "anti_y3_window": self.anti_y3_window.to_dict(),
            "global_hn": self.global_hn.to_dict(),
            "failing": self.failing(),
            "details": self.details,
        }


def check_hypotheses(u0: Field, x0: float, n: int, s: float,
                     strict: bool = False) -> HypothesisReport:
    """Check the one-sided regularity hypotheses on u0.

    Reports, each with a half-resolution refinement-stability flag:
    the H^s norms of u0 and its x-antiderivative (admissible-class
    membership; propagates NonZeroXMean on inadmissible data), the windowed
    derivative sum of order n on (x0, oo), the windowed L2 norm of
    dx^{-1} dy^3 u0, and the full-box H^n norm (informational; expected to
    be refinement-unstable for genuinely rough data).

    With ``strict=True`` raises :class:`HypothesisFailed` naming the items
    that diverge under refinement.
    """
    from .spectral import antiderivative_x

    coarse = coarsen_field(u0)

    def both(fn):
        return _checked(fn(u0), fn(coarse))

    hs = both(lambda f: sobolev_norm(f, s))
    hs_anti = both(lambda f: sobolev_norm(antiderivative_x(f), s))
    wsum = both(lambda f: windowed_derivative_sum(f, n, x0))
    anti3 = both(lambda f: math.sqrt(
        sharp_window_integral(apply_alpha(f, (-1, 3)).values ** 2, f.grid, x0)))
    ghn = both(lambda f: sobolev_norm(f, float(n)))

    report = HypothesisReport(
        x0=x0, n=n, s=s,
        hs_norm=hs, hs_anti_norm=hs_anti, window_sum=wsum,
        anti_y3_window=anti3, global_hn=ghn,
        details={"l2": l2_norm(u0), "grid": [u0.grid.nx, u0.grid.ny]},
    )
    if strict and not report.ok:
        raise HypothesisFailed(
            f"refinement-unstable hypothesis items: {report.failing()}"
        )
    return report
