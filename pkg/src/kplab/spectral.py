"""Periodic 2-D spectral core: grids, fields, derivatives and norms.

The box is [-lx/2, lx/2) x [-ly/2, ly/2) sampled on an nx-by-ny grid with
fields stored as real arrays of shape (nx, ny) (x is axis 0).  Transforms
follow the unnormalized-forward convention: ``hat = fft2(values)`` and
``values = ifft2(hat)``; every integral carries the quadrature weight
``dA = lx*ly/(nx*ny)``.

Wavenumbers are xi_j = 2*pi*j/lx and eta_k = 2*pi*k/ly in standard FFT
ordering.  The x-antiderivative multiplies modes by -i/xi and demands a
zero x-mean on every y-row; inputs violating that (beyond a relative
tolerance) raise :class:`~kplab.errors.NonZeroXMean` rather than being
silently projected.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import NegativeXOrder, NonZeroXMean

# Relative tolerance for the zero-x-mean admissibility check.
XMEAN_RTOL = 1e-8


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with cached wavenumber arrays."""

    nx: int
    ny: int
    lx: float
    ly: float

    def __post_init__(self):
        for n, name in ((self.nx, "nx"), (self.ny, "ny")):
            if n < 8 or n % 2 != 0:
                raise ValueError(f"{name} must be even and >= 8, got {n}")
        if self.lx <= 0 or self.ly <= 0:
            raise ValueError("box lengths must be positive")

    @cached_property
    def x(self) -> np.ndarray:
        """x nodes, centered so the box is [-lx/2, lx/2)."""
        return (np.arange(self.nx) / self.nx - 0.5) * self.lx

    @cached_property
    def y(self) -> np.ndarray:
        return (np.arange(self.ny) / self.ny - 0.5) * self.ly

    @cached_property
    def kx(self) -> np.ndarray:
        return 2.0 * np.pi * sfft.fftfreq(self.nx, d=self.lx / self.nx)

    @cached_property
    def ky(self) -> np.ndarray:
        return 2.0 * np.pi * sfft.fftfreq(self.ny, d=self.ly / self.ny)

    @cached_property
    def KX(self) -> np.ndarray:
        return self.kx[:, None] + np.zeros((1, self.ny))

    @cached_property
    def KY(self) -> np.ndarray:
        return np.zeros((self.nx, 1)) + self.ky[None, :]

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Boolean 2/3-rule mask: True where the mode is kept."""
        jx = np.abs(sfft.fftfreq(self.nx) * self.nx)
        jy = np.abs(sfft.fftfreq(self.ny) * self.ny)
        return (jx[:, None] <= self.nx / 3.0) & (jy[None, :] <= self.ny / 3.0)

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def dA(self) -> float:
        return self.lx * self.ly / (self.nx * self.ny)

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    def coarsen(self) -> "Grid":
        return Grid(self.nx // 2, self.ny // 2, self.lx, self.ly)


@dataclass(frozen=True)
class MultiIndex:
    """Derivative multi-index (a1, a2); a1 = -1 encodes one x-antiderivative."""

    a1: int
    a2: int

    def __post_init__(self):
        if self.a1 < -1:
            raise ValueError(f"a1 must be >= -1, got {self.a1}")
        if self.a2 < 0:
            raise ValueError(f"a2 must be >= 0, got {self.a2}")
        if self.a1 == -1 and self.a2 < 1:
            raise ValueError("a1 = -1 requires a2 >= 1")

    @property
    def order(self) -> int:
        return self.a1 + self.a2

    def as_tuple(self) -> tuple[int, int]:
        return (self.a1, self.a2)

    @classmethod
    def coerce(cls, a) -> "MultiIndex":
        if isinstance(a, cls):
            return a
        return cls(int(a[0]), int(a[1]))


class Field:
    """Real field on a :class:`Grid` with a lazily synchronized spectral view.

    Both views, once materialized, are cached; fields are treated as
    immutable values (operations allocate new fields), so the views never
    diverge.  Arrays handed out are the caches themselves: do not mutate.
    """

    __slots__ = ("grid", "_values", "_hat")

    def __init__(self, grid: Grid, values=None, hat=None):
        if values is None and hat is None:
            raise ValueError("need values or hat")
        self.grid = grid
        self._values = values
        self._hat = hat

    @classmethod
    def from_values(cls, grid: Grid, values: np.ndarray) -> "Field":
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.nx, grid.ny):
            raise ValueError(f"expected shape {(grid.nx, grid.ny)}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        return cls(grid, values=values)

    @classmethod
    def from_spectral(cls, grid: Grid, hat: np.ndarray) -> "Field":
        hat = np.asarray(hat, dtype=np.complex128)
        if hat.shape != (grid.nx, grid.ny):
            raise ValueError(f"expected shape {(grid.nx, grid.ny)}, got {hat.shape}")
        return cls(grid, hat=hat)

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, values=np.zeros((grid.nx, grid.ny)))

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = sfft.ifft2(self._hat).real
        return self._values

    @property
    def hat(self) -> np.ndarray:
        if self._hat is None:
            self._hat = sfft.fft2(self._values)
        return self._hat

    def copy(self) -> "Field":
        out = Field.__new__(Field)
        out.grid = self.grid
        out._values = None if self._values is None else self._values.copy()
        out._hat = None if self._hat is None else self._hat.copy()
        return out

    def __repr__(self):
        g = self.grid
        return f"Field({g.nx}x{g.ny}, box {g.lx}x{g.ly})"


def _deriv_multiplier(grid: Grid, a1: int, a2: int) -> np.ndarray:
    """(i xi)^a1 (i eta)^a2 with Nyquist lines zeroed for odd orders.

    Odd derivatives of the unpaired Nyquist mode are not representable on
    the grid; the correct band-limited derivative there is zero.
    """
    mx = (1j * grid.kx) ** a1
    my = (1j * grid.ky) ** a2
    if a1 % 2 == 1:
        mx[grid.nx // 2] = 0.0
    if a2 % 2 == 1:
        my[grid.ny // 2] = 0.0
    return mx[:, None] * my[None, :]


def partial_deriv(f: Field, a) -> Field:
    """Spectral derivative d^a1/dx^a1 d^a2/dy^a2; exact on band-limited input."""
    a = MultiIndex.coerce(a)
    if a.a1 < 0:
        raise NegativeXOrder(
            f"x-order {a.a1} < 0: route through antiderivative_x / apply_alpha"
        )
    if a.a1 == 0 and a.a2 == 0:
        return f.copy()
    return Field.from_spectral(f.grid, f.hat * _deriv_multiplier(f.grid, a.a1, a.a2))


def x_mean_magnitude(f: Field) -> float:
    """Largest magnitude among the xi = 0 Fourier coefficients, rescaled to
    bound the per-row x-mean amplitude."""
    g = f.grid
    return float(np.abs(f.hat[0, :]).max() / (g.nx * g.ny))


def antiderivative_x(f: Field, rtol: float = XMEAN_RTOL) -> Field:
    """x-antiderivative: modes multiplied by -i/xi, xi = 0 column set to zero.

    Requires a zero x-mean on every y-row; the admissibility threshold is
    ``rtol * ||f||_L2``.  Raises :class:`NonZeroXMean` otherwise.
    """
    g = f.grid
    tol = rtol * l2_norm(f)
    bad = x_mean_magnitude(f)
    if bad > tol:
        raise NonZeroXMean(bad, tol)
    mult = np.zeros(g.nx, dtype=np.complex128)
    nonzero = g.kx != 0.0
    mult[nonzero] = -1j / g.kx[nonzero]
    mult[g.nx // 2] = 0.0  # unpaired Nyquist mode, same convention as odd derivatives
    hat = f.hat * mult[:, None]
    hat[0, :] = 0.0
    return Field.from_spectral(g, hat)


def apply_alpha(f: Field, a) -> Field:
    """Compose spectral derivatives, with a1 = -1 meaning one x-antiderivative.

    The y-derivative with a1 = -1 is taken first so the antiderivative
    precondition is checked on the differentiated field (the (0,0) mode is
    already annihilated by d/dy).
    """
    a = MultiIndex.coerce(a)
    if a.a1 >= 0:
        return partial_deriv(f, a)
    return antiderivative_x(partial_deriv(f, (0, a.a2)))


def dealias(grid: Grid, hat: np.ndarray) -> np.ndarray:
    """2/3-rule projection of a spectral view: modes with |j| > nx/3 or
    |k| > ny/3 are zeroed.  Idempotent and norm-nonincreasing."""
    return hat * grid.dealias_mask


def dealias_field(f: Field) -> Field:
    return Field.from_spectral(f.grid, dealias(f.grid, f.hat))


def l2_norm(f: Field) -> float:
    """Physical-space L2 norm with quadrature weights."""
    v = f.values
    return float(np.sqrt(np.sum(v * v) * f.grid.dA))


def sobolev_norm(f: Field, s: float) -> float:
    """H^s norm: (sum (1 + xi^2 + eta^2)^s |fhat|^2 dA / (nx*ny))^{1/2}.

    Reduces to the L2 norm at s = 0 by Parseval.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    g = f.grid
    w = (1.0 + g.KX**2 + g.KY**2) ** s if s != 0 else 1.0
    total = np.sum(w * np.abs(f.hat) ** 2) * g.lx * g.ly / (g.nx * g.ny) ** 2
    return float(np.sqrt(total))


def sharp_window_integral(values: np.ndarray, grid: Grid, a: float, b: float | None = None) -> float:
    """Integral of ``values`` over the strip a <= x (< b) times the full y-range.

    Nodes are treated as cells [x - dx/2, x + dx/2); the cells straddling a
    window edge enter with their covered fraction, giving an O(h^2) cut.
    """
    x = grid.x
    dx = grid.dx
    w = np.clip((x + 0.5 * dx - a) / dx, 0.0, 1.0)
    if b is not None:
        w = w * np.clip((b - x + 0.5 * dx) / dx, 0.0, 1.0)
    return float(np.sum(values * w[:, None]) * grid.dA)


def windowed_derivative_sum(u: Field, n: int, a: float, b: float | None = None) -> float:
    """Sum over all multi-indices |alpha| <= n (both orders >= 0) of the
    x-windowed squared-derivative integrals of u on the strip a <= x (< b)."""
    total = 0.0
    for a1 in range(n + 1):
        for a2 in range(n + 1 - a1):
            d = partial_deriv(u, (a1, a2))
            total += sharp_window_integral(d.values**2, u.grid, a, b)
    return total


def coarsen_field(f: Field) -> Field:
    """Project onto the half-resolution grid by spectral truncation.

    Modes at or beyond the target Nyquist are dropped (clean projection).
    """
    g = f.grid
    cg = g.coarsen()
    hx, hy = cg.nx // 2, cg.ny // 2
    hat = f.hat
    out = np.zeros((cg.nx, cg.ny), dtype=np.complex128)
    out[:hx, :hy] = hat[:hx, :hy]
    out[:hx, -hy + 1:] = hat[:hx, -hy + 1:]
    out[-hx + 1:, :hy] = hat[-hx + 1:, :hy]
    out[-hx + 1:, -hy + 1:] = hat[-hx + 1:, -hy + 1:]
    out *= (cg.nx * cg.ny) / (g.nx * g.ny)
    return Field.from_spectral(cg, out)


def refine_field(f: Field, fine: Grid) -> Field:
    """Embed onto a finer grid (same box) by zero-padding the spectrum."""
    g = f.grid
    if fine.lx != g.lx or fine.ly != g.ly:
        raise ValueError("refinement requires the same box")
    if fine.nx < g.nx or fine.ny < g.ny:
        raise ValueError("target grid must be at least as fine")
    hx, hy = g.nx // 2, g.ny // 2
    hat = f.hat
    out = np.zeros((fine.nx, fine.ny), dtype=np.complex128)
    out[:hx, :hy] = hat[:hx, :hy]
    out[:hx, -hy + 1:] = hat[:hx, -hy + 1:]
    out[-hx + 1:, :hy] = hat[-hx + 1:, :hy]
    out[-hx + 1:, -hy + 1:] = hat[-hx + 1:, -hy + 1:]
    out *= (fine.nx * fine.ny) / (g.nx * g.ny)
    return Field.from_spectral(fine, out)


def oversample_x(f: Field, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact spectral interpolation onto a q-times finer x-grid.

    Returns (values_fine, x_fine) with values_fine of shape (q*nx, ny).
    Used by weighted quadratures to push weight-aliasing error down.
    """
    if q == 1:
        return f.values, f.grid.x
    g = f.grid
    hx = g.nx // 2
    hat = f.hat
    out = np.zeros((q * g.nx, g.ny), dtype=np.complex128)
    out[:hx, :] = hat[:hx, :]
    out[-hx + 1:, :] = hat[-hx + 1:, :]
    out *= q
    vals = sfft.ifft2(out).real
    xf = (np.arange(q * g.nx) / (q * g.nx) - 0.5) * g.lx
    return vals, xf


def random_band_limited(
    grid: Grid,
    max_mode: int,
    rng: np.random.Generator,
    rms: float = 1.0,
    zero_x_mean: bool = True,
) -> Field:
    """Random real field with spectral support |j|, |k| <= max_mode.

    Coefficients are i.i.d. complex Gaussian with Hermitian symmetry imposed;
    the result is rescaled to the requested RMS amplitude.
    """
    if max_mode < 1 or max_mode >= min(grid.nx, grid.ny) // 2:
        raise ValueError("max_mode must be in [1, min(nx,ny)/2)")
    m = max_mode
    c = rng.standard_normal((2 * m + 1, 2 * m + 1)) + 1j * rng.standard_normal((2 * m + 1, 2 * m + 1))
    hat = np.zeros((grid.nx, grid.ny), dtype=np.complex128)
    js = np.arange(-m, m + 1)
    for aj, j in enumerate(js):
        for ak, k in enumerate(js):
            hat[j, k] = c[aj, ak]
    # Hermitian symmetrization keeps the inverse transform real.
    sym = np.zeros_like(hat)
    for j in js:
        for k in js:
            sym[j, k] = 0.5 * (hat[j, k] + np.conj(hat[-j, -k]))
    sym[0, 0] = 0.0
    if zero_x_mean:
        sym[0, :] = 0.0
    f = Field.from_values(grid, sfft.ifft2(sym).real)
    cur = float(np.sqrt(np.mean(f.values**2)))
    if cur > 0:
        f = Field.from_values(grid, f.values * (rms / cur))
    return f
