"""Smooth cutoff weights chi_{eps,b} and verification of their sampled facts.

A weight ramps monotonically from 0 (for x <= eps) to 1 (for x >= b) and is
built by mollifying the piecewise-linear ramp

    ramp(x) = 0                       for x <= 2*eps
            = (x - 2*eps)/(b - 3*eps) for 2*eps <= x <= b - eps
            = 1                       for x >= b - eps

with the rescaled bump rho_eps(x) = rho(x/eps)/eps.  The standing parameter
constraint is eps > 0 and b >= 5*eps.

Two mollifiers are supported:

* ``poly`` (default): rho(z) = C*(1 - z^2)^k on (-1, 1), normalized so that
  its integral is one.  The convolution with the ramp then has a closed
  piecewise-polynomial form, evaluated here exactly (bit-reproducible).
  With k >= 4 the weight is C^3, which covers every derivative the energy
  identity consumes (up to chi''').
* ``exp``: the classical C-infinity bump exp(-1/(1 - z^2)), evaluated by
  adaptive quadrature.  Slower; available for cross-checks.

Key elementary properties (all verified by :func:`check_weight_facts`):
supp chi ⊆ [eps, ∞), supp chi' ⊆ [eps, b], 0 <= chi' <= 1/(b - 3*eps)
everywhere with equality on [3*eps, b - 2*eps], chi_{eps/5, eps} = 1 on the
support of chi_{eps,b}, and |chi''|, |chi'''| are dominated by a constant
multiple of chi'_{eps/5, b+eps}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .errors import FactViolation, InvalidWeight
from .spectral import Grid


@dataclass(frozen=True)
class WeightSpec:
    """Parameters of one cutoff weight chi_{eps,b}(x + nu*t)."""

    eps: float
    b: float
    nu: float = 0.0
    mollifier_order: int = 4
    kind: str = "poly"

    def __post_init__(self):
        if self.eps <= 0:
            raise InvalidWeight(f"eps must be > 0, got {self.eps}")
        if self.b < 5 * self.eps:
            raise InvalidWeight(f"b must be >= 5*eps, got b={self.b}, eps={self.eps}")
        if self.nu < 0:
            raise InvalidWeight(f"nu must be >= 0, got {self.nu}")
        if self.mollifier_order < 4:
            raise InvalidWeight("mollifier_order must be >= 4 so chi''' is continuous")
        if self.kind not in ("poly", "exp"):
            raise InvalidWeight(f"unknown mollifier kind {self.kind!r}")

    @property
    def slope_bound(self) -> float:
        """Upper (and interior lower) bound 1/(b - 3*eps) for chi'."""
        return 1.0 / (self.b - 3.0 * self.eps)


def make_weight(eps: float, b: float, nu: float = 0.0, mollifier_order: int = 4,
                kind: str = "poly") -> WeightSpec:
    """Validated constructor for :class:`WeightSpec`."""
    return WeightSpec(eps=eps, b=b, nu=nu, mollifier_order=mollifier_order, kind=kind)


# ---------------------------------------------------------------------------
# polynomial bump: closed-form machinery
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def bump_normalization(k: int) -> float:
    """C with integral of C*(1 - z^2)^k over (-1, 1) equal to one.

    The integral is 2 * sum_i (-1)^i C(k,i)/(2i+1); computed with exact
    rational arithmetic before the final division.
    """
    from fractions import Fraction

    s = sum(Fraction((-1) ** i * math.comb(k, i), 2 * i + 1) for i in range(k + 1))
    return float(1 / (2 * s))


@lru_cache(maxsize=None)
def _cumulative_coeffs(k: int) -> np.ndarray:
    """Coefficients of F(z) = sum_i (-1)^i C(k,i) z^(2i+1)/(2i+1) (odd powers)."""
    return np.array([(-1) ** i * math.comb(k, i) / (2 * i + 1) for i in range(k + 1)])


def _bump_cdf(z: np.ndarray, k: int) -> np.ndarray:
    """P(z) = integral of the normalized bump from -1 to clip(z)."""
    zc = np.clip(z, -1.0, 1.0)
    coeff = _cumulative_coeffs(k)
    F = np.zeros_like(zc)
    zp = zc.copy()
    for i in range(k + 1):
        F += coeff[i] * zp
        zp = zp * zc * zc
    C = bump_normalization(k)
    return C * (F + float(coeff.sum()))  # F(-1) = -F(1), so P(-1) = 0 and P(1) = 1


def _bump_first_moment(z: np.ndarray, k: int) -> np.ndarray:
    """Q(z) = integral of s*rho(s) ds from -1 to clip(z)."""
    zc = np.clip(z, -1.0, 1.0)
    C = bump_normalization(k)
    return -C * (1.0 - zc * zc) ** (k + 1) / (2.0 * (k + 1))


def _bump(z: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros_like(z)
    inside = np.abs(z) < 1.0
    zi = z[inside]
    out[inside] = bump_normalization(k) * (1.0 - zi * zi) ** k
    return out


def _bump_deriv(z: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros_like(z)
    inside = np.abs(z) < 1.0
    zi = z[inside]
    out[inside] = bump_normalization(k) * (-2.0 * k) * zi * (1.0 - zi * zi) ** (k - 1)
    return out


def _eval_poly(w: WeightSpec, x: np.ndarray, d: int) -> np.ndarray:
    """Closed-form chi^(d) for the polynomial bump.

    Splitting the convolution integral at the ramp breakpoints reduces chi
    to bump-cdf and first-moment evaluations:
        chi(x)   = P(z1) + [(x - 2 eps)(P(z2) - P(z1)) - eps (Q(z2) - Q(z1))]/(b - 3 eps)
        chi'(x)  = (P(z2) - P(z1))/(b - 3 eps)
        chi''(x) = (rho(z2) - rho(z1))/(eps (b - 3 eps))
        chi'''(x)= (rho'(z2) - rho'(z1))/(eps^2 (b - 3 eps))
    with z1 = (x - b + eps)/eps, z2 = (x - 2 eps)/eps.
    """
    eps, b, k = w.eps, w.b, w.mollifier_order
    denom = b - 3.0 * eps
    z1 = (x - (b - eps)) / eps
    z2 = (x - 2.0 * eps) / eps
    if d == 0:
        p1, p2 = _bump_cdf(z1, k), _bump_cdf(z2, k)
        q1, q2 = _bump_first_moment(z1, k), _bump_first_moment(z2, k)
        return p1 + ((x - 2.0 * eps) * (p2 - p1) - eps * (q2 - q1)) / denom
    if d == 1:
        return (_bump_cdf(z2, k) - _bump_cdf(z1, k)) / denom
    if d == 2:
        return (_bump(z2, k) - _bump(z1, k)) / (eps * denom)
    if d == 3:
        return (_bump_deriv(z2, k) - _bump_deriv(z1, k)) / (eps * eps * denom)
    raise ValueError("derivative order must be 0..3")


# ---------------------------------------------------------------------------
# quadrature reference path (also the only path for the exp bump)
# ---------------------------------------------------------------------------

def _exp_bump_raw(z: float) -> float:
    if abs(z) >= 1.0:
        return 0.0
    return math.exp(-1.0 / (1.0 - z * z))


@lru_cache(maxsize=None)
def _exp_bump_norm() -> float:
    val, _ = quad(_exp_bump_raw, -1.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    return 1.0 / val


def _mollifier_funcs(w: WeightSpec):
    """(rho, rho', rho'') on (-1,1) for the configured bump."""
    k = w.mollifier_order
    if w.kind == "poly":
        C = bump_normalization(k)

        def rho(z):
            return C * (1 - z * z) ** k if abs(z) < 1 else 0.0

        def rho1(z):
            return -2 * k * C * z * (1 - z * z) ** (k - 1) if abs(z) < 1 else 0.0

        def rho2(z):
            if abs(z) >= 1:
                return 0.0
            return C * (-2 * k * (1 - z * z) ** (k - 1)
                        + 4 * k * (k - 1) * z * z * (1 - z * z) ** (k - 2))

        return rho, rho1, rho2

    Ce = _exp_bump_norm()

    def rho(z):
        return Ce * _exp_bump_raw(z)

    def rho1(z):
        if abs(z) >= 1:
            return 0.0
        g = -2 * z / (1 - z * z) ** 2
        return rho(z) * g

    def rho2(z):
        if abs(z) >= 1:
            return 0.0
        om = 1 - z * z
        g = -2 * z / om**2
        gp = -2 / om**2 - 8 * z * z / om**3
        return rho(z) * (g * g + gp)

    return rho, rho1, rho2


def _ramp(w: WeightSpec, x: float) -> float:
    if x <= 2 * w.eps:
        return 0.0
    if x >= w.b - w.eps:
        return 1.0
    return (x - 2 * w.eps) / (w.b - 3 * w.eps)


def eval_weight_reference(w: WeightSpec, x, d: int = 0, tol: float = 1e-12):
    """Quadrature evaluation of chi^(d); the independent reference path.

    d = 0 integrates rho(z) * ramp(x - eps z); d >= 1 uses
    chi^(d)(x) = (1/(b - 3 eps)) * integral over the ramp's linear span of
    eps^(-d) rho^(d-1)((x - y)/eps) dy.
    """
    if d not in (0, 1, 2, 3):
        raise ValueError("derivative order must be 0..3")
    import warnings
    from scipy.integrate import IntegrationWarning

    rho, rho1, rho2 = _mollifier_funcs(w)
    eps, b = w.eps, w.b
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.empty_like(xs)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for i, xx in enumerate(xs):
            if d == 0:
                # split at the z-preimages of the ramp breakpoints
                pts = sorted(
                    z for z in ((xx - (b - eps)) / eps, (xx - 2 * eps) / eps) if -1 < z < 1
                )
                val, _ = quad(
                    lambda z: rho(z) * _ramp(w, xx - eps * z),
                    -1.0, 1.0, points=pts or None, epsabs=tol, limit=200,
                )
            else:
                lo, hi = max(2 * eps, xx - eps), min(b - eps, xx + eps)
                if lo >= hi:
                    out[i] = 0.0
                    continue
                kernel = (rho, rho1, rho2)[d - 1]
                val, _ = quad(
                    lambda y: kernel((xx - y) / eps) / eps**d,
                    lo, hi, epsabs=tol, limit=200,
                )
                val /= (b - 3 * eps)
            out[i] = val
    return out if np.ndim(x) else float(out[0])


def eval_weight(w: WeightSpec, x, d: int = 0):
    """chi^(d)_{eps,b}(x) for d in 0..3; vectorized over x.

    The polynomial bump uses the exact closed form; the exp bump falls back
    to quadrature.
    """
    if d not in (0, 1, 2, 3):
        raise ValueError("derivative order must be 0..3")
    if w.kind == "exp":
        return eval_weight_reference(w, x, d)
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = _eval_poly(w, xs, d)
    return out if np.ndim(x) else float(out[0])


# ---------------------------------------------------------------------------
# gridded profiles and fact checking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightProfile:
    """chi and derivatives sampled on a grid's x-nodes at time t."""

    spec: WeightSpec
    t: float
    chi: tuple  # chi[d] is the d-th derivative profile, shape (nx,)
    wrapped: bool

    def derivative(self, d: int) -> np.ndarray:
        return self.chi[d]


def weight_profile(w: WeightSpec, grid: Grid, t: float) -> WeightProfile:
    """Sample chi^(d)(x + nu t), d = 0..3, on the grid's x-nodes.

    The profile is flagged ``wrapped`` unless the transition region
    [eps - nu t, b - nu t] lies inside the box: a transition crossing the
    periodic seam makes weighted quadratures meaningless and dependent
    diagnostics must mark their outputs contaminated.
    """
    shift = w.nu * t
    xs = grid.x + shift
    chi = tuple(np.asarray(eval_weight(w, xs, d)) for d in range(4))
    lo, hi = w.eps - shift, w.b - shift
    box_lo, box_hi = grid.x[0], grid.x[0] + grid.lx
    wrapped = not (box_lo <= lo and hi <= box_hi)
    return WeightProfile(spec=w, t=t, chi=chi, wrapped=wrapped)


@dataclass
class WeightFacts:
    """Sampled verification record for one weight."""

    eps: float
    b: float
    n_samples: int
    supp_chi_ok: bool
    plateau_ok: bool
    slope_band_ok: bool
    slope_floor_ok: bool
    supp_deriv_ok: bool
    cover_ok: bool
    c2: float  # smallest sampled c with |chi''| <= c * chi'_{eps/5, b+eps}
    c3: float  # same for |chi'''|
    c2_plain: float  # one-sided constant against chi_{eps/5, b+eps} itself
    details: dict = field(default_factory=dict)

    @property
    def all_ok(self) -> bool:
        return (self.supp_chi_ok and self.plateau_ok and self.slope_band_ok
                and self.slope_floor_ok and self.supp_deriv_ok and self.cover_ok
                and math.isfinite(self.c2) and math.isfinite(self.c3))

    def to_dict(self) -> dict:
        return {
            "eps": self.eps, "b": self.b, "n_samples": self.n_samples,
            "supp_chi_ok": self.supp_chi_ok, "plateau_ok": self.plateau_ok,
            "slope_band_ok": self.slope_band_ok, "slope_floor_ok": self.slope_floor_ok,
            "supp_deriv_ok": self.supp_deriv_ok, "cover_ok": self.cover_ok,
            "c2": self.c2, "c3": self.c3, "c2_plain": self.c2_plain,
            "slope_bound": 1.0 / (self.b - 3 * self.eps),
            "all_ok": self.all_ok, "details": self.details,
        }


def check_weight_facts(w: WeightSpec, n_samples: int = 10_000, tol: float = 1e-10,
                       raise_on_failure: bool = True) -> WeightFacts:
    """Verify the weight facts on a dense sample and record empirical constants.

    Checks, each at tolerance ``tol``:
      (a) chi = 0 for x <= eps and chi = 1 for x >= b;
      (b) 0 <= chi' <= 1/(b-3 eps) everywhere, with equality on [3 eps, b-2 eps];
      (c) supp chi' ⊆ [eps, b];
      (d) chi_{eps/5, eps} = 1 wherever chi_{eps,b} > 0;
      (e) finite sampled constants c2, c3 dominating |chi''| and |chi'''| by
          chi'_{eps/5, b+eps}.
    """
    eps, b = w.eps, w.b
    lo, hi = -(b + 2 * eps), 2 * (b + eps)
    xs = np.linspace(lo, hi, n_samples)
    chi0 = np.asarray(eval_weight(w, xs, 0))
    chi1 = np.asarray(eval_weight(w, xs, 1))
    chi2 = np.asarray(eval_weight(w, xs, 2))
    chi3 = np.asarray(eval_weight(w, xs, 3))
    bound = w.slope_bound

    w_cover = WeightSpec(eps / 5, eps, kind=w.kind, mollifier_order=w.mollifier_order)
    w_dom = WeightSpec(eps / 5, b + eps, kind=w.kind, mollifier_order=w.mollifier_order)
    cover0 = np.asarray(eval_weight(w_cover, xs, 0))
    dom0 = np.asarray(eval_weight(w_dom, xs, 0))
    dom1 = np.asarray(eval_weight(w_dom, xs, 1))

    left = xs <= eps
    supp_chi_ok = bool(np.all(np.abs(chi0[left]) <= tol))
    plateau_ok = bool(np.all(np.abs(chi0[xs >= b] - 1.0) <= tol))
    slope_band_ok = bool(np.all(chi1 >= -tol) and np.all(chi1 <= bound + tol))
    inner = (xs >= 3 * eps) & (xs <= b - 2 * eps)
    slope_floor_ok = bool(np.all(chi1[inner] >= bound - tol))
    outside = (xs < eps) | (xs > b)
    supp_deriv_ok = bool(np.all(np.abs(chi1[outside]) <= tol))
    on_supp = chi0 > tol
    cover_ok = bool(np.all(np.abs(cover0[on_supp] - 1.0) <= tol))

    def dominated_constant(num: np.ndarray) -> float:
        active = np.abs(num) > tol
        if not np.any(active):
            return 0.0
        if np.any(dom1[active] <= max(tol, 1e-300)):
            return math.inf
        return float(np.max(np.abs(num[active]) / dom1[active]))

    c2 = dominated_constant(chi2)
    c3 = dominated_constant(chi3)
    pos = (chi2 > tol) & (dom0 > 0)
    c2_plain = float(np.max(chi2[pos] / dom0[pos])) if np.any(pos) else 0.0

    facts = WeightFacts(
        eps=eps, b=b, n_samples=n_samples,
        supp_chi_ok=supp_chi_ok, plateau_ok=plateau_ok,
        slope_band_ok=slope_band_ok, slope_floor_ok=slope_floor_ok,
        supp_deriv_ok=supp_deriv_ok, cover_ok=cover_ok,
        c2=c2, c3=c3, c2_plain=c2_plain,
        details={
            "max_chi1": float(chi1.max()),
            "min_inner_chi1": float(chi1[inner].min()) if inner.any() else None,
            "max_abs_chi2": float(np.abs(chi2).max()),
            "max_abs_chi3": float(np.abs(chi3).max()),
        },
    )
    if raise_on_failure and not facts.all_ok:
        failed = [k for k, v in facts.to_dict().items()
                  if k.endswith("_ok") and v is False]
        raise FactViolation(f"weight facts failed for eps={eps}, b={b}: {failed}")
    return facts
