"""Weighted-energy diagnostics: brackets, the energy identity, smoothing
integrals, Gagliardo-Nirenberg certifiers and the moving-window functional.

Bracket notation, for a multi-index alpha and weight chi = chi_{eps,b}(x + nu t):

    plain        [a1,a2]   = integral (d^alpha u)^2            chi
    prime        [a1,a2]'  = integral (dx d^alpha u)^2         chi'
    double prime [a1,a2]'' = integral (d^alpha dx^{-1} dy u)^2 chi'

The prime/double-prime brackets, integrated in time, express the local
(Kato-type) smoothing gained by the evolution; the plain brackets are the
Gronwall-controlled quantities.

Differentiating a plain bracket along the flow and integrating by parts
yields the energy identity

    1/2 d/dt [alpha] + A1 + A2 + 3/2 A3 + 1/2 A4 + A5 = 0,

    A1 = -nu/2 * integral (d^alpha u)^2 chi'
    A2 = -1/2  * integral (d^alpha u)^2 chi'''
    A3 =         integral (dx d^alpha u)^2 chi'          (>= 0)
    A4 =         integral (d^alpha dx^{-1} dy u)^2 chi'  (>= 0)
    A5 =         integral d^alpha(u^p u_x) d^alpha u chi

which :func:`energy_identity_residual` verifies against a centered time
difference of stored trajectory samples.  The time derivative is formed
from the samples rather than re-derived from the equation, so the residual
is an independent check of the identity.

Quadratures are trapezoidal sums on the periodic grid with optional exact
spectral x-oversampling of the fields; the weight is always evaluated in
closed form at the fine nodes, so oversampling drives the only quadrature
error (beyond-Nyquist content of field products times the weight) down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import ProbeOutOfRange
from .solver import Trajectory
from .spectral import (
    Field,
    Grid,
    MultiIndex,
    apply_alpha,
    dealias,
    oversample_x,
    partial_deriv,
    sharp_window_integral,
    windowed_derivative_sum,
)
from .weights import WeightSpec, eval_weight

KINDS = ("plain", "prime", "double_prime")
DEFAULT_OVERSAMPLE = 2


@dataclass(frozen=True)
class BracketSpec:
    """One monitored bracket: multi-index, kind and weight (with speed nu)."""

    alpha: MultiIndex
    kind: str
    weight: WeightSpec

    def __post_init__(self):
        object.__setattr__(self, "alpha", MultiIndex.coerce(self.alpha))
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        a1, a2 = self.alpha.a1, self.alpha.a2
        if self.kind == "double_prime":
            MultiIndex(a1 - 1, a2 + 1)  # composed index must be admissible
        if self.kind == "prime":
            MultiIndex(a1 + 1, a2)

    def derived_index(self) -> MultiIndex:
        a1, a2 = self.alpha.a1, self.alpha.a2
        if self.kind == "plain":
            return self.alpha
        if self.kind == "prime":
            return MultiIndex(a1 + 1, a2)
        return MultiIndex(a1 - 1, a2 + 1)

    def label(self) -> str:
        mark = {"plain": "", "prime": "'", "double_prime": "''"}[self.kind]
        return f"[{self.alpha.a1},{self.alpha.a2}]{mark}"


def _xfun_weight(w: WeightSpec, d: int, t: float):
    shift = w.nu * t

    def f(x):
        return np.asarray(eval_weight(w, x + shift, d))

    return f


def x_weighted_product(g1: Field, g2: Field, xfun, oversample: int = DEFAULT_OVERSAMPLE) -> float:
    """integral g1 * g2 * xfun(x) over the box, with exact x-oversampling."""
    v1, xf = oversample_x(g1, oversample)
    v2 = v1 if g2 is g1 else oversample_x(g2, oversample)[0]
    wrow = xfun(xf)
    g = g1.grid
    dA = g.lx * g.ly / (v1.shape[0] * v1.shape[1])
    return float(np.sum(v1 * v2 * wrow[:, None]) * dA)


def x_weighted_square(gf: Field, xfun, oversample: int = DEFAULT_OVERSAMPLE) -> float:
    return x_weighted_product(gf, gf, xfun, oversample)


def bracket(u: Field, spec: BracketSpec, t: float = 0.0,
            oversample: int = DEFAULT_OVERSAMPLE) -> float:
    """Evaluate one bracket at time t; nonnegative by construction.

    The double-prime kind propagates NonZeroXMean on fields outside the
    admissible class.
    """
    gfield = apply_alpha(u, spec.derived_index())
    d = 0 if spec.kind == "plain" else 1
    val = x_weighted_square(gfield, _xfun_weight(spec.weight, d, t), oversample)
    return max(val, 0.0)


def _bracket_with_resolution(u: Field, spec: BracketSpec, t: float,
                             oversample: int, frac_tol: float = 0.01
                             ) -> tuple[float, bool]:
    """Bracket value plus an unresolved flag.

    The flag compares the bracket against its value with the top third of
    the derived field's modes removed: when those modes move the weighted
    integral by more than frac_tol, the quantity depends on barely-resolved
    content and is marked contaminated.  Measuring on the weighted integral
    (not the global spectrum) keeps brackets clean when the weight excludes
    an under-resolved region.
    """
    gfield = apply_alpha(u, spec.derived_index())
    d = 0 if spec.kind == "plain" else 1
    xfun = _xfun_weight(spec.weight, d, t)
    val = x_weighted_square(gfield, xfun, oversample)
    low = Field.from_spectral(u.grid, dealias(u.grid, gfield.hat))
    val_low = x_weighted_square(low, xfun, oversample)
    ref = max(abs(val), 1e-300)
    return max(val, 0.0), abs(val - val_low) / ref > frac_tol


@dataclass
class BracketSeries:
    """Time series of one bracket along a trajectory, with contamination flags."""

    spec: BracketSpec
    times: np.ndarray
    values: np.ndarray
    wrapped: np.ndarray    # weight transition region leaves the box
    res_warn: np.ndarray   # derivative under-resolved on the grid

    @property
    def contaminated(self) -> bool:
        return bool(self.wrapped.any() or self.res_warn.any())

    def sup(self) -> float:
        return float(self.values.max())

    def rows(self):
        for t, v, wfl, rfl in zip(self.times, self.values, self.wrapped, self.res_warn):
            yield t, v, int(wfl or rfl)


def bracket_series(traj: Trajectory, spec: BracketSpec,
                   oversample: int = DEFAULT_OVERSAMPLE,
                   check_resolution: bool = True) -> BracketSeries:
    from .weights import weight_profile

    times = traj.times
    values = np.empty(len(times))
    wrapped = np.zeros(len(times), dtype=bool)
    res = np.zeros(len(times), dtype=bool)
    for i, (t, f) in enumerate(zip(times, traj.fields)):
        if check_resolution:
            values[i], res[i] = _bracket_with_resolution(f, spec, t, oversample)
        else:
            values[i] = bracket(f, spec, t, oversample)
        wrapped[i] = weight_profile(spec.weight, traj.grid, t).wrapped
    return BracketSeries(spec=spec, times=times.copy(), values=values,
                         wrapped=wrapped, res_warn=res)


# ---------------------------------------------------------------------------
# energy identity
# ---------------------------------------------------------------------------

@dataclass
class EnergyTerms:
    """The five integrals of the energy identity at one time, plus residual."""

    t: float
    alpha: tuple
    probe: float
    a1: float
    a2: float
    a3: float
    a4: float
    a5: float
    ddt_bracket: float
    residual: float
    residual_rel: float

    def __post_init__(self):
        if self.a3 < 0 or self.a4 < 0:
            raise AssertionError("A3 and A4 are integrals of squares against chi' >= 0")

    def to_dict(self) -> dict:
        return {
            "t": self.t, "alpha": list(self.alpha), "probe": self.probe,
            "a1": self.a1, "a2": self.a2, "a3": self.a3, "a4": self.a4,
            "a5": self.a5, "ddt_bracket": self.ddt_bracket,
            "residual": self.residual, "residual_rel": self.residual_rel,
        }


def _nonlinear_product(u: Field, p: int, use_dealias: bool) -> Field:
    """u^p u_x = d/dx(u^{p+1})/(p+1) with the product formed as the solver
    forms it (dealiased), so the identity is checked for the system that was
    actually evolved."""
    g = u.grid
    w = u.values ** (p + 1) / (p + 1)
    what = sfft.fft2(w)
    if use_dealias:
        what = dealias(g, what)
    mult = 1j * g.kx
    mult[g.nx // 2] = 0.0
    return Field.from_spectral(g, what * mult[:, None])


def energy_identity_residual(traj: Trajectory, spec: BracketSpec, t: float,
                             dt_probe: float, oversample: int = 8) -> EnergyTerms:
    """Evaluate the energy identity at time t with a centered probe.

    Requires stored samples at t - dt_probe, t and t + dt_probe (else
    ProbeOutOfRange) and a plain-kind spec with alpha_1 >= 0.  The relative
    residual is measured against the largest participating term.
    """
    if spec.kind != "plain":
        raise ValueError("energy identity applies to plain brackets")
    alpha = spec.alpha
    if alpha.a1 < 0:
        raise ValueError("energy identity requires alpha_1 >= 0")
    w = spec.weight
    try:
        um = traj.field_at(t - dt_probe)
        uc = traj.field_at(t)
        up = traj.field_at(t + dt_probe)
    except KeyError as e:
        raise ProbeOutOfRange(str(e)) from None

    bm = bracket(um, spec, t - dt_probe, oversample)
    bp = bracket(up, spec, t + dt_probe, oversample)
    ddt = (bp - bm) / (2 * dt_probe)

    walpha = apply_alpha(uc, alpha)
    a1 = -0.5 * w.nu * x_weighted_square(walpha, _xfun_weight(w, 1, t), oversample)
    a2 = -0.5 * x_weighted_square(walpha, _xfun_weight(w, 3, t), oversample)
    a3 = x_weighted_square(
        apply_alpha(uc, (alpha.a1 + 1, alpha.a2)), _xfun_weight(w, 1, t), oversample)
    a4 = x_weighted_square(
        apply_alpha(uc, (alpha.a1 - 1, alpha.a2 + 1)), _xfun_weight(w, 1, t), oversample)

    meta = traj.meta or {}
    if meta.get("linear_only", False):
        a5 = 0.0
    else:
        p = int(meta.get("p", 1))
        nl = _nonlinear_product(uc, p, bool(meta.get("dealias", True)))
        a5 = x_weighted_product(
            partial_deriv(nl, alpha.as_tuple()), walpha,
            _xfun_weight(w, 0, t), oversample)

    residual = 0.5 * ddt + a1 + a2 + 1.5 * a3 + 0.5 * a4 + a5
    scale = max(abs(0.5 * ddt), abs(a1), abs(a2), abs(1.5 * a3), abs(0.5 * a4),
                abs(a5), 1e-300)
    return EnergyTerms(
        t=t, alpha=alpha.as_tuple(), probe=dt_probe,
        a1=a1, a2=a2, a3=max(a3, 0.0), a4=max(a4, 0.0), a5=a5,
        ddt_bracket=ddt, residual=residual, residual_rel=abs(residual) / scale,
    )


# ---------------------------------------------------------------------------
# Gagliardo-Nirenberg certifiers
# ---------------------------------------------------------------------------

def gn_check(f: Field, w: WeightSpec, t: float = 0.0,
             oversample: int = DEFAULT_OVERSAMPLE) -> float:
    """Ratio LHS/RHS of the weighted inequality

        (integral f^4 chi^2)^{1/2}
            <= c [ integral f^2 chi + (dx f)^2 chi + (dy f)^2 chi + f^2 chi' ].

    Zero field returns 0; a certifier takes the max over a field family as
    the empirical constant.
    """
    sq = Field.from_values(f.grid, f.values**2)

    def chi2(x):
        c = np.asarray(eval_weight(w, x + w.nu * t, 0))
        return c * c

    lhs_sq = x_weighted_square(sq, chi2, oversample)
    lhs = math.sqrt(max(lhs_sq, 0.0))
    chi0 = _xfun_weight(w, 0, t)
    chi1 = _xfun_weight(w, 1, t)
    rhs = (
        x_weighted_square(f, chi0, oversample)
        + x_weighted_square(partial_deriv(f, (1, 0)), chi0, oversample)
        + x_weighted_square(partial_deriv(f, (0, 1)), chi0, oversample)
        + x_weighted_square(f, chi1, oversample)
    )
    # fields with (numerically) no mass on the weight support: both sides
    # are round-off junk and the ratio carries no information
    if rhs <= 1e-200 or lhs_sq <= 1e-200:
        return 0.0
    return lhs / rhs


def gn6_check(f: Field) -> float:
    """Ratio of the unweighted sixth-power inequality

        integral f^6 <= c (integral f^2) (integral |grad f|^2)^2.

    Returns 0 for the zero field; raises ArithmeticError on the impossible
    zero-denominator / nonzero-numerator combination.
    """
    g = f.grid
    v = f.values
    num = float(np.sum(v**6) * g.dA)
    m2 = float(np.sum(v**2) * g.dA)
    fx = partial_deriv(f, (1, 0)).values
    fy = partial_deriv(f, (0, 1)).values
    grad2 = float(np.sum(fx**2 + fy**2) * g.dA)
    denom = m2 * grad2**2
    if denom <= 0:
        if num <= 1e-300:
            return 0.0
        raise ArithmeticError("zero denominator with nonzero sixth moment")
    return num / denom


def certify_max_ratio(fields, check) -> float:
    """Empirical constant: max of ``check`` over a family of fields."""
    return max(check(f) for f in fields)


# ---------------------------------------------------------------------------
# smoothing integrals, moving-window functional, Gronwall envelope
# ---------------------------------------------------------------------------

@dataclass
class SmoothingResult:
    alpha: tuple
    prime_integral: float
    dprime_integral: float
    prime_stable: bool   # halving the time sampling moves the value <= 2%
    dprime_stable: bool
    n_samples: int

    def to_dict(self) -> dict:
        return {
            "alpha": list(self.alpha),
            "prime_integral": self.prime_integral,
            "dprime_integral": self.dprime_integral,
            "prime_stable": self.prime_stable,
            "dprime_stable": self.dprime_stable,
            "n_samples": self.n_samples,
        }


def time_integral(times: np.ndarray, values: np.ndarray) -> tuple[float, bool]:
    """Trapezoid in time plus a sampling-stability flag (full vs every-2nd)."""
    full = float(np.trapezoid(values, times))
    half = float(np.trapezoid(values[::2], times[::2]))
    ref = max(abs(full), 1e-300)
    return full, abs(full - half) / ref <= 0.02


def smoothing_integrals(traj: Trajectory, alpha, weight: WeightSpec,
                        oversample: int = DEFAULT_OVERSAMPLE) -> SmoothingResult:
    """Time-integrated prime and double-prime brackets over the trajectory.

    Finiteness of these integrals is the local-smoothing statement: the
    evolution gains one x-derivative (prime) and one dx^{-1} dy (double
    prime) locally in space, on time average.
    """
    if len(traj.times) < 20:
        raise ValueError("need at least 20 trajectory samples")
    alpha = MultiIndex.coerce(alpha)
    sp = bracket_series(traj, BracketSpec(alpha, "prime", weight), oversample,
                        check_resolution=False)
    sd = bracket_series(traj, BracketSpec(alpha, "double_prime", weight), oversample,
                        check_resolution=False)
    pi, ps = time_integral(sp.times, sp.values)
    di, ds = time_integral(sd.times, sd.values)
    return SmoothingResult(alpha=alpha.as_tuple(), prime_integral=pi,
                           dprime_integral=di, prime_stable=ps, dprime_stable=ds,
                           n_samples=len(traj.times))


@dataclass
class FunctionalSeries:
    """Moving sharp-window derivative sums sum_{|a|<=n} on x >= x0+eps-nu*t."""

    n: int
    x0: float
    eps: float
    nu: float
    times: np.ndarray
    values: np.ndarray
    window_clipped: np.ndarray  # window edge left the box: wrap contamination

    @property
    def sup(self) -> float:
        return float(self.values.max())

    @property
    def contaminated(self) -> bool:
        return bool(self.window_clipped.any())

    def rows(self):
        for t, v, c in zip(self.times, self.values, self.window_clipped):
            yield t, v, int(c)


def propagation_functional(traj: Trajectory, n: int, x0: float, eps: float,
                           nu: float) -> FunctionalSeries:
    """The moving-window functional of the propagation experiments:

        F(t) = sum_{|alpha| <= n, alpha_i >= 0}
               integral_{x >= x0 + eps - nu t} (d^alpha u)^2 dx dy,

    evaluated at every stored sample; the sup over samples is the bounded
    quantity the experiments test.  Empty windows give 0.
    """
    if n < 3:
        raise ValueError("n must be >= 3")
    g = traj.grid
    times = traj.times
    vals = np.empty(len(times))
    clipped = np.zeros(len(times), dtype=bool)
    for i, (t, f) in enumerate(zip(times, traj.fields)):
        a = x0 + eps - nu * t
        vals[i] = windowed_derivative_sum(f, n, a)
        clipped[i] = a < g.x[0]
    return FunctionalSeries(n=n, x0=x0, eps=eps, nu=nu, times=times.copy(),
                            values=vals, window_clipped=clipped)


@dataclass
class GronwallFit:
    c_fit: float        # global log-slope over the series
    max_local_slope: float
    margin: float
    bounded: bool

    def to_dict(self) -> dict:
        return {"c_fit": self.c_fit, "max_local_slope": self.max_local_slope,
                "margin": self.margin, "bounded": self.bounded}


def gronwall_envelope(times: np.ndarray, values: np.ndarray,
                      margin: float = 1.0) -> GronwallFit:
    """Empirical Gronwall check on a summed bracket series.

    Fits the end-to-end exponential rate c and verifies every local slope of
    log S stays below c + margin; the bound S(t) <= S(0) e^{ct} + ... cannot
    be asserted with the constants the estimates leave unspecified, so the
    bounded-log-slope form is what is recorded and tested.
    """
    v = np.maximum(values, 1e-300)
    logs = np.log(v)
    span = times[-1] - times[0]
    c_fit = float((logs[-1] - logs[0]) / span) if span > 0 else 0.0
    local = np.diff(logs) / np.diff(times)
    max_local = float(local.max()) if len(local) else 0.0
    return GronwallFit(c_fit=c_fit, max_local_slope=max_local, margin=margin,
                       bounded=max_local <= c_fit + margin)
