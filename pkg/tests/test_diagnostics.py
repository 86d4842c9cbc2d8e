import numpy as np
import pytest
import scipy.fft as sfft

from kplab.datagen import DataSpec, smooth_packet
from kplab.diagnostics import (
    BracketSpec,
    bracket,
    bracket_series,
    certify_max_ratio,
    energy_identity_residual,
    gn6_check,
    gn_check,
    gronwall_envelope,
    propagation_functional,
    smoothing_integrals,
    time_integral,
    x_weighted_square,
    _xfun_weight,
)
from kplab.errors import ProbeOutOfRange
from kplab.solver import SolverConfig, evolve
from kplab.spectral import (
    Field,
    Grid,
    antiderivative_x,
    l2_norm,
    partial_deriv,
    random_band_limited,
)
from kplab.weights import make_weight

from conftest import mode_field


def packet(grid, amp=0.5, center=(6.0, 0.0), width=(1.0, 1.0), x_order=1):
    return smooth_packet(grid, DataSpec(kind="smooth_packet", amplitude=amp,
                                        center=center, width=width,
                                        x_order=x_order))


def structured_run(grid, t_end=0.06, dt=5e-4, linear_only=False, amp=12.0):
    """Trajectory whose dx^{-1}-derived fields stay box-localized: the datum
    is a third x-derivative, keeping low-xi content (and hence the weighted
    identity's seam sensitivity) suppressed."""
    X, Y = grid.meshgrid()
    H = amp * np.exp(-((X - 0.75) ** 2) / (2 * 4.0) - Y**2 / (2 * 4.0))
    mult = (1j * grid.kx) ** 3
    mult[grid.nx // 2] = 0
    u0 = Field.from_spectral(grid, sfft.fft2(H) * mult[:, None])
    return evolve(u0, SolverConfig(grid, dt=dt, t_end=t_end, linear_only=linear_only))


class TestBracket:
    def test_zero_field(self, grid128):
        w = make_weight(0.25, 1.25, nu=1.0)
        for kind in ("plain", "prime", "double_prime"):
            assert bracket(Field.zeros(grid128), BracketSpec((2, 0), kind, w)) == 0.0

    def test_plateau_surrogate_recovers_l2(self, grid128):
        # weight ramp far to the left of the field support: chi == 1 there
        w = make_weight(0.01, 0.05)
        u = packet(grid128, amp=0.5, center=(6.0, 0.0), width=(0.8, 0.8))
        val = bracket(u, BracketSpec((0, 0), "plain", w))
        assert val == pytest.approx(l2_norm(u) ** 2, rel=1e-10)

    def test_support_left_of_weight_vanishes(self, grid128):
        w = make_weight(0.25, 1.25)
        u = packet(grid128, amp=0.5, center=(-8.0, 0.0), width=(0.8, 0.8))
        val = bracket(u, BracketSpec((0, 0), "plain", w))
        assert val <= 1e-12 * l2_norm(u) ** 2

    def test_minus13_composition_consistency(self, grid128, rng):
        w = make_weight(0.25, 1.25, nu=1.0)
        u = random_band_limited(grid128, 12, rng)
        v1 = bracket(u, BracketSpec((-1, 3), "plain", w), t=0.3)
        g = antiderivative_x(partial_deriv(u, (0, 3)))
        v2 = x_weighted_square(g, _xfun_weight(w, 0, 0.3))
        assert v1 == pytest.approx(v2, rel=1e-12)

    def test_monotone_in_weight(self, grid128, rng):
        # chi_{eps/5, eps} >= chi_{eps, b} pointwise, so every plain bracket
        # is monotone under that replacement
        u = random_band_limited(grid128, 10, rng)
        w = make_weight(0.25, 1.25)
        wcov = make_weight(0.05, 0.25)
        for alpha in ((0, 0), (1, 1), (2, 0)):
            a = bracket(u, BracketSpec(alpha, "plain", w))
            b = bracket(u, BracketSpec(alpha, "plain", wcov))
            assert b >= a - 1e-12

    def test_shifted_weight(self, grid128):
        # the profile translates left by nu t: a packet initially left of the
        # ramp acquires full weight once the transition has passed it
        w = make_weight(0.25, 1.25, nu=1.0)
        u = packet(grid128, amp=0.3, center=(-3.0, 0.0), width=(0.5, 0.5))
        early = bracket(u, BracketSpec((0, 0), "plain", w), t=0.0)
        late = bracket(u, BracketSpec((0, 0), "plain", w), t=6.0)
        assert early <= 1e-8 * late
        assert late == pytest.approx(l2_norm(u) ** 2, rel=1e-6)

    def test_nonnegative_on_random_fields(self, grid128, rng):
        w = make_weight(0.25, 1.25)
        for _ in range(5):
            u = random_band_limited(grid128, 10, rng)
            for kind in ("plain", "prime", "double_prime"):
                assert bracket(u, BracketSpec((1, 1), kind, w)) >= 0.0

    def test_spec_validation(self):
        w = make_weight(0.25, 1.25)
        with pytest.raises(ValueError):
            BracketSpec((0, 1), "primed", w)
        with pytest.raises(ValueError):
            BracketSpec((-1, 3), "double_prime", w)  # composed index (-2,4)


class TestEnergyIdentity:
    def test_zero_trajectory(self, grid64):
        z = Field.zeros(grid64)
        traj = evolve(z, SolverConfig(grid64, dt=1e-3, t_end=0.02))
        w = make_weight(0.25, 1.25, nu=1.0)
        et = energy_identity_residual(traj, BracketSpec((0, 0), "plain", w),
                                      0.01, 5e-3)
        assert et.residual == pytest.approx(0.0, abs=1e-14)
        assert et.a1 == et.a2 == et.a3 == et.a4 == et.a5 == 0.0

    def test_linear_flow_residual_converges(self):
        # probe halving gives the dt_probe^2 decrease once the quadrature is
        # refined enough; coarse quadrature leaves a plateau that refining
        # the oversampling removes
        g = Grid(128, 128, 32.0, 32.0)
        traj = structured_run(g, linear_only=True)
        w = make_weight(0.25, 1.25, nu=1.0)
        spec = BracketSpec((0, 0), "plain", w)
        r1 = energy_identity_residual(traj, spec, 0.03, 0.02, oversample=16).residual_rel
        r2 = energy_identity_residual(traj, spec, 0.03, 0.01, oversample=16).residual_rel
        assert r2 <= 1e-3
        assert r1 / r2 >= 3.0
        plateau = energy_identity_residual(traj, spec, 0.03, 0.01, oversample=2).residual_rel
        assert plateau / r2 >= 5.0
        # A5 is omitted on linear-only trajectories
        assert energy_identity_residual(traj, spec, 0.03, 0.01).a5 == 0.0

    def test_nonlinear_residual_small(self):
        g = Grid(128, 128, 32.0, 32.0)
        traj = structured_run(g)
        w = make_weight(0.25, 1.25, nu=1.0)
        for alpha in ((2, 0), (1, 1)):
            et = energy_identity_residual(traj, BracketSpec(alpha, "plain", w),
                                          0.03, 5e-3)
            assert et.residual_rel <= 2e-3
            assert et.a3 >= 0 and et.a4 >= 0

    def test_probe_out_of_range(self, grid64, rng):
        u = random_band_limited(grid64, 6, rng, rms=0.2)
        traj = evolve(u, SolverConfig(grid64, dt=1e-3, t_end=0.02))
        w = make_weight(0.25, 1.25)
        with pytest.raises(ProbeOutOfRange):
            energy_identity_residual(traj, BracketSpec((0, 0), "plain", w),
                                     0.01, 0.5)

    def test_requires_plain_nonnegative_alpha(self, grid64, rng):
        u = random_band_limited(grid64, 6, rng, rms=0.2)
        traj = evolve(u, SolverConfig(grid64, dt=1e-3, t_end=0.02))
        w = make_weight(0.25, 1.25)
        with pytest.raises(ValueError):
            energy_identity_residual(traj, BracketSpec((0, 0), "prime", w), 0.01, 1e-3)
        with pytest.raises(ValueError):
            energy_identity_residual(traj, BracketSpec((-1, 3), "plain", w), 0.01, 1e-3)


class TestGN:
    def test_zero_field(self, grid64):
        w = make_weight(0.25, 1.25)
        assert gn_check(Field.zeros(grid64), w) == 0.0
        assert gn6_check(Field.zeros(grid64)) == 0.0

    def test_support_left_of_weight(self, grid128):
        # exactly supported left of eps: the weighted fourth moment vanishes
        # identically, so the ratio is 0 (no oversampling: interpolating a
        # truncated field would smear ring-level junk onto the support)
        w = make_weight(0.25, 1.25)
        u = packet(grid128, center=(-8.0, 0.0), width=(0.8, 0.8))
        X, _ = grid128.meshgrid()
        cut = Field.from_values(grid128, np.where(X < -2.0, u.values, 0.0))
        assert gn_check(cut, w, oversample=1) == 0.0

    def test_gn6_single_mode_closed_form(self):
        # f = sin(xi x): int f^6 = (5/16) lx ly, int f^2 = lx ly / 2,
        # int |grad f|^2 = xi^2 lx ly / 2 -> ratio (5/2) / (xi^4 (lx ly)^2)
        g = Grid(128, 128, 32.0, 32.0)
        f = mode_field(g, 4, 0, kind="sin")
        xi = 2 * np.pi * 4 / g.lx
        expect = 2.5 / (xi**4 * (g.lx * g.ly) ** 2)
        assert gn6_check(f) == pytest.approx(expect, rel=1e-8)

    def test_gn6_zero_denominator_flagged(self, grid64):
        with pytest.raises(ArithmeticError):
            gn6_check(Field.from_values(grid64, np.ones((64, 64))))

    def test_empirical_constants_refinement_stable(self, rng):
        w = make_weight(0.1, 1.0)
        g1 = Grid(64, 64, 16.0, 16.0)
        g2 = Grid(128, 128, 16.0, 16.0)
        from kplab.spectral import refine_field

        fields1 = [random_band_limited(g1, 8, np.random.default_rng(100 + i))
                   for i in range(20)]
        fields2 = [refine_field(f, g2) for f in fields1]
        for check in (lambda f: gn_check(f, w), gn6_check):
            c1 = certify_max_ratio(fields1, check)
            c2 = certify_max_ratio(fields2, check)
            assert np.isfinite(c1) and c1 > 0
            assert abs(c1 - c2) / c2 <= 0.10


class TestSmoothingAndFunctional:
    def test_zero_trajectory(self, grid64):
        traj = evolve(Field.zeros(grid64), SolverConfig(grid64, dt=1e-3, t_end=0.02))
        w = make_weight(0.25, 1.25, nu=1.0)
        sm = smoothing_integrals(traj, (0, 0), w)
        assert sm.prime_integral == 0.0 and sm.dprime_integral == 0.0

    def test_needs_20_samples(self, grid64, rng):
        u = random_band_limited(grid64, 6, rng, rms=0.2)
        traj = evolve(u, SolverConfig(grid64, dt=1e-3, t_end=0.01))
        with pytest.raises(ValueError):
            smoothing_integrals(traj, (0, 0), make_weight(0.25, 1.25))

    def test_chaining_matches_a1_of_next_case(self):
        # int [a]' dt computed from the prime series equals the recomputed
        # int |A1^(a1+1,a2)| dt / (nu/2): the same integral by definition
        g = Grid(128, 128, 32.0, 32.0)
        traj = structured_run(g, amp=6.0)
        w = make_weight(0.25, 1.25, nu=1.0)
        sm = smoothing_integrals(traj, (0, 0), w)
        a1series = []
        for t, f in zip(traj.times, traj.fields):
            walpha = partial_deriv(f, (1, 0))
            a1 = -0.5 * w.nu * x_weighted_square(walpha, _xfun_weight(w, 1, t), 2)
            a1series.append(abs(a1))
        recomputed = np.trapezoid(a1series, traj.times) / (w.nu / 2)
        assert sm.prime_integral == pytest.approx(recomputed, rel=1e-10)

    def test_time_sampling_stability_flag(self):
        g = Grid(128, 128, 32.0, 32.0)
        traj = structured_run(g, t_end=0.05, amp=6.0)
        w = make_weight(0.25, 1.25, nu=1.0)
        sm = smoothing_integrals(traj, (1, 1), w)
        assert sm.prime_stable and sm.dprime_stable
        assert np.isfinite(sm.prime_integral) and np.isfinite(sm.dprime_integral)

    def test_functional_empty_window(self, grid128, rng):
        u = random_band_limited(grid128, 8, rng, rms=0.3)
        traj = evolve(u, SolverConfig(grid128, dt=1e-3, t_end=0.05), sample_count=21)
        fn = propagation_functional(traj, 3, 0.0, grid128.lx, 0.0)
        assert fn.sup == 0.0

    def test_functional_smooth_matches_global(self, grid128):
        u = packet(grid128, amp=0.3, center=(0.0, 0.0), width=(2.0, 2.0))
        traj = evolve(u, SolverConfig(grid128, dt=1e-3, t_end=0.0))
        fn = propagation_functional(traj, 3, 0.0, 0.25, 1.0)
        from kplab.spectral import windowed_derivative_sum

        # window covers nearly the whole packet once moved far left
        full = windowed_derivative_sum(u, 3, grid128.x[0] - 1)
        window0 = windowed_derivative_sum(u, 3, 0.25)
        assert fn.values[0] == pytest.approx(window0, rel=1e-12)
        assert window0 < full

    def test_functional_clip_flag(self, grid128, rng):
        u = random_band_limited(grid128, 8, rng, rms=0.3)
        traj = evolve(u, SolverConfig(grid128, dt=1e-3, t_end=0.05), sample_count=21)
        fn = propagation_functional(traj, 3, grid128.x[0] + 0.01, 0.0, 1.0)
        assert fn.window_clipped.any()


class TestSeriesAndGronwall:
    def test_series_flags_and_nonnegativity(self, grid128, rng):
        u = random_band_limited(grid128, 10, rng, rms=0.3)
        traj = evolve(u, SolverConfig(grid128, dt=1e-3, t_end=0.05), sample_count=21)
        w = make_weight(0.25, 1.25, nu=1.0)
        s = bracket_series(traj, BracketSpec((1, 1), "plain", w))
        assert np.all(s.values >= 0)
        assert not s.wrapped.any()
        # a weight whose ramp exits the box must flag every sample
        wbad = make_weight(1.0, 40.0)
        s2 = bracket_series(traj, BracketSpec((0, 0), "plain", wbad))
        assert s2.wrapped.all() and s2.contaminated

    def test_time_integral_halving(self):
        t = np.linspace(0, 1, 41)
        v = np.exp(-t)
        val, stable = time_integral(t, v)
        assert stable
        assert val == pytest.approx(1 - np.exp(-1.0), rel=1e-3)

    def test_gronwall_envelope_exponential(self):
        t = np.linspace(0, 1, 50)
        s = 2.0 * np.exp(1.3 * t)
        fit = gronwall_envelope(t, s)
        assert fit.bounded
        assert fit.c_fit == pytest.approx(1.3, abs=1e-6)

    def test_gronwall_detects_burst(self):
        t = np.linspace(0, 1, 50)
        s = np.exp(0.1 * t)
        s[30:] *= 50.0  # sudden jump: local slope far above the global fit
        fit = gronwall_envelope(t, s)
        assert not fit.bounded
