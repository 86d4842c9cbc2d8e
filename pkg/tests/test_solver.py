import numpy as np
import pytest

from kplab.errors import BlowupDetected, NonZeroXMean
from kplab.spectral import Field, Grid, l2_norm, random_band_limited, x_mean_magnitude
from kplab.solver import (
    SolverConfig,
    Trajectory,
    evolve,
    evolve_backward_by_reflection,
    linear_symbol,
    nonlinear_rhs,
    reflect_x,
    step,
    suggest_dt,
)

from conftest import mode_field


class TestLinearSymbol:
    def test_values_on_integer_grid(self, grid64):
        sym = linear_symbol(grid64)
        assert sym[1, 0] == pytest.approx(1j)
        assert sym[1, 2] == pytest.approx(-3j)  # i(1 - 4)
        assert np.all(sym[0, :] == 0)  # zero-mode policy

    def test_purely_imaginary(self, grid128):
        sym = linear_symbol(grid128)
        assert np.abs(sym.real).max() == 0.0


class TestNonlinearRHS:
    def test_zero(self, grid64):
        assert np.abs(nonlinear_rhs(Field.zeros(grid64), 1).values).max() == 0.0

    def test_single_mode_closed_form(self, grid64):
        # u = sin(x): -d/dx(u^2/2) = -sin(x)cos(x) = -sin(2x)/2
        X, _ = grid64.meshgrid()
        u = Field.from_values(grid64, np.sin(X))
        n = nonlinear_rhs(u, 1)
        assert np.abs(n.values + 0.5 * np.sin(2 * X)).max() <= 1e-12

    def test_conservative_equals_pointwise(self, grid128, rng):
        # on 2/3-dealiased input, -d/dx(u^2)/2 (spectral) agrees with the
        # dealiased pointwise product -P[u u_x]
        import scipy.fft as sfft

        from kplab.spectral import dealias, dealias_field, partial_deriv

        u = dealias_field(random_band_limited(grid128, 40, rng))
        conservative = nonlinear_rhs(u, 1).values
        ux = partial_deriv(u, (1, 0)).values
        direct_hat = dealias(grid128, sfft.fft2(-u.values * ux))
        direct = sfft.ifft2(direct_hat).real
        scale = max(np.abs(conservative).max(), 1e-300)
        assert np.abs(conservative - direct).max() <= 1e-10 * scale

    def test_output_mean_free(self, grid64, rng):
        u = random_band_limited(grid64, 9, rng, zero_x_mean=False)
        n = nonlinear_rhs(u, 2)
        assert x_mean_magnitude(n) <= 1e-15


class TestStep:
    def test_linear_phase_exact(self, grid64):
        cfg = SolverConfig(grid64, dt=1e-2, t_end=1e-2, linear_only=True)
        u = mode_field(grid64, 1, 2)
        out = step(u, cfg)
        om = linear_symbol(grid64)[1, 2]
        got = out.hat[1, 2] / u.hat[1, 2]
        assert abs(got - np.exp(om * 1e-2)) <= 1e-14

    def test_zero_field(self, grid64):
        cfg = SolverConfig(grid64, dt=1e-2, t_end=1e-2)
        assert np.abs(step(Field.zeros(grid64), cfg).values).max() == 0.0


class TestEvolve:
    def test_t_end_zero(self, grid64, rng):
        u0 = random_band_limited(grid64, 8, rng)
        traj = evolve(u0, SolverConfig(grid64, dt=1e-2, t_end=0.0))
        assert len(traj.times) == 1 and traj.times[0] == 0.0
        assert np.array_equal(traj.fields[0].values, u0.values)

    def test_linear_packet_l2_conserved(self, grid64, rng):
        u0 = random_band_limited(grid64, 8, rng)
        traj = evolve(u0, SolverConfig(grid64, dt=1e-3, t_end=0.3, linear_only=True),
                      sample_count=5)
        assert traj.l2_drift() <= 1e-10

    def test_full_linear_phase_over_unit_time(self, grid64):
        # integrating factor is exact on the linear flow: only round-off
        # accumulates over the 4000 steps
        u0 = mode_field(grid64, 2, 1)
        cfg = SolverConfig(grid64, dt=2.5e-4, t_end=1.0, linear_only=True)
        traj = evolve(u0, cfg, sample_count=2)
        om = linear_symbol(grid64)[2, 1]
        got = traj.fields[-1].hat[2, 1] / u0.hat[2, 1]
        assert abs(got - np.exp(om)) <= 1e-12

    def test_zero_x_mean_invariant(self, grid64, rng):
        u0 = random_band_limited(grid64, 8, rng, rms=0.5)

        seen = []

        def obs(t, f):
            seen.append(x_mean_magnitude(f))

        evolve(u0, SolverConfig(grid64, dt=1e-3, t_end=0.05), observers=[obs])
        assert max(seen) <= 1e-14

    def test_rejects_nonzero_xmean(self, grid64):
        _, Y = grid64.meshgrid()
        bad = Field.from_values(grid64, 0.5 + 0.1 * np.cos(Y))
        with pytest.raises(NonZeroXMean):
            evolve(bad, SolverConfig(grid64, dt=1e-3, t_end=0.01))

    def test_blowup_detected(self, grid64):
        # gradient steepening with a tiny blowup factor must trip
        X, _ = grid64.meshgrid()
        u0 = Field.from_values(grid64, np.sin(X))
        cfg = SolverConfig(grid64, dt=1e-3, t_end=0.5, blowup_factor=1.0 + 1e-9)
        with pytest.raises(BlowupDetected) as exc:
            evolve(u0, cfg)
        assert exc.value.t > 0

    def test_sampling_includes_endpoints(self, grid64, rng):
        u0 = random_band_limited(grid64, 6, rng)
        traj = evolve(u0, SolverConfig(grid64, dt=1e-3, t_end=0.1), sample_count=7)
        assert traj.times[0] == 0.0
        assert traj.times[-1] == pytest.approx(0.1, abs=1e-12)
        assert len(traj.times) == 7

    def test_backward_times_increasing(self, grid64, rng):
        u0 = random_band_limited(grid64, 6, rng, rms=0.2)
        traj = evolve(u0, SolverConfig(grid64, dt=1e-3, t_end=-0.05), sample_count=5)
        assert np.all(np.diff(traj.times) > 0)
        assert traj.times[0] == pytest.approx(-0.05)
        # the t = 0 slice is the initial data (up to transform round-off)
        assert np.abs(traj.fields[-1].values - u0.values).max() <= 1e-14


class TestAccuracy:
    @pytest.mark.parametrize("scheme", ["ifrk4", "etdrk4"])
    def test_self_convergence_order(self, scheme, rng):
        g = Grid(64, 64, 2 * np.pi, 2 * np.pi)
        u0 = random_band_limited(g, 8, rng, rms=0.5)
        ref = evolve(u0, SolverConfig(g, dt=6.25e-5, t_end=0.1, scheme=scheme),
                     sample_count=2).fields[-1]
        errs = []
        for dt in (1e-3, 5e-4):
            got = evolve(u0, SolverConfig(g, dt=dt, t_end=0.1, scheme=scheme),
                         sample_count=2).fields[-1]
            errs.append(np.abs(got.values - ref.values).max())
        order = np.log2(errs[0] / errs[1])
        assert order >= 3.7

    def test_linear_time_reversal(self, grid64, rng):
        u0 = random_band_limited(grid64, 8, rng)
        fwd = evolve(u0, SolverConfig(grid64, dt=1e-3, t_end=0.1, linear_only=True),
                     sample_count=2).fields[-1]
        back = evolve(fwd, SolverConfig(grid64, dt=1e-3, t_end=-0.1, linear_only=True),
                      sample_count=2).fields[0]
        assert np.abs(back.values - u0.values).max() <= 1e-12

    def test_nonlinear_roundtrip_scales_as_dt4(self, rng):
        g = Grid(64, 64, 2 * np.pi, 2 * np.pi)
        u0 = random_band_limited(g, 8, rng, rms=0.5)

        def roundtrip_error(dt):
            fwd = evolve(u0, SolverConfig(g, dt=dt, t_end=0.1), sample_count=2).fields[-1]
            back = evolve(fwd, SolverConfig(g, dt=dt, t_end=-0.1), sample_count=2).fields[0]
            return np.abs(back.values - u0.values).max()

        e1, e2 = roundtrip_error(1e-3), roundtrip_error(5e-4)
        assert np.log2(e1 / e2) >= 3.0

    def test_l2_conservation_nonlinear(self, rng):
        g = Grid(64, 64, 2 * np.pi, 2 * np.pi)
        u0 = random_band_limited(g, 8, rng, rms=0.5)
        traj = evolve(u0, SolverConfig(g, dt=2.5e-4, t_end=0.25), sample_count=5)
        assert traj.l2_drift() <= 1e-7


class TestBackwardPaths:
    def test_reflection_involution(self, grid64, rng):
        f = random_band_limited(grid64, 8, rng)
        assert np.array_equal(reflect_x(reflect_x(f)).values, f.values)

    def test_backward_matches_reflection_path(self, grid64, rng):
        u0 = random_band_limited(grid64, 8, rng, rms=0.3)
        cfg = SolverConfig(grid64, dt=1e-3, t_end=-0.1)
        direct = evolve(u0, cfg, sample_count=3)
        mirrored = evolve_backward_by_reflection(u0, cfg, sample_count=3)
        assert np.allclose(direct.times, mirrored.times, atol=1e-12)
        err = np.abs(direct.fields[0].values - mirrored.fields[0].values).max()
        assert err <= 1e-11


class TestMisc:
    def test_suggest_dt_positive(self, grid128):
        dt = suggest_dt(grid128)
        assert 0 < dt < 1.0

    def test_trajectory_field_lookup(self, grid64, rng):
        u0 = random_band_limited(grid64, 6, rng)
        traj = evolve(u0, SolverConfig(grid64, dt=1e-2, t_end=0.1))
        f = traj.field_at(0.05)
        assert l2_norm(f) > 0
        with pytest.raises(KeyError):
            traj.field_at(0.0512)

    def test_trajectory_validation(self, grid64):
        with pytest.raises(ValueError):
            Trajectory(grid=grid64, times=np.array([0.0, 0.0]),
                       fields=[Field.zeros(grid64), Field.zeros(grid64)],
                       l2=np.zeros(2))

    def test_config_validation(self, grid64):
        with pytest.raises(ValueError):
            SolverConfig(grid64, dt=-1e-3, t_end=1.0)
        with pytest.raises(ValueError):
            SolverConfig(grid64, dt=1e-3, t_end=1.0, scheme="euler")
        with pytest.raises(ValueError):
            SolverConfig(grid64, dt=1e-3, t_end=1.0, p=0)
        with pytest.raises(ValueError):
            SolverConfig(grid64, dt=1e-2, t_end=1e-3)

    def test_gkp_power_two_runs(self, grid64, rng):
        u0 = random_band_limited(grid64, 6, rng, rms=0.3)
        traj = evolve(u0, SolverConfig(grid64, dt=1e-3, t_end=0.05, p=2),
                      sample_count=3)
        assert traj.l2_drift() <= 1e-6
