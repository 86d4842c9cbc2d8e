import numpy as np
import pytest

from kplab.datagen import (
    DataSpec,
    check_hypotheses,
    make_data,
    mollify_data,
    one_sided_rough,
    smooth_packet,
    spectral_tail_slope,
)
from kplab.errors import HypothesisFailed, NonZeroXMean, SpecInfeasible
from kplab.spectral import (
    Field,
    Grid,
    coarsen_field,
    sobolev_norm,
    windowed_derivative_sum,
    x_mean_magnitude,
)


def rough_spec(**kw) -> DataSpec:
    base = dict(kind="one_sided_rough", x0=0.0, gamma=2.1, x_s=-1.0,
                amplitude=0.5, center=(2.0, 0.0), width=(4.0, 4.0),
                sing_amplitude=1.0, sing_width=2.0)
    base.update(kw)
    return DataSpec(**base)


class TestSpecValidation:
    def test_gamma_must_exceed_two(self):
        with pytest.raises(ValueError):
            rough_spec(gamma=2.0)

    def test_xs_left_of_x0(self):
        with pytest.raises(ValueError):
            rough_spec(x_s=0.5)

    def test_json_roundtrip(self):
        spec = rough_spec(extra_packets=((0.1, 10.0, 0.0, 2.0, 2.0),))
        assert DataSpec.from_dict(spec.to_dict()) == spec


class TestSmoothPacket:
    def test_zero_amplitude(self, grid128):
        u = smooth_packet(grid128, DataSpec(kind="smooth_packet", amplitude=0.0))
        assert np.abs(u.values).max() == 0.0

    def test_mean_free(self, grid128):
        u = smooth_packet(grid128, DataSpec(kind="smooth_packet", amplitude=0.7,
                                            center=(3.0, 1.0), width=(2.0, 3.0)))
        assert x_mean_magnitude(u) <= 1e-14

    def test_norm_refinement_stable(self):
        spec = DataSpec(kind="smooth_packet", amplitude=0.5, center=(2.0, 0.0),
                        width=(3.0, 3.0))
        u1 = smooth_packet(Grid(128, 128, 32.0, 32.0), spec)
        u2 = smooth_packet(Grid(256, 256, 32.0, 32.0), spec)
        n1, n2 = sobolev_norm(u1, 3.0), sobolev_norm(u2, 3.0)
        assert abs(n1 - n2) / n2 <= 0.01

    def test_x_order_two_antiderivative_localized(self, grid128):
        from kplab.spectral import antiderivative_x

        spec = DataSpec(kind="smooth_packet", amplitude=0.5, center=(0.0, 0.0),
                        width=(2.0, 2.0), x_order=2)
        u = smooth_packet(grid128, spec)
        anti = antiderivative_x(u)
        # the antiderivative is itself a derivative of the envelope: it must
        # decay at the box edge instead of filling the box
        edge = np.abs(anti.values[0, :]).max()
        assert edge <= 1e-10 * np.abs(anti.values).max()


class TestOneSidedRough:
    def test_separation_enforced(self):
        g = Grid(64, 64, 32.0, 32.0)  # dx = 0.5, needs 2.0 separation
        with pytest.raises(SpecInfeasible):
            one_sided_rough(g, rough_spec(x_s=-1.0))

    def test_mean_free(self):
        g = Grid(256, 256, 32.0, 32.0)
        u = one_sided_rough(g, rough_spec())
        assert x_mean_magnitude(u) <= 1e-13

    def test_windowed_norms_stable_right_unstable_at_singularity(self):
        g = Grid(256, 256, 32.0, 32.0)
        u = one_sided_rough(g, rough_spec(gamma=2.1))
        c = coarsen_field(u)
        right_f = windowed_derivative_sum(u, 3, 0.0)
        right_c = windowed_derivative_sum(c, 3, 0.0)
        assert abs(right_f - right_c) / right_f <= 0.05
        sing_f = windowed_derivative_sum(u, 3, -2.0, 0.0)
        sing_c = windowed_derivative_sum(c, 3, -2.0, 0.0)
        assert sing_f / sing_c >= 1.5

    def test_tail_slope_tracks_gamma(self):
        # derived oracle: the x-profile rides |x - x_s|^gamma across the
        # singular line, so the y-averaged x-spectrum decays ~ |xi|^-(gamma+1)
        g = Grid(256, 256, 32.0, 32.0)
        for gamma in (2.1, 2.6):
            u = one_sided_rough(g, rough_spec(gamma=gamma, sing_amplitude=5.0))
            slope = spectral_tail_slope(u)
            assert slope == pytest.approx(-(gamma + 1.0), abs=0.3)

    def test_large_gamma_effectively_smooth(self):
        g = Grid(256, 256, 32.0, 32.0)
        u = one_sided_rough(g, rough_spec(gamma=12.0, sing_amplitude=1e-6))
        c = coarsen_field(u)
        sing_f = windowed_derivative_sum(u, 3, -2.0, 0.0)
        sing_c = windowed_derivative_sum(c, 3, -2.0, 0.0)
        assert abs(sing_f - sing_c) / sing_f <= 0.05

    def test_make_data_dispatch(self, grid128):
        spec = DataSpec(kind="smooth_packet")
        assert np.array_equal(make_data(grid128, spec).values,
                              smooth_packet(grid128, spec).values)


class TestMollify:
    def test_subgrid_identity(self, grid128, rng):
        from kplab.spectral import random_band_limited

        u = random_band_limited(grid128, 12, rng)
        m = mollify_data(u, 0.01)  # well below dx = 0.25
        assert np.abs(m.values - u.values).max() <= 1e-10

    def test_zero_preserved(self, grid128):
        assert np.abs(mollify_data(Field.zeros(grid128), 0.3).values).max() == 0.0

    def test_h21_error_decreasing(self):
        g = Grid(256, 256, 16.0, 16.0)  # dx = 1/16 resolves all three taus
        u = one_sided_rough(g, rough_spec(gamma=2.6, x_s=-1.0, center=(1.0, 0.0),
                                          width=(2.0, 2.0), sing_width=1.0))
        errs = []
        for tau in (0.4, 0.2, 0.1):
            m = mollify_data(u, tau)
            errs.append(sobolev_norm(Field.from_values(g, m.values - u.values), 2.1))
        assert errs[0] > errs[1] > errs[2] > 0

    def test_linearity(self, grid128, rng):
        from kplab.spectral import random_band_limited

        a = random_band_limited(grid128, 10, rng)
        b = random_band_limited(grid128, 10, rng)
        lhs = mollify_data(Field.from_values(grid128, 2 * a.values - 3 * b.values), 0.5)
        rhs = 2 * mollify_data(a, 0.5).values - 3 * mollify_data(b, 0.5).values
        assert np.abs(lhs.values - rhs).max() <= 1e-12

    def test_commutes_with_translation(self, grid128, rng):
        from kplab.spectral import random_band_limited

        u = random_band_limited(grid128, 10, rng)
        shifted = Field.from_values(grid128, np.roll(u.values, (3, -5), axis=(0, 1)))
        a = mollify_data(shifted, 0.5).values
        b = np.roll(mollify_data(u, 0.5).values, (3, -5), axis=(0, 1))
        assert np.abs(a - b).max() <= 1e-12

    def test_tau_positive(self, grid128):
        with pytest.raises(ValueError):
            mollify_data(Field.zeros(grid128), 0.0)

    def test_mean_preserved(self, grid128, rng):
        from kplab.spectral import random_band_limited

        u = random_band_limited(grid128, 10, rng, zero_x_mean=False)
        m = mollify_data(u, 0.8)
        assert np.mean(m.values) == pytest.approx(np.mean(u.values), abs=1e-14)


class TestCheckHypotheses:
    def test_smooth_passes(self):
        g = Grid(256, 256, 32.0, 32.0)
        u = smooth_packet(g, DataSpec(kind="smooth_packet", amplitude=0.5,
                                      center=(6.0, 0.0), width=(2.8, 2.8)))
        rep = check_hypotheses(u, 0.0, 3, 2.1)
        assert rep.ok
        assert rep.global_hn.stable

    def test_rough_passes_windowed_fails_global(self):
        g = Grid(256, 256, 32.0, 32.0)
        u = one_sided_rough(g, rough_spec(gamma=2.1, sing_amplitude=4.0))
        rep = check_hypotheses(u, 0.0, 3, 2.1)
        assert rep.ok  # windowed items stable
        assert not rep.global_hn.stable  # full-box H^3 diverges

    def test_xmean_violation_propagates(self, grid128):
        _, Y = grid128.meshgrid()
        bad = Field.from_values(grid128, 0.2 * np.cos(2 * np.pi * Y / grid128.ly))
        with pytest.raises(NonZeroXMean):
            check_hypotheses(bad, 0.0, 3, 2.1)

    def test_strict_raises_named_items(self):
        g = Grid(256, 256, 32.0, 32.0)
        u = one_sided_rough(g, rough_spec(gamma=2.1, sing_amplitude=4.0))
        # checking against a window that contains the singular line at
        # x_s = -1 must flag the windowed sum as refinement-unstable
        with pytest.raises(HypothesisFailed, match="window_sum"):
            check_hypotheses(u, -4.0, 3, 2.1, strict=True)
