"""Tests for bridge samplers, hitting formulas, and the Gibbs resampler."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from kpztails.bridges import (
    BridgeSpec,
    GibbsSpec,
    _gibbs_weights,
    bm_parabola_crossing_bound,
    bm_parabola_crossing_mc,
    bridge_min_tail,
    bridge_min_tail_mc,
    dominance_test,
    gibbs_resample,
    hamiltonian,
    log_hamiltonian,
    reflection_two_sided_min_bound,
    reflection_two_sided_min_mc,
    sample_bridge,
)


class TestHamiltonian:
    def test_zero_argument(self):
        assert hamiltonian(0.0, 1.0) == 1.0
        assert hamiltonian(0.0, 17.3) == 1.0

    def test_reference_value(self):
        # T = 8 gives T^{1/3} = 2
        assert hamiltonian(1.0, 8.0) == pytest.approx(math.exp(2.0), rel=1e-14)

    def test_absent_neighbor_sentinel(self):
        assert hamiltonian(-math.inf, 2.0) == 0.0
        assert log_hamiltonian(-math.inf, 2.0) == -math.inf

    def test_vectorized(self):
        x = np.array([-math.inf, 0.0, 1.0])
        out = hamiltonian(x, 8.0)
        assert out.shape == (3,)
        assert out[0] == 0.0 and out[1] == 1.0
        assert out[2] == pytest.approx(math.exp(2.0))

    def test_log_variant(self):
        assert log_hamiltonian(1.0, 8.0) == pytest.approx(2.0, rel=1e-14)
        assert log_hamiltonian(-3.0, 1.0) == pytest.approx(-3.0, rel=1e-14)

    def test_overflow_goes_to_inf_without_raising(self):
        assert hamiltonian(1000.0, 8.0) == math.inf
        assert log_hamiltonian(1000.0, 8.0) == 2000.0

    def test_negative_temperature_rejected(self):
        with pytest.raises(ValueError):
            hamiltonian(0.0, -1.0)
        with pytest.raises(ValueError):
            log_hamiltonian(0.0, -1.0)

    @given(x=st.floats(-50.0, 50.0), T=st.floats(0.1, 50.0))
    def test_log_consistency(self, x, T):
        assert math.log(hamiltonian(x, T)) == pytest.approx(
            log_hamiltonian(x, T), rel=1e-12, abs=1e-12)


class TestBridgeSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            BridgeSpec(a=1.0, b=0.0, x=0.0, y=0.0)
        with pytest.raises(ValueError):
            BridgeSpec(a=0.0, b=1.0, x=0.0, y=0.0, step=0.0)
        with pytest.raises(ValueError):
            BridgeSpec(a=0.0, b=1.0, x=math.inf, y=0.0)

    def test_grid_endpoints(self):
        spec = BridgeSpec(a=-1.0, b=2.0, x=0.0, y=1.0, step=0.25)
        grid = spec.grid
        assert grid[0] == -1.0 and grid[-1] == 2.0
        assert spec.n_steps == 12
        assert grid.shape == (13,)

    def test_step_snapping(self):
        # 0.3 does not divide 1; the step snaps to the nearest count
        spec = BridgeSpec(a=0.0, b=1.0, x=0.0, y=0.0, step=0.3)
        assert spec.n_steps == 3
        assert spec.grid.shape == (4,)

    def test_length(self):
        assert BridgeSpec(a=-2.0, b=3.0, x=0.0, y=0.0).length == 5.0


class TestSampleBridge:
    def test_endpoints_exact(self):
        spec = BridgeSpec(a=0.0, b=1.0, x=0.3, y=-0.7, step=1 / 64)
        paths = sample_bridge(spec, seed=0, n=32)
        assert paths.shape == (32, 65)
        assert np.all(paths[:, 0] == 0.3)
        assert np.all(paths[:, -1] == -0.7)

    def test_single_path_shape(self):
        spec = BridgeSpec(a=0.0, b=1.0, x=0.0, y=0.0, step=0.5)
        path = sample_bridge(spec, seed=1)
        assert path.shape == (3,)

    def test_coarse_two_point_grid(self):
        spec = BridgeSpec(a=0.0, b=1.0, x=1.0, y=2.0, step=1.0)
        path = sample_bridge(spec, seed=2)
        assert path[0] == 1.0 and path[-1] == 2.0

    def test_midpoint_variance(self):
        # Var B(t) = t(L-t)/L = 1/4 at the midpoint of [0, 1]
        n = 10**5
        spec = BridgeSpec(a=0.0, b=1.0, x=0.0, y=0.0, step=1 / 64)
        mid = sample_bridge(spec, seed=3, n=n)[:, 32]
        se_var = 0.25 * math.sqrt(2.0 / (n - 1))
        assert mid.var() == pytest.approx(0.25, abs=3 * se_var)
        assert abs(mid.mean()) <= 3 * math.sqrt(0.25 / n)

    def test_mean_is_linear_interpolation(self):
        n = 10**5
        spec = BridgeSpec(a=0.0, b=1.0, x=0.0, y=1.0, step=1 / 64)
        paths = sample_bridge(spec, seed=4, n=n)
        quarter = paths[:, 16]
        se = math.sqrt(quarter.var() / n)
        assert quarter.mean() == pytest.approx(0.25, abs=3 * se)

    def test_covariance(self):
        # Cov(B(s), B(t)) = s(L-t)/L for s <= t
        n = 10**5
        spec = BridgeSpec(a=0.0, b=1.0, x=0.0, y=0.0, step=1 / 64)
        paths = sample_bridge(spec, seed=5, n=n)
        cov = float(np.mean(paths[:, 16] * paths[:, 32]))
        assert cov == pytest.approx(0.25 * 0.5, abs=3e-3)

    def test_deterministic_given_seed(self):
        spec = BridgeSpec(a=0.0, b=1.0, x=0.0, y=0.0, step=1 / 16)
        assert np.array_equal(sample_bridge(spec, seed=7), sample_bridge(spec, seed=7))


class TestBridgeMinTail:
    def test_symmetric_entrance_exit(self):
        exact, upper = bridge_min_tail(0.0, 0.0, 1.0, 1.0)
        assert exact == pytest.approx(math.exp(-2.0), rel=1e-14)
        assert upper == pytest.approx(math.exp(-2.0), rel=1e-14)
        assert exact == pytest.approx(0.13534, abs=1e-5)

    def test_asymmetric_example(self):
        exact, upper = bridge_min_tail(0.0, 1.0, 1.0, 1.0)
        assert exact == pytest.approx(math.exp(-4.0), rel=1e-14)
        assert exact == pytest.approx(0.01832, abs=1e-5)
        assert upper == pytest.approx(math.exp(-2.0), rel=1e-14)

    def test_zero_depth(self):
        assert bridge_min_tail(0.3, -0.2, 2.0, 0.0) == (1.0, 1.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            bridge_min_tail(0.0, 0.0, 1.0, -0.5)
        with pytest.raises(ValueError):
            bridge_min_tail(0.0, 0.0, 0.0, 1.0)

    @given(
        x=st.floats(-3.0, 3.0),
        y=st.floats(-3.0, 3.0),
        L=st.floats(0.1, 10.0),
        s=st.floats(0.0, 5.0),
    )
    def test_exact_below_upper(self, x, y, L, s):
        # (x-m)(y-m) = (s + (x - min))(s + (y - min)) >= s^2
        exact, upper = bridge_min_tail(x, y, L, s)
        assert exact <= upper * (1.0 + 1e-12)
        if x == y:
            assert exact == pytest.approx(upper, rel=1e-12)


class TestBridgeMinTailMC:
    @pytest.mark.parametrize("x,y,L,s", [
        (0.0, 0.5, 1.0, 1.0),
        (0.0, 1.0, 1.0, 1.0),
        (1.0, 0.0, 2.0, 0.5),
    ])
    def test_matches_exact(self, x, y, L, s):
        exact, upper = bridge_min_tail(x, y, L, s)
        mc, se = bridge_min_tail_mc(x, y, L, s, n=10**5, seed=11, n_steps=64)
        assert abs(mc - exact) <= 3 * se
        assert mc <= upper

    def test_coarse_grid_still_unbiased(self):
        # the per-segment crossing correction removes discretization bias
        exact, _ = bridge_min_tail(0.0, 0.5, 1.0, 1.0)
        mc, se = bridge_min_tail_mc(0.0, 0.5, 1.0, 1.0, n=10**5, seed=3, n_steps=8)
        assert abs(mc - exact) <= 3 * se

    def test_zero_depth_is_certain(self):
        mc, se = bridge_min_tail_mc(0.0, 1.0, 1.0, 0.0, n=100, seed=0)
        assert mc == 1.0 and se == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            bridge_min_tail_mc(0.0, 0.0, 1.0, -1.0, n=10)


class TestParabolaCrossing:
    def test_reference_value(self):
        # 8/(3 sqrt 3) = 1.53960; envelope at its xi -> 0 limit
        val = bm_parabola_crossing_bound(1.0, 1.0, 0.0)
        assert val == pytest.approx(0.12383, abs=2e-5)
        assert val == pytest.approx(math.exp(-8.0 / (3.0 * math.sqrt(3.0)))
                                    / math.sqrt(3.0), rel=1e-14)

    def test_monotonicity(self):
        assert bm_parabola_crossing_bound(2.0, 1.0, 0.1) < bm_parabola_crossing_bound(
            1.0, 1.0, 0.1)
        assert bm_parabola_crossing_bound(1.0, 2.0, 0.1) < bm_parabola_crossing_bound(
            1.0, 1.0, 0.1)
        # xi slackens the exponent
        assert bm_parabola_crossing_bound(1.0, 1.0, 0.5) > bm_parabola_crossing_bound(
            1.0, 1.0, 0.1)

    def test_large_s_vanishes(self):
        assert bm_parabola_crossing_bound(200.0, 1.0, 0.1) < 1e-300

    def test_validation(self):
        with pytest.raises(ValueError):
            bm_parabola_crossing_bound(1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            bm_parabola_crossing_bound(1.0, 1.0, -0.1)
        with pytest.raises(ValueError):
            bm_parabola_crossing_bound(1.0, 0.0, 0.1)
        with pytest.raises(ValueError):
            bm_parabola_crossing_bound(-1.0, 1.0, 0.1)

    def test_mc_against_envelope_regimes(self):
        # The envelope is asymptotic in s: it only holds above a threshold
        # s0 that grows as xi shrinks.  At s = 2 the crossing probability is
        # 0.0165(3), ABOVE the xi = 0.1 envelope 0.01146 (s0(0.1) > 2), yet
        # far below the xi = 0.5 envelope 0.0654.
        mc, se = bm_parabola_crossing_mc(2.0, 1.0, window=4.0, n=6 * 10**4,
                                         seed=7, n_steps=256)
        tight = bm_parabola_crossing_bound(2.0, 1.0, 0.1)
        loose = bm_parabola_crossing_bound(2.0, 1.0, 0.5)
        assert mc - 3 * se > tight
        assert mc + 3 * se < loose
        assert mc == pytest.approx(0.0165, abs=3 * se + 5e-4)

    def test_mc_validation(self):
        with pytest.raises(ValueError):
            bm_parabola_crossing_mc(1.0, -1.0, n=10)


class TestReflectionBound:
    def test_zero_threshold(self):
        assert reflection_two_sided_min_bound(0.0, 1.0, 1.0) == 1.0

    def test_reference_value(self):
        # frozen by quadrature, cross-checked by MC below
        val = reflection_two_sided_min_bound(1.0, 1.0, 2.0 ** (1.0 / 3.0))
        assert val == pytest.approx(0.9388806102, abs=1e-9)

    def test_mc_agreement(self):
        sigma2 = 2.0 ** (1.0 / 3.0)
        val = reflection_two_sided_min_bound(1.0, 1.0, sigma2)
        mc, se = reflection_two_sided_min_mc(1.0, 1.0, sigma2, n=10**6, seed=5)
        assert abs(mc - val) <= 3 * se

    @pytest.mark.parametrize("m", [0.5, 1.0, 2.0, 4.0, 8.0])
    def test_gaussian_envelope(self, m):
        sigma2 = 2.0 ** (1.0 / 3.0)
        val = reflection_two_sided_min_bound(m, 1.0, sigma2)
        assert val <= 2.0 * math.exp(-m * m / (32.0 * sigma2))

    def test_monotone_in_threshold(self):
        vals = [reflection_two_sided_min_bound(m, 1.0, 1.0)
                for m in (0.0, 0.5, 1.0, 2.0, 4.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_validation(self):
        with pytest.raises(ValueError):
            reflection_two_sided_min_bound(-1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            reflection_two_sided_min_bound(1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            reflection_two_sided_min_bound(1.0, 1.0, -2.0)


class TestGibbsSpec:
    def _bridge(self):
        return BridgeSpec(a=0.0, b=1.0, x=0.0, y=0.5, step=1 / 64)

    def test_validation(self):
        with pytest.raises(ValueError):
            GibbsSpec(bridge=self._bridge(), T=0.0)
        with pytest.raises(ValueError):
            GibbsSpec(bridge=self._bridge(), T=1.0, upper_curve=3.0)
        with pytest.raises(ValueError):
            GibbsSpec(bridge=self._bridge(), T=1.0, lower_curve=np.zeros(7))
        with pytest.raises(ValueError):
            GibbsSpec(bridge=self._bridge(), T=1.0, lower_curve=math.inf)
        bad = np.zeros(65)
        bad[3] = math.nan
        with pytest.raises(ValueError):
            GibbsSpec(bridge=self._bridge(), T=1.0, lower_curve=bad)

    def test_lower_on_grid_forms(self):
        b = self._bridge()
        assert np.all(GibbsSpec(bridge=b, T=1.0).lower_on_grid() == -math.inf)
        assert np.all(GibbsSpec(bridge=b, T=1.0, lower_curve=-0.5).lower_on_grid()
                      == -0.5)
        g = np.linspace(-1.0, 0.0, 65)
        g[0] = -math.inf  # per-site sentinel allowed
        spec = GibbsSpec(bridge=b, T=1.0, lower_curve=g)
        assert np.array_equal(spec.lower_on_grid(), g)


class TestGibbsResample:
    def _bridge(self):
        return BridgeSpec(a=0.0, b=1.0, x=0.0, y=0.5, step=1 / 64)

    def test_no_wall_is_free_bridge(self):
        spec = GibbsSpec(bridge=self._bridge(), T=1.0)
        res = gibbs_resample(spec, seed=1, n=10**4)
        assert res.mean_weight == 1.0
        assert res.max_weight == 1.0
        assert res.acceptance_rate == 1.0
        assert res.paths.shape == (10**4, 65)
        assert np.all(res.paths[:, 0] == 0.0)
        assert np.all(res.paths[:, -1] == 0.5)

    def test_no_wall_matches_free_bridge_in_law(self):
        n = 10**4
        spec = GibbsSpec(bridge=self._bridge(), T=1.0)
        mid = spec.bridge.n_steps // 2
        gibbs_mid = gibbs_resample(spec, seed=1, n=n).paths[:, mid]
        free_mid = sample_bridge(self._bridge(), seed=4, n=n)[:, mid]
        assert stats.ks_2samp(gibbs_mid, free_mid).pvalue > 0.01

    def test_distant_wall_accepts_almost_surely(self):
        spec = GibbsSpec(bridge=self._bridge(), T=1.0, lower_curve=-20.0)
        res = gibbs_resample(spec, seed=2, n=10**4)
        assert res.acceptance_rate > 0.99
        assert res.mean_weight > 0.99

    def test_near_wall_pushes_paths_up(self):
        n = 10**4
        spec = GibbsSpec(bridge=self._bridge(), T=8.0, lower_curve=-0.5)
        mid = spec.bridge.n_steps // 2
        res = gibbs_resample(spec, seed=3, n=n)
        wall_mid = res.paths[:, mid]
        free_mid = sample_bridge(self._bridge(), seed=4, n=n)[:, mid]
        se = math.sqrt(wall_mid.var() / n + free_mid.var() / n)
        assert wall_mid.mean() - free_mid.mean() >= 3 * se
        assert 0.0 < res.acceptance_rate < 1.0

    def test_weights_in_unit_interval(self):
        spec = GibbsSpec(bridge=self._bridge(), T=4.0, lower_curve=-0.4)
        paths = sample_bridge(self._bridge(), seed=6, n=256)
        w = _gibbs_weights(spec, paths)
        assert np.all(w > 0.0) and np.all(w <= 1.0)
        assert np.all(w < 1.0)  # finite wall always costs something

    def test_constraining_boundary_raises(self):
        spec = GibbsSpec(bridge=self._bridge(), T=8.0, lower_curve=3.5)
        with pytest.raises(RuntimeError, match="boundary too constraining"):
            gibbs_resample(spec, seed=5, n=1)

    def test_trapezoid_weight_converges_quadratically(self):
        # closed form for a straight-line path against a constant wall:
        # int_0^1 exp(alpha (g - u)) du with alpha = T^{1/3}
        T, g = 8.0, -0.5
        alpha = T ** (1.0 / 3.0)
        exact = math.exp(alpha * g) * (1.0 - math.exp(-alpha)) / alpha
        errs = []
        for m in (16, 32, 64):
            b = BridgeSpec(a=0.0, b=1.0, x=0.0, y=1.0, step=1.0 / m)
            spec = GibbsSpec(bridge=b, T=T, lower_curve=g)
            line = np.linspace(0.0, 1.0, m + 1)[None, :]
            w = _gibbs_weights(spec, line)[0]
            errs.append(abs(-math.log(w) - exact))
        assert errs[0] > errs[1] > errs[2]
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)
        assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.1)

    def test_validation(self):
        spec = GibbsSpec(bridge=self._bridge(), T=1.0)
        with pytest.raises(ValueError):
            gibbs_resample(spec, seed=0, n=0)


class TestDominance:
    def _spec(self, x=0.0, y=0.5, T=1.0, g=None):
        return GibbsSpec(bridge=BridgeSpec(a=0.0, b=1.0, x=x, y=y, step=1 / 64),
                         T=T, lower_curve=g)

    def test_identical_specs(self):
        a = self._spec()
        rep = dominance_test(a, a, n=2 * 10**4, seed=9)
        assert rep.passed
        assert rep.max_deficit <= 0.0

    def test_shifted_endpoints(self):
        rep = dominance_test(self._spec(), self._spec(x=-1.0, y=-0.5),
                             n=2 * 10**4, seed=9)
        assert rep.passed
        # the shift is visible: the lower spec's CDF sits strictly above
        assert np.max(rep.cdf_b - rep.cdf_a) > 0.5

    def test_raised_wall(self):
        rep = dominance_test(self._spec(T=4.0, g=-0.3), self._spec(T=4.0, g=-1.3),
                             n=2 * 10**4, seed=9)
        assert rep.passed

    def test_ordering_precondition(self):
        with pytest.raises(ValueError):
            dominance_test(self._spec(x=-1.0, y=-0.5), self._spec(), n=100)
        with pytest.raises(ValueError):
            dominance_test(self._spec(g=-2.0), self._spec(g=-1.0), n=100)

    def test_mismatched_specs_rejected(self):
        with pytest.raises(ValueError):
            dominance_test(self._spec(), self._spec(T=2.0), n=100)
        other = GibbsSpec(bridge=BridgeSpec(a=0.0, b=2.0, x=0.0, y=0.5, step=1 / 64),
                          T=1.0)
        with pytest.raises(ValueError):
            dominance_test(self._spec(), other, n=100)

    def test_report_fields(self):
        rep = dominance_test(self._spec(), self._spec(), n=5000, seed=1)
        assert rep.n == 5000
        assert np.all(np.diff(rep.grid) >= 0.0)
        assert np.all((rep.cdf_a >= 0.0) & (rep.cdf_a <= 1.0))
        assert np.all(np.diff(rep.cdf_a) >= 0.0)
