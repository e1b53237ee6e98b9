import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special, stats

from conftest import z_score
from subcomp.levy_models import (JumpSizeTable, SamplerError, SubordinatorPath, SubordinatorSpec,
                                 TemperedStableParams, laplace_exponent,
                                 laplace_exponent_quadrature, levy_density, sample_gamma_increment,
                                 sample_jump_path, sample_ts_increment, ts_acceptance_rate,
                                 ts_proposals)
from subcomp.specfun import levy_tail_mass

GAMMA = TemperedStableParams(1.0, 1.0, 0.0)
TS_HALF = TemperedStableParams(1.0, 1.0, 0.5)


class TestParams:
    @pytest.mark.parametrize("c, lam, alpha", [(0.0, 1.0, 0.0), (1.0, 0.0, 0.0), (2.0, -1.0, 0.0),
                                               (1.0, 1.0, 1.0), (1.0, 1.0, -0.1)])
    def test_rejected(self, c, lam, alpha):
        with pytest.raises(ValueError):
            TemperedStableParams(c, lam, alpha)

    def test_alpha_near_one_warns(self):
        with pytest.warns(RuntimeWarning):
            TemperedStableParams(1.0, 1.0, 0.97)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            SubordinatorSpec(GAMMA, drift=-0.1)
        with pytest.raises(ValueError):
            SubordinatorSpec(GAMMA, truncation_eps=0.0)


class TestLevyDensity:
    def test_values(self):
        assert levy_density(1.0, GAMMA) == pytest.approx(math.exp(-1), rel=1e-15)
        assert levy_density(2.0, TS_HALF) == pytest.approx(2 ** -1.5 * math.exp(-2), rel=1e-15)
        assert levy_density(2.0, TS_HALF) == pytest.approx(0.0478482, abs=1e-7)

    def test_nonpositive_z(self):
        with pytest.raises(ValueError):
            levy_density(0.0, GAMMA)

    @given(z=st.floats(1e-6, 50.0), alpha=st.floats(0.0, 0.9))
    def test_positive_and_decreasing(self, z, alpha):
        p = TemperedStableParams(1.5, 0.7, alpha)
        assert 0 < levy_density(z * 1.01, p) < levy_density(z, p)


class TestLaplaceExponent:
    def test_values(self):
        assert laplace_exponent(0.0, TS_HALF) == 0.0
        assert laplace_exponent(1.0, GAMMA) == pytest.approx(math.log(2), rel=1e-15)
        ref = special.gamma(-0.5) * (1 - math.sqrt(2))
        assert laplace_exponent(1.0, TS_HALF) == pytest.approx(ref, rel=1e-14)
        assert laplace_exponent(1.0, TS_HALF) == pytest.approx(1.46834884745, rel=1e-11)

    @given(u=st.floats(0.01, 20.0), alpha=st.sampled_from([0.0, 0.25, 0.5, 0.9]),
           lam=st.floats(0.2, 5.0))
    def test_matches_quadrature(self, u, alpha, lam):
        p = TemperedStableParams(1.3, lam, alpha)
        assert laplace_exponent(u, p) == pytest.approx(laplace_exponent_quadrature(u, p), rel=1e-9)

    @given(u=st.floats(0.0, 10.0), alpha=st.floats(0.0, 0.9))
    def test_increasing_concave(self, u, alpha):
        p = TemperedStableParams(1.0, 1.0, alpha)
        a, b, c = (laplace_exponent(u + d, p) for d in (0.0, 0.5, 1.0))
        assert a < b < c
        assert b - a >= c - b


class TestGammaIncrement:
    def test_mean(self):
        g = sample_gamma_increment(1.0, GAMMA, np.random.default_rng(1), size=1_000_000)
        assert abs(z_score(g, 1.0)) < 4

    def test_variance(self):
        g = sample_gamma_increment(1.0, TemperedStableParams(2.0, 2.0), np.random.default_rng(2),
                                   size=1_000_000)
        s2 = g.var(ddof=1)
        se = math.sqrt((np.mean((g - g.mean()) ** 4) - s2 ** 2) / g.size)
        assert abs(s2 - 0.5) / se < 4

    def test_small_dt_collapses(self):
        g = sample_gamma_increment(1e-8, GAMMA, np.random.default_rng(3), size=1000)
        assert np.mean(g > 1e-6) < 0.01

    def test_rejects_tempered_stable(self, rng):
        with pytest.raises(ValueError):
            sample_gamma_increment(1.0, TS_HALF, rng)


class TestTemperedStableIncrement:
    @pytest.mark.parametrize("u", [0.5, 1.0, 2.0])
    def test_laplace_transform(self, u):
        s = sample_ts_increment(0.5, TS_HALF, np.random.default_rng(4), size=100_000)
        assert abs(z_score(np.exp(-u * s), math.exp(-0.5 * laplace_exponent(u, TS_HALF)))) < 4

    def test_strictly_positive(self, rng):
        for alpha in (0.1, 0.5, 0.9):
            s = sample_ts_increment(0.2, TemperedStableParams(1.0, 1.0, alpha), rng, size=20_000)
            assert np.all(s > 0)

    def test_acceptance_rate(self):
        rng = np.random.default_rng(5)
        s = ts_proposals(0.5, TS_HALF, rng, size=100_000)
        accepted = (rng.uniform(size=s.size) < np.exp(-s)).astype(float)
        expected = math.exp(-0.5 * 2 * math.sqrt(math.pi))
        assert ts_acceptance_rate(0.5, TS_HALF) == pytest.approx(expected, rel=1e-14)
        assert abs(z_score(accepted, expected)) < 4

    def test_alpha_zero_routes_to_gamma(self):
        a = sample_ts_increment(1.0, GAMMA, np.random.default_rng(6), size=10)
        b = sample_gamma_increment(1.0, GAMMA, np.random.default_rng(6), size=10)
        np.testing.assert_array_equal(a, b)

    def test_iteration_cap(self, rng):
        p = TemperedStableParams(50.0, 50.0, 0.5)  # acceptance ~ exp(-1250)
        with pytest.raises(SamplerError, match="split dt"):
            sample_ts_increment(1.0, p, rng, max_proposals=10)

    def test_scalar_and_shape(self, rng):
        assert isinstance(sample_ts_increment(0.5, TS_HALF, rng), float)
        assert sample_ts_increment(0.5, TS_HALF, rng, size=(3, 4)).shape == (3, 4)


class TestJumpSizeTable:
    @pytest.mark.parametrize("alpha", [0.0, 0.5])
    def test_total_is_tail_mass(self, alpha):
        p = TemperedStableParams(1.0, 1.0, alpha)
        assert JumpSizeTable(p, 1e-3).total == pytest.approx(levy_tail_mass(1e-3, p), rel=1e-9)

    def test_sample_law(self):
        table = JumpSizeTable(GAMMA, 0.1)
        z = table.sample(np.random.default_rng(7), 100_000)
        assert np.all(z > 0.1)
        cdf = lambda v: 1 - special.exp1(np.maximum(v, 0.1)) / special.exp1(0.1)
        assert stats.kstest(z, cdf).pvalue > 0.01


class TestJumpPath:
    def test_mean_count(self):
        rng = np.random.default_rng(8)
        spec = SubordinatorSpec(GAMMA, truncation_eps=0.1)
        table = JumpSizeTable(GAMMA, 0.1)
        counts = [sample_jump_path(1.0, spec, rng, table).jump_sizes.size for _ in range(10_000)]
        assert special.exp1(0.1) == pytest.approx(1.8229240, abs=1e-7)
        assert abs(z_score(counts, special.exp1(0.1))) < 4

    @given(seed=st.integers(0, 2 ** 32), drift=st.floats(0.0, 2.0), alpha=st.sampled_from([0.0, 0.5]))
    def test_sizes_above_eps_and_monotone(self, seed, drift, alpha):
        spec = SubordinatorSpec(TemperedStableParams(2.0, 1.0, alpha), drift, 1e-3)
        path = sample_jump_path(2.0, spec, np.random.default_rng(seed))
        assert np.all(path.jump_sizes > 1e-3)
        grid = np.linspace(0.0, 2.0, 257)
        assert np.all(np.diff(path(grid)) >= 0)
        assert path(2.0) == pytest.approx(2.0 * drift + path.jump_sizes.sum())

    def test_path_validation(self):
        with pytest.raises(ValueError):
            SubordinatorPath(1.0, [0.5, 0.2], [1.0, 1.0])
        with pytest.raises(ValueError):
            SubordinatorPath(1.0, [0.5], [1e-5], truncation_eps=1e-4)

    def test_continuous_part(self):
        spec = SubordinatorSpec(GAMMA, drift=0.5)
        np.testing.assert_allclose(spec.continuous_part([0.0, 1.0, 3.0]), [0.0, 0.5, 1.5])
