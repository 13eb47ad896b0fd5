import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from welrci.npmle import DiscreteDistribution
from welrci.smoothing import (
    h_weight,
    h_weights,
    moments,
    quantile_estimate,
    smoothed_cdf,
    smoothed_quantile,
)

W3 = (1.0, 2.0, 3.0)
UNIFORM3 = DiscreteDistribution(W3, np.full(3, 1 / 3), 3)
TWO = DiscreteDistribution((1.0, 2.0), (0.5, 0.5), 2)


@st.composite
def distributions(draw, max_m=8):
    m = draw(st.integers(1, max_m))
    gaps = draw(st.lists(st.floats(0.05, 5.0), min_size=m, max_size=m))
    raw = draw(st.lists(st.floats(0.05, 1.0), min_size=m, max_size=m))
    p = np.array(raw) / sum(raw)
    return DiscreteDistribution(np.cumsum(gaps), p, draw(st.integers(m, 200)))


class TestHWeight:
    @pytest.mark.parametrize("i,x,want", [(2, 1.5, 0.5), (2, 3.0, 1.0), (3, 1.5, 0.0)])
    def test_examples(self, i, x, want):
        assert h_weight(W3, i, x) == want

    def test_first_ramp_anchored_at_zero(self):
        assert h_weight(W3, 1, 0.25) == 0.25
        assert h_weight(W3, 1, 0.0) == 0.0
        assert h_weight(W3, 1, -1.0) == 0.0

    def test_index_range(self):
        with pytest.raises(IndexError):
            h_weight(W3, 0, 1.0)
        with pytest.raises(IndexError):
            h_weight(W3, 4, 1.0)

    @given(st.floats(0.1, 50.0), st.floats(-1.0, 5.0))
    def test_scale_equivariance(self, c, x):
        np.testing.assert_allclose(h_weights(np.multiply(W3, c), c * x), h_weights(W3, x),
                                   atol=1e-12)


class TestSmoothedCdf:
    @pytest.mark.parametrize("x,want", [(1.5, 0.75), (2.0, 1.0), (0.5, 0.25), (-1.0, 0.0), (9.0, 1.0)])
    def test_examples(self, x, want):
        assert smoothed_cdf(TWO, x) == pytest.approx(want, abs=1e-15)

    @given(distributions())
    def test_knots_carry_cumulative_mass(self, dist):
        np.testing.assert_allclose(smoothed_cdf(dist, dist.support), dist.cumulative, atol=1e-12)

    @given(distributions())
    def test_close_to_step_cdf(self, dist):
        x = np.linspace(0, dist.support[-1] * 1.1, 301)
        gap = np.max(np.abs(smoothed_cdf(dist, x) - dist.cdf(x)))
        assert gap <= dist.mass.max() + 1e-12

    @given(distributions())
    def test_matches_sum_of_ramps(self, dist):
        for x in np.linspace(-0.5, dist.support[-1] + 0.5, 17):
            direct = float(dist.mass @ h_weights(dist.support, x))
            assert smoothed_cdf(dist, x) == pytest.approx(direct, abs=1e-12)


class TestSmoothedQuantile:
    @pytest.mark.parametrize("q,want", [(0.25, 0.5), (0.5, 1.0), (0.75, 1.5)])
    def test_examples(self, q, want):
        assert smoothed_quantile(TWO, q) == pytest.approx(want, abs=1e-15)

    @pytest.mark.parametrize("q", [0.0, 1.0, -0.1, 1.5])
    def test_rejects_level(self, q):
        with pytest.raises(ValueError):
            smoothed_quantile(TWO, q)

    @given(distributions(), st.floats(0.001, 0.999))
    def test_inverse_round_trip(self, dist, q):
        assert smoothed_cdf(dist, smoothed_quantile(dist, q)) == pytest.approx(q, abs=1e-12)

    @given(distributions(), st.floats(0.01, 0.99), st.floats(0.01, 100.0))
    def test_scale_equivariance(self, dist, q, c):
        scaled = DiscreteDistribution(dist.support * c, dist.mass, dist.n)
        assert smoothed_quantile(scaled, q) == pytest.approx(c * smoothed_quantile(dist, q),
                                                             rel=1e-12)

    def test_raw_quantile_is_right_continuous_inverse(self):
        assert quantile_estimate(TWO, 0.5, smoothed=False) == 1.0
        assert quantile_estimate(TWO, 0.51, smoothed=False) == 2.0
        assert quantile_estimate(TWO, 0.25, smoothed=True) == 0.5


class TestMoments:
    def test_smoothed_example(self):
        mom = moments(UNIFORM3, 1.5, 0.5, smoothed=True)
        assert mom.eta_hat == pytest.approx(0.5, abs=1e-15)
        assert mom.mu[2] == pytest.approx(1 / 6, abs=1e-15)
        assert mom.mu[3] == pytest.approx(0.0, abs=1e-15)
        assert mom.mu[4] == pytest.approx(1 / 24, abs=1e-15)

    def test_indicator_example(self):
        # U = (0.5, -0.5, -0.5): the third moment is (0.125 - 0.125 - 0.125)/3
        mom = moments(UNIFORM3, 1.5, 0.5, smoothed=False)
        assert mom.eta_hat == pytest.approx(1 / 3, abs=1e-15)
        assert mom.mu[2] == pytest.approx(1 / 4, abs=1e-15)
        assert mom.mu[3] == pytest.approx(-1 / 24, abs=1e-15)

    def test_eta_exact_at_estimate(self):
        theta = smoothed_quantile(UNIFORM3, 0.3)
        assert moments(UNIFORM3, theta, 0.3).eta_hat == pytest.approx(0.3, abs=1e-15)

    @given(distributions(), st.floats(0.01, 0.99), st.floats(-1.0, 30.0), st.booleans())
    def test_bounds(self, dist, q, theta, smoothed):
        mom = moments(dist, theta, q, smoothed)
        assert mom.mu2 >= 0
        assert abs(mom.eta_hat - q) <= 1
        assert all(abs(v) <= 1 + 1e-12 for v in mom.mu.values())

    @given(distributions(), st.floats(0.05, 0.95), st.floats(0.01, 0.99))
    def test_mu2_positive_inside_feasible_range(self, dist, q, t):
        from welrci.intervals import feasible_range

        if dist.m < 2:
            return
        lo, hi = feasible_range(dist, q)
        theta = lo + t * (hi - lo)
        assert moments(dist, theta, q).mu2 > 0
