import math

import numpy as np
import pytest
from scipy.stats import expon, norm

from convukf.likelihood import (
    GridSpec,
    conv_likelihood_closed,
    conv_likelihood_numeric,
    exponential_gap_kernel,
    gaussian_density,
)


class TestClosedForm:
    def test_peak_value_with_unit_inflation(self):
        # R = I7 and gamma = 0.5 inflate to 2 * I7; the peak is (4 pi)^(-7/2)
        val = conv_likelihood_closed(np.zeros(7), np.zeros(7), np.eye(7), 0.5)
        assert val == pytest.approx((4.0 * math.pi) ** -3.5, rel=1e-12)

    def test_infinite_gamma_is_plain_gaussian(self, rng):
        R = np.diag(rng.uniform(0.5, 2.0, size=3))
        mean = rng.standard_normal(3)
        y = rng.standard_normal(3)
        assert conv_likelihood_closed(y, mean, R, math.inf) == pytest.approx(
            gaussian_density(y, mean, R), rel=1e-14
        )

    def test_scalar_case(self):
        # N(1; 0, 2) with the inflation contributing half the variance
        val = conv_likelihood_closed(np.array([1.0]), np.zeros(1), np.eye(1), 0.5)
        assert val == pytest.approx(math.exp(-0.25) / math.sqrt(4.0 * math.pi), rel=1e-12)
        assert val == pytest.approx(norm.pdf(1.0, scale=math.sqrt(2.0)), rel=1e-12)


class TestGapKernel:
    def test_is_exponential_survival(self):
        d = np.linspace(0.0, 10.0, 50)
        for gamma in (0.1, 1.0, 4.0):
            np.testing.assert_allclose(
                exponential_gap_kernel(d, gamma), expon.sf(d, scale=1.0 / gamma), rtol=1e-12
            )

    def test_unit_mass_at_zero_distance(self):
        assert exponential_gap_kernel(0.0, 3.7) == 1.0

    def test_negative_distance_rejected(self):
        with pytest.raises(ValueError):
            exponential_gap_kernel(-0.1, 1.0)


class TestQuadratureOracle:
    @pytest.mark.parametrize("gamma", [0.1, 0.5, 2.0, 10.0])
    def test_matches_closed_form_1d(self, gamma):
        total_sd = math.sqrt(1.0 + 0.5 / gamma)
        y = np.linspace(-3, 3, 21).reshape(-1, 1) * total_sd
        num = conv_likelihood_numeric(y, np.zeros(1), np.eye(1), gamma)
        ref = conv_likelihood_closed(y, np.zeros(1), np.eye(1), gamma)
        assert np.max(np.abs(num - ref) / ref) < 1e-3

    @pytest.mark.parametrize("gamma", [0.1, 0.5, 2.0, 10.0])
    def test_matches_closed_form_2d_correlated(self, gamma):
        R = np.array([[1.0, 0.3], [0.3, 0.8]])
        mean = np.array([0.5, -0.2])
        direction = np.array([1.0, 0.7])
        direction /= np.linalg.norm(direction)
        y = mean + np.linspace(-3, 3, 21)[:, None] * direction
        num = conv_likelihood_numeric(y, mean, R, gamma)
        ref = conv_likelihood_closed(y, mean, R, gamma)
        assert np.max(np.abs(num - ref) / ref) < 1e-3

    def test_huge_gamma_collapses_to_nominal(self):
        # beyond grid resolution the kernel acts as a point mass on the
        # diagonal, so grid-aligned evaluations reproduce the nominal density
        spacing = (1.0 / 64.0) / GridSpec().points_per_scale
        y = np.array([[0.0], [8 * spacing], [-24 * spacing]])
        num = conv_likelihood_numeric(y, np.zeros(1), np.eye(1), 1e8)
        nom = gaussian_density(y, np.zeros(1), np.eye(1))
        assert np.max(np.abs(num - nom) / nom) < 1e-3

    def test_single_vector_returns_scalar(self):
        out = conv_likelihood_numeric(np.array([0.3]), np.zeros(1), np.eye(1), 1.0)
        assert isinstance(out, float)

    def test_high_dimension_unsupported(self):
        with pytest.raises(ValueError):
            conv_likelihood_numeric(np.zeros(3), np.zeros(3), np.eye(3), 1.0)

    def test_grid_must_cover_eight_sigmas(self):
        with pytest.raises(ValueError):
            GridSpec(half_width=4.0)
