"""Tests for circle quadrature, node doubling and radius selection."""

import math

import numpy as np
import pytest

from qtazrp.errors import NonConvergence
from qtazrp.models import ContourSpec
from qtazrp.quadrature import (
    QuadratureResult,
    SeparableIntegrand,
    choose_radius,
    circle_nodes,
    contour_integral_n,
    fixed_sum,
)

from helpers import make_profile, state


def spec(radius: float = 2.0, **overrides) -> ContourSpec:
    return ContourSpec(radius=radius, **overrides)


class TestCircleNodes:
    def test_inverse_is_exact(self):
        nodes, weights = circle_nodes(2.0, 8)
        assert fixed_sum(weights / nodes) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("m", [2, 3, 8, 64])
    def test_constant_integrates_to_zero(self, m):
        _, weights = circle_nodes(1.5, m)
        assert abs(fixed_sum(weights)) < 1e-14

    def test_residue_at_enclosed_pole(self):
        b = 0.5
        nodes, weights = circle_nodes(2.0, 64)
        value = fixed_sum(weights * b / (b - nodes))
        assert value == pytest.approx(-0.5, abs=1e-13)

    def test_nodes_on_circle(self):
        nodes, _ = circle_nodes(3.0, 16)
        assert np.allclose(np.abs(nodes), 3.0)
        assert nodes[0] == pytest.approx(3.0)

    def test_no_nodes_rejected(self):
        with pytest.raises(ValueError):
            circle_nodes(1.0, 0)


class TestContourIntegral:
    def test_separable_reciprocal(self):
        result = contour_integral_n(lambda w: 1.0 / (w[0] * w[1]), 2, spec())
        assert isinstance(result, QuadratureResult)
        assert result.value == pytest.approx(1.0, abs=1e-14)
        assert result.converged

    def test_declared_factors(self):
        integrand = SeparableIntegrand(coupling=None, factors=(lambda z: 1.0 / z, lambda z: 1.0 / z))
        assert contour_integral_n(integrand, 2, spec()).value == pytest.approx(1.0, abs=1e-14)

    def test_one_particle_stays(self):
        b, t = 1.0, 0.3
        result = contour_integral_n(lambda w: b / (b - w[0]) * np.exp(-w[0] * t) / -b, 1, spec())
        assert result.value.real == pytest.approx(math.exp(-0.3), abs=1e-10)
        assert abs(result.value.imag) < 1e-12

    def test_analytic_integrand_vanishes(self):
        result = contour_integral_n(lambda w: np.exp(w[0] + 2.0 * w[1]) * (w[0] - w[1]) ** 3, 2, spec(radius=1.0))
        assert abs(result.value) < 1e-12

    def test_coupled_poles(self):
        # w2 has its pole at q w1 inside the circle; the w2 integral is 1 for every w1
        q = 0.5
        result = contour_integral_n(lambda w: 1.0 / ((w[1] - q * w[0]) * w[0]), 2, spec())
        assert result.value == pytest.approx(1.0, abs=1e-12)

    def test_boundary_combination_vanishes(self):
        # the w1 dependence cancels, leaving a constant in w1
        q = 0.5
        result = contour_integral_n(
            lambda w: (w[0] - q * w[1]) / ((w[0] - q * w[1]) * (w[1] - 0.3) * (w[1] - 0.2)), 2, spec()
        )
        assert abs(result.value) < 1e-10

    def test_doubling_reported(self):
        result = contour_integral_n(lambda w: 1.0 / (w[0] - 1.8), 1, spec(radius=2.0, nodes=8))
        assert result.nodes_used > 8
        assert result.value == pytest.approx(1.0, abs=1e-9)

    def test_converged_error_is_small(self):
        result = contour_integral_n(lambda w: 1.0 / (w[0] - 1.0), 1, spec(nodes=64))
        assert result.estimated_error < 1e-10
        assert result.radius == 2.0

    def test_nonconvergence_raises(self):
        with pytest.raises(NonConvergence) as excinfo:
            contour_integral_n(lambda w: 1.0 / (w[0] - 1.99), 1, spec(nodes=8, max_nodes=16))
        assert excinfo.value.result is not None
        assert not excinfo.value.result.converged

    def test_nonconvergence_allowed(self):
        result = contour_integral_n(
            lambda w: 1.0 / (w[0] - 1.99), 1, spec(nodes=8, max_nodes=16, allow_unconverged=True)
        )
        assert not result.converged
        assert result.nodes_used == 16

    def test_dimension_mismatch(self):
        integrand = SeparableIntegrand(coupling=None, factors=(None,))
        with pytest.raises(ValueError, match="variables"):
            contour_integral_n(integrand, 2, spec())

    def test_threads_reproduce_serial(self):
        f = lambda w: np.exp(-(w[0] + w[1] + w[2])) / ((w[0] - 0.3) * (w[1] - 0.2 * w[0]) * (w[2] - 0.7))  # noqa: E731
        serial = contour_integral_n(f, 3, spec(nodes=16, max_nodes=128, allow_unconverged=True))
        threaded = contour_integral_n(f, 3, spec(nodes=16, max_nodes=128, allow_unconverged=True, workers=4))
        assert serial.value == threaded.value
        assert serial.nodes_used == threaded.nodes_used


class TestChooseRadius:
    def test_homogeneous(self):
        assert choose_radius(make_profile(q=0.5), state(0), state(3)) == pytest.approx(1.0)

    def test_window_maximum(self):
        profile = make_profile(q=0.5, a2=3.0)
        assert choose_radius(profile, state(0), state(2)) == pytest.approx(3.0)

    def test_scan_reaches_left_of_both_states(self):
        profile = make_profile(q=0.5, am2=4.0)
        assert choose_radius(profile, state(0), state(-1)) == pytest.approx(4.0)
        assert choose_radius(profile, state(1), state(1)) == pytest.approx(1.0)

    def test_two_particle_example(self):
        profile = make_profile(q=0.5, a2=4.0)
        assert choose_radius(profile, state(0, 0), state(2, 1)) == pytest.approx(4.0)
