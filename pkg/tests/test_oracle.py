"""Tests for the truncated master-equation oracle."""

import itertools
import math

import numpy as np
import pytest

from qtazrp.errors import StateSpaceTooLarge
from qtazrp.models import StateVector
from qtazrp.oracle import (
    Distribution,
    StateWindow,
    build_generator,
    enumerate_states,
    evolve,
    oracle_distribution,
    oracle_prob,
    window_bound,
)
from qtazrp.qcore import rate_b
from qtazrp.transition import one_particle_prob

from helpers import make_profile, state


def brute_force(lower, ceiling):
    n = len(lower)
    candidates = itertools.product(range(min(lower), ceiling + 1), repeat=n)
    return sorted(
        (
            x
            for x in candidates
            if all(a >= b for a, b in zip(x, x[1:])) and all(xk >= yk for xk, yk in zip(x, lower))
        ),
        reverse=True,
    )


class TestStateWindow:
    @pytest.mark.parametrize("lower,ceiling", [((0,), 5), ((1, 0), 4), ((2, 2, 0), 4), ((0, -1, -1), 2)])
    def test_enumeration_complete(self, lower, ceiling):
        assert list(enumerate_states(lower, ceiling)) == brute_force(lower, ceiling)

    def test_index(self):
        window = StateWindow.build(state(1, 0), 3)
        assert window.states[0] == (3, 3)
        for i, s in enumerate(window.states):
            assert window.index[s] == i
        assert window.floor == 0

    def test_cap(self):
        with pytest.raises(StateSpaceTooLarge):
            StateWindow.build(state(0, 0, 0), 30, cap=100)

    def test_ceiling_below_state(self):
        with pytest.raises(ValueError, match="below"):
            StateWindow.build(state(3, 0), 2)


class TestGenerator:
    def test_single_particle_exit_rate(self):
        profile = make_profile(q=0.5, a2=3.0)
        gen = build_generator(StateWindow.build(state(2), 4), profile)
        assert gen.exit_rates[gen.window.index[(2,)]] == pytest.approx(rate_b(profile, 2))

    def test_stack_rate(self):
        profile = make_profile(q=0.5)
        window = StateWindow.build(state(0, 0), 3)
        gen = build_generator(window, profile)
        i, j = window.index[(0, 0)], window.index[(1, 0)]
        # a (1 - q^2) = (1 + q) b
        assert gen.rates[i, j] == pytest.approx(0.75)
        assert gen.exit_rates[i] == pytest.approx(0.75)

    def test_two_separate_particles(self):
        profile = make_profile(q=0.5, a1=2.0)
        window = StateWindow.build(state(1, 0), 4)
        gen = build_generator(window, profile)
        i = window.index[(1, 0)]
        assert gen.rates[i, window.index[(2, 0)]] == pytest.approx(1.0)
        assert gen.rates[i, window.index[(1, 1)]] == pytest.approx(0.5)
        assert gen.rates[i].nnz == 2

    def test_interior_rows_conserve(self, inhomogeneous):
        window = StateWindow.build(state(1, 0, 0), 5)
        gen = build_generator(window, inhomogeneous)
        sums = gen.row_sums()
        interior = gen.leak_rates == 0
        assert np.all(np.abs(sums[interior]) < 1e-12)
        assert np.allclose(sums[~interior], -gen.leak_rates[~interior])
        assert gen.rates.data.min() > 0

    def test_only_ceiling_states_leak(self, inhomogeneous):
        window = StateWindow.build(state(0, 0), 3)
        gen = build_generator(window, inhomogeneous)
        for s, leak in zip(window.states, gen.leak_rates):
            assert (leak > 0) == (s[0] == 3)


class TestEvolve:
    def test_time_zero(self, inhomogeneous):
        window = StateWindow.build(state(1, 0), 4)
        start = Distribution.point_mass(window, state(1, 0))
        assert evolve(build_generator(window, inhomogeneous), start, 0.0) is start

    def test_one_particle_closed_form(self, inhomogeneous):
        dist = oracle_distribution(state(0), 1.0, inhomogeneous)
        for x in range(0, 6):
            assert dist.prob(state(x)) == pytest.approx(one_particle_prob(0, x, 1.0, inhomogeneous), abs=1e-10)

    def test_mass_conserved_with_leak(self, inhomogeneous):
        window = StateWindow.build(state(0, 0), 3)
        gen = build_generator(window, inhomogeneous)
        dist = evolve(gen, Distribution.point_mass(window, state(0, 0)), 2.0)
        assert dist.leak > 1e-6
        assert dist.total == pytest.approx(1.0, abs=1e-10)
        assert dist.mass.min() >= -1e-14

    def test_chapman_kolmogorov(self, inhomogeneous, rng):
        window = StateWindow.build(state(1, 0), 8)
        gen = build_generator(window, inhomogeneous)
        start = Distribution.point_mass(window, state(1, 0))
        s = float(rng.uniform(0.0, 1.5))
        split = evolve(gen, evolve(gen, start, s), 1.5 - s)
        direct = evolve(gen, start, 1.5)
        assert np.abs(split.mass - direct.mass).sum() < 1e-9
        assert split.leak == pytest.approx(direct.leak, abs=1e-9)

    def test_negative_time(self, inhomogeneous):
        window = StateWindow.build(state(0), 2)
        with pytest.raises(ValueError):
            evolve(build_generator(window, inhomogeneous), Distribution.point_mass(window, state(0)), -1.0)


class TestWindowBound:
    def test_time_zero(self, homogeneous):
        assert window_bound(0.0, homogeneous) == 1

    def test_unit_poisson(self, homogeneous):
        # P(Poisson(1) >= 14) ~ 4.5e-12, P(Poisson(1) >= 15) ~ 3e-13
        assert window_bound(1.0, homogeneous, 1e-12) == 15

    def test_smallest_bound_for_loose_eps(self, homogeneous):
        # mu = 10: P(X >= 3) ~ 0.9972, P(X >= 4) ~ 0.9897
        assert window_bound(10.0, homogeneous, 0.99) == 4

    def test_grows_with_rate(self):
        profile = make_profile(q=0.5, a4=2.0)
        k = window_bound(2.0, profile, 1e-12, n=3)
        assert k > 12
        assert math.exp(-12) * 12**k / math.factorial(k) < 1e-11

    def test_eps_must_be_positive(self, homogeneous):
        with pytest.raises(ValueError):
            window_bound(1.0, homogeneous, 0.0)


class TestOracleProb:
    def test_identity_at_time_zero(self, inhomogeneous):
        assert oracle_prob(state(2, 1), state(2, 1), 0.0, inhomogeneous) == pytest.approx(1.0)

    def test_outside_window_is_zero(self, inhomogeneous):
        assert oracle_prob(state(2, 1), state(0, 0), 0.5, inhomogeneous) == 0.0

    def test_dimension_mismatch(self, inhomogeneous):
        with pytest.raises(ValueError, match="particles"):
            oracle_prob(state(0, 0), state(0), 0.5, inhomogeneous)

    def test_distribution_frame(self, homogeneous):
        frame = oracle_distribution(state(0, 0), 0.3, homogeneous).to_frame()
        assert list(frame.columns) == ["state", "mass"]
        assert frame.loc[frame["state"] == "0,0", "mass"].iloc[0] == pytest.approx(math.exp(-0.75 * 0.3))

    def test_normalized(self, inhomogeneous):
        dist = oracle_distribution(state(1, 0, 0), 1.0, inhomogeneous)
        assert dist.total == pytest.approx(1.0, abs=1e-10)
        assert dist.leak < 1e-10
