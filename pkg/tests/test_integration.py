"""End-to-end panels: contour formula against the oracle, the closed forms and itself."""

import numpy as np
import pytest

from qtazrp.models import ContourOptions, StateVector, TransitionRequest
from qtazrp.oracle import oracle_prob
from qtazrp.transition import step_init_prob, transition_probability
from qtazrp.verify import identity_checks, oracle_match_checks, reachable_state, residual_checks

from helpers import fast_contour, make_profile, random_ordered_state, random_profile, state


def by_n(records, n):
    return {record.check: record for record in records if record.n == n}


def assert_passed(records):
    failed = [record for record in records if not record.passed]
    assert not failed, failed


def prob(initial, final, t, profile, contour=None):
    req = TransitionRequest(initial=initial, final=final, t=t, profile=profile, contour=contour or fast_contour())
    return transition_probability(req)


class TestOracleAgreement:
    def test_one_particle_three_ways(self):
        records = oracle_match_checks(1, seed=1)
        checks = by_n(records, 1)
        assert checks["oracle-match"].cases == 100
        assert checks["closed-form"].cases == 50
        assert_passed(records)

    def test_two_particles(self):
        records = oracle_match_checks(2, seed=2, cases={2: 30})
        assert by_n(records, 2)["oracle-match"].cases == 30
        assert_passed(records)

    @pytest.mark.slow
    def test_three_particles(self):
        records = oracle_match_checks(3, seed=3, cases={3: 15})
        assert by_n(records, 3)["oracle-match"].max_residual < 1e-6
        assert_passed(records)

    @pytest.mark.slow
    def test_four_particle_smoke(self):
        profile = make_profile(q=0.5)
        initial, final = state(0, 0, 0, 0), state(2, 1, 1, 0)
        contour = ContourOptions(nodes=64, max_nodes=64, allow_unconverged=True, workers=4)
        result = prob(initial, final, 0.5, profile, contour)
        assert result.p == pytest.approx(oracle_prob(initial, final, 0.5, profile), abs=1e-4)


class TestInitialCondition:
    @pytest.mark.parametrize("n", [1, 2, pytest.param(3, marks=pytest.mark.slow)])
    def test_recovers_identity(self, n, rng):
        profile = random_profile(rng, 0.5)
        panel = {random_ordered_state(rng, n).coords for _ in range(20)}
        start = StateVector(coords=min(panel))
        for coords in panel:
            value = prob(start, StateVector(coords=coords), 0.0, profile).p
            expected = 1.0 if coords == start.coords else 0.0
            assert value == pytest.approx(expected, abs=1e-8)

    @pytest.mark.parametrize("n", [1, 2, pytest.param(3, marks=pytest.mark.slow)])
    def test_step_form_matches_permutation_sum(self, n, rng):
        origin = StateVector.zeros(n)
        for _ in range(10 if n < 3 else 4):
            profile = random_profile(rng, float(rng.choice([0.3, 0.5, 0.7])))
            final = reachable_state(rng, origin)
            t = float(rng.uniform(0.0, 1.5))
            step = step_init_prob(final, t, profile, fast_contour())
            assert step.p == pytest.approx(prob(origin, final, t, profile).p, abs=1e-8)


class TestSuites:
    def test_identities_up_to_six(self):
        records = identity_checks(6, seed=5)
        assert {record.n for record in records} == set(range(1, 7))
        assert_passed(records)

    def test_residuals_two_particles(self):
        records = residual_checks(2, seed=6, contour=fast_contour())
        assert by_n(records, 2)["boundary"].cases == 20
        assert_passed(records)

    @pytest.mark.slow
    def test_residuals_three_particles(self):
        assert_passed(residual_checks(3, seed=7, contour=fast_contour()))


class TestContourRobustness:
    def test_radius_scale_panel(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            profile = random_profile(rng, float(rng.choice([0.3, 0.5, 0.7])))
            initial = random_ordered_state(rng, 2)
            final = reachable_state(rng, initial)
            t = float(rng.uniform(0.0, 2.0))
            base = prob(initial, final, t, profile, ContourOptions())
            wider = prob(initial, final, t, profile, ContourOptions(radius_scale=1.25))
            assert wider.p == pytest.approx(base.p, abs=1e-9)
