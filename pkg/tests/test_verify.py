"""Tests for the property suites."""

import numpy as np
import pytest

from qtazrp.verify import (
    SUITES,
    identity_checks,
    oracle_match_checks,
    reachable_state,
    residual_tolerance,
    run_suite,
)

from helpers import fast_contour, random_profile, state


class TestHelpers:
    def test_tolerances_loosen_with_n(self):
        assert residual_tolerance(1) < residual_tolerance(2) < residual_tolerance(3)
        assert residual_tolerance(2) == 1e-7

    def test_reachable_state_dominates(self, rng):
        start = state(3, 1, 1)
        for _ in range(50):
            target = reachable_state(rng, start)
            assert target.ordered
            assert all(x >= y for x, y in zip(target.coords, start.coords))

    def test_random_profile_range(self, rng):
        profile = random_profile(rng, 0.3, 0, 4)
        assert set(profile.overrides) == {0, 1, 2, 3, 4}
        assert all(0.5 <= a <= 2.0 for a in profile.overrides.values())
        assert profile.a(10) == 1.0


class TestSuites:
    def test_identity_records(self):
        records = identity_checks(3, seed=1, points=20)
        assert [(r.check, r.n) for r in records[:3]] == [("perm-sum", 1), ("c-function", 1), ("perm-sum", 2)]
        assert all(r.passed for r in records)
        assert all(r.cases == 20 for r in records if r.check != "adjacent-pair")

    def test_seed_reproducible(self):
        first = identity_checks(2, seed=4, points=10)
        second = identity_checks(2, seed=4, points=10)
        assert first == second

    def test_oracle_match_small(self):
        records = oracle_match_checks(2, seed=9, cases={1: 3, 2: 2}, contour=fast_contour())
        assert {(r.check, r.n) for r in records} == {("oracle-match", 1), ("closed-form", 1), ("oracle-match", 2)}
        assert all(r.passed for r in records)

    def test_failure_is_reported(self, monkeypatch):
        import qtazrp.verify as verify

        monkeypatch.setattr(verify, "c_function", lambda w, q: np.nan)
        records = identity_checks(1, points=5)
        c_record = next(r for r in records if r.check == "c-function")
        assert not c_record.passed

    def test_registry(self):
        assert set(SUITES) == {"identities", "residuals", "oracle-match"}

    def test_unknown_suite(self):
        with pytest.raises(ValueError, match="Unknown suite"):
            run_suite("nonsense")

    def test_workers_reproduce_serial(self):
        serial = run_suite("residuals", n_max=2, seed=3)
        threaded = run_suite("residuals", n_max=2, seed=3, workers=2)
        assert serial == threaded
