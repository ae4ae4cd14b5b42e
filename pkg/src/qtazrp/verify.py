"""Property suites: algebraic identities, evolution residuals and oracle agreement.

Each suite returns one :class:`CheckRecord` per (check, n) with the largest
residual seen over its randomized cases. Cases are drawn from
``np.random.default_rng([seed, n])`` so every suite is reproducible.
"""

from __future__ import annotations

import logging
from collections.abc import Callable

import numpy as np

from qtazrp.bethe import (
    Permutation,
    a_sigma,
    adjacent_pair_residual,
    b_factor,
    c_function,
    perm_sum_identity_residual,
    random_point,
)
from qtazrp.models import CheckRecord, ContourOptions, QParams, RateProfile, StateVector, TransitionRequest
from qtazrp.oracle import oracle_prob
from qtazrp.qcore import q_factorial, q_integer
from qtazrp.transition import (
    boundary_residual,
    free_evolution_residual,
    one_particle_contour,
    one_particle_prob,
    transition_probability,
)

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-10
ORACLE_EPS = 1e-12
Q_PANEL = (0.3, 0.5, 0.7)
RESIDUAL_Q_PANEL = (0.3, 0.5)
ORACLE_CASES = {1: 50, 2: 30, 3: 15}
# n >= 4 integrals and windows are too large for a routine suite
MAX_INTEGRAL_N = 3


def residual_tolerance(n: int) -> float:
    return 1e-9 if n == 1 else 1e-7 if n == 2 else 1e-6


def oracle_tolerance(n: int) -> float:
    return 1e-8 if n <= 2 else 1e-6


def _record(check: str, n: int, residuals: list[float], tolerance: float) -> CheckRecord:
    worst = max(residuals, default=0.0)
    passed = bool(np.isfinite(worst)) and worst < tolerance
    log = logger.info if passed else logger.warning
    log("%s n=%d: %d cases, max residual %.3e (tol %.1e)", check, n, len(residuals), worst, tolerance)
    return CheckRecord(
        check=check,
        n=n,
        cases=len(residuals),
        max_residual=worst,
        tolerance=tolerance,
        passed=passed,
    )


def random_profile(rng: np.random.Generator, q: float, low: int, high: int) -> RateProfile:
    """Conductances uniform on [0.5, 2] over sites low..high, default 1 elsewhere."""
    overrides = {site: float(rng.uniform(0.5, 2.0)) for site in range(low, high + 1)}
    return RateProfile(q=q, default_a=1.0, overrides=overrides)


def random_ordered_state(rng: np.random.Generator, n: int, low: int = 0, high: int = 2) -> StateVector:
    coords = sorted((int(c) for c in rng.integers(low, high + 1, size=n)), reverse=True)
    return StateVector(coords=tuple(coords))


def reachable_state(rng: np.random.Generator, initial: StateVector, spread: int = 2) -> StateVector:
    """An ordered state dominating ``initial`` coordinatewise."""
    moved = (y + int(rng.integers(0, spread + 1)) for y in initial.coords)
    return StateVector(coords=tuple(sorted(moved, reverse=True)))


def identity_checks(n_max: int, seed: int = 0, points: int = 100) -> list[CheckRecord]:
    records = []
    for n in range(1, n_max + 1):
        rng = np.random.default_rng([seed, n])
        perm_sum, c_values, pairs = [], [], []
        for _ in range(points):
            q = QParams(q=float(rng.choice(Q_PANEL)))
            w = random_point(n, q, rng)
            scale = max(1.0, abs(q_factorial(n, q) * b_factor(w, q)))
            perm_sum.append(abs(perm_sum_identity_residual(w, q)) / scale)
            c_values.append(abs(c_function(w, q) - q_integer(n, q)))
            if 2 <= n <= 5:
                mu = Permutation(tuple(int(i) + 1 for i in rng.permutation(n)))
                for k in range(1, n):
                    scale = max(1.0, abs(a_sigma(mu.swap_positions(k), w, q)))
                    pairs.append(abs(adjacent_pair_residual(mu, k, w, q)) / scale)
        records.append(_record("perm-sum", n, perm_sum, IDENTITY_TOL))
        records.append(_record("c-function", n, c_values, IDENTITY_TOL))
        if pairs:
            records.append(_record("adjacent-pair", n, pairs, IDENTITY_TOL))
    return records


def residual_checks(
    n_max: int,
    seed: int = 0,
    configs: int = 20,
    contour: ContourOptions | None = None,
) -> list[CheckRecord]:
    records = []
    for n in range(1, min(n_max, MAX_INTEGRAL_N) + 1):
        rng = np.random.default_rng([seed, n])
        free, boundary = [], []
        for _ in range(configs):
            q = float(rng.choice(RESIDUAL_Q_PANEL))
            profile = random_profile(rng, q, -3, 6)
            initial = random_ordered_state(rng, n)
            final = StateVector.relaxed([y + int(rng.integers(-1, 3)) for y in initial.coords])
            t = float(rng.uniform(0.0, 1.0))
            free.append(abs(free_evolution_residual(final, initial, t, profile, contour)))
            if n >= 2:
                k = int(rng.integers(1, n))
                x = int(rng.integers(0, 4))
                boundary.append(abs(boundary_residual(k, x, final, initial, t, profile, contour)))
        records.append(_record("free-evolution", n, free, residual_tolerance(n)))
        if boundary:
            records.append(_record("boundary", n, boundary, residual_tolerance(n)))
    return records


def oracle_match_checks(
    n_max: int,
    seed: int = 0,
    cases: dict[int, int] | None = None,
    contour: ContourOptions | None = None,
) -> list[CheckRecord]:
    cases = cases or ORACLE_CASES
    contour = contour or ContourOptions()
    records = []
    for n in range(1, min(n_max, MAX_INTEGRAL_N) + 1):
        rng = np.random.default_rng([seed, n])
        bethe_vs_oracle, closed_vs_contour = [], []
        for _ in range(cases.get(n, 0)):
            q = float(rng.choice(Q_PANEL))
            profile = random_profile(rng, q, -1, 6)
            initial = random_ordered_state(rng, n)
            final = reachable_state(rng, initial)
            t = float(rng.uniform(0.0, 2.0))
            reference = oracle_prob(initial, final, t, profile, ORACLE_EPS)
            if n == 1:
                y, x = initial.coords[0], final.coords[0]
                closed = one_particle_prob(y, x, t, profile, contour)
                bethe = one_particle_contour(y, x, t, profile, contour)
                closed_vs_contour.append(abs(closed - bethe))
                bethe_vs_oracle.append(abs(closed - reference))
            else:
                req = TransitionRequest(initial=initial, final=final, t=t, profile=profile, contour=contour)
                bethe = transition_probability(req).p
            bethe_vs_oracle.append(abs(bethe - reference))
        records.append(_record("oracle-match", n, bethe_vs_oracle, oracle_tolerance(n)))
        if closed_vs_contour:
            records.append(_record("closed-form", n, closed_vs_contour, oracle_tolerance(n)))
    return records


SUITES: dict[str, Callable[..., list[CheckRecord]]] = {
    "identities": identity_checks,
    "residuals": residual_checks,
    "oracle-match": oracle_match_checks,
}


def run_suite(name: str, n_max: int = 3, seed: int = 0, workers: int = 1) -> list[CheckRecord]:
    """Run one suite, or every suite for ``"all"``; integral suites use ``workers`` threads."""
    if name != "all" and name not in SUITES:
        raise ValueError(f"Unknown suite {name!r}; expected one of {sorted([*SUITES, 'all'])}")
    suites = SUITES.values() if name == "all" else [SUITES[name]]
    contour = ContourOptions(workers=workers)
    records = []
    for suite in suites:
        if suite is identity_checks:
            records.extend(suite(n_max, seed))
        else:
            records.extend(suite(n_max, seed, contour=contour))
    return records
