"""Direct-method (Gillespie) simulation of the q-TAZRP.

Trial i draws from its own Philox stream keyed by (seed, i), so results do
not depend on how trials are split across worker processes.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from itertools import groupby

import numpy as np

from qtazrp.models import Estimate, RateProfile, SimConfig, StateVector, is_weakly_decreasing
from qtazrp.qcore import jump_rate

logger = logging.getLogger(__name__)

State = tuple[int, ...]


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(trial,))))


def _active_events(coords: list[int], profile: RateProfile) -> list[tuple[int, int, float]]:
    """(index of the stack's top particle, site, rate) for every stack."""
    events, start = [], 0
    for site, group in groupby(coords):
        height = sum(1 for _ in group)
        events.append((start, site, jump_rate(profile, site, height)))
        start += height
    return events


def simulate_one(
    initial: StateVector,
    t: float,
    rng: np.random.Generator,
    profile: RateProfile,
) -> StateVector:
    """Run one trajectory up to time t and return the final state."""
    coords = list(initial.coords)
    clock = 0.0
    while True:
        events = _active_events(coords, profile)
        total = sum(rate for _, _, rate in events)
        clock += rng.exponential(1.0 / total)
        if clock > t:
            break
        pick = rng.random() * total
        for index, site, rate in events:
            pick -= rate
            if pick < 0:
                break
        # top particle leaves; it lands at the bottom of any stack at site + 1
        coords[index] = site + 1
        assert is_weakly_decreasing(coords), f"order broken at t={clock}: {coords}"
    return StateVector(coords=tuple(coords))


def _run_trials(config: SimConfig, start: int, stop: int) -> Counter[State]:
    counts: Counter[State] = Counter()
    for trial in range(start, stop):
        final = simulate_one(config.initial, config.t, trial_rng(config.seed, trial), config.profile)
        counts[final.coords] += 1
    return counts


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    bounds = np.linspace(0, trials, workers + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds, bounds[1:]) if b > a]


def sample_states(config: SimConfig) -> Counter[State]:
    """Histogram of final states over all trials."""
    if config.workers == 1 or config.trials < 2 * config.workers:
        counts = _run_trials(config, 0, config.trials)
    else:
        chunks = _chunks(config.trials, config.workers)
        counts = Counter()
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for part in pool.map(_run_trials, [config] * len(chunks), *zip(*chunks)):
                counts.update(part)
    logger.info(
        "simulated %d trials from %s to t=%g: %d distinct states",
        config.trials,
        config.initial,
        config.t,
        len(counts),
    )
    return counts


def estimate_prob(config: SimConfig, targets: Sequence[StateVector]) -> list[Estimate]:
    counts = sample_states(config)
    return [Estimate.from_hits(target, counts.get(target.coords, 0), config.trials) for target in targets]
