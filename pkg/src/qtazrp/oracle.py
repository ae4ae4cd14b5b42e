"""Reference solver: the master equation on a truncated window, evolved by uniformization.

Particles only move right, so the window is bounded below by the initial
state and above by a ceiling chosen from a Poisson bound on the total number
of jumps. Probability that would cross the ceiling is absorbed and reported
as leak.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator
from dataclasses import dataclass, field
from itertools import groupby, islice

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.stats import poisson

from qtazrp.errors import StateSpaceTooLarge
from qtazrp.models import RateProfile, StateVector
from qtazrp.qcore import jump_rate

logger = logging.getLogger(__name__)

STATE_CAP = 2_000_000
POISSON_TAIL = 1e-14
DEFAULT_EPS = 1e-12

State = tuple[int, ...]


def enumerate_states(lower: State, ceiling: int) -> Iterator[State]:
    """Weakly decreasing x with lower[k] <= x[k] <= ceiling, lexicographically descending."""
    n = len(lower)

    def descend(prefix: State) -> Iterator[State]:
        k = len(prefix)
        if k == n:
            yield prefix
            return
        top = prefix[-1] if prefix else ceiling
        for x in range(top, lower[k] - 1, -1):
            yield from descend((*prefix, x))

    return descend(())


@dataclass(frozen=True)
class StateWindow:
    lower: StateVector
    ceiling: int
    states: tuple[State, ...]
    index: dict[State, int] = field(repr=False, compare=False)

    @classmethod
    def build(cls, lower: StateVector, ceiling: int, cap: int = STATE_CAP) -> StateWindow:
        if not lower.ordered:
            raise ValueError(f"window floor {lower.coords} is not weakly decreasing")
        if ceiling < max(lower.coords):
            raise ValueError(f"ceiling {ceiling} is below the initial state {lower.coords}")
        states = tuple(islice(enumerate_states(lower.coords, ceiling), cap + 1))
        if len(states) > cap:
            raise StateSpaceTooLarge(
                f"window {lower} .. {ceiling} holds more than {cap} states; lower t or eps tolerance"
            )
        return cls(lower=lower, ceiling=ceiling, states=states, index={s: i for i, s in enumerate(states)})

    @property
    def floor(self) -> int:
        return min(self.lower.coords)

    @property
    def size(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class Generator:
    """Off-diagonal rates (row = source), exit rates and the part of each exit lost past the ceiling."""

    window: StateWindow
    rates: sparse.csr_matrix
    exit_rates: np.ndarray
    leak_rates: np.ndarray

    @property
    def uniformization_rate(self) -> float:
        return float(self.exit_rates.max(initial=0.0))

    def row_sums(self) -> np.ndarray:
        """Row sums of H; zero except on rows that leak."""
        return np.asarray(self.rates.sum(axis=1)).ravel() - self.exit_rates


def _moves(state: State, profile: RateProfile) -> Iterator[tuple[State, float]]:
    """Top particle of each stack hops one site right."""
    start = 0
    for site, group in groupby(state):
        height = sum(1 for _ in group)
        target = (*state[:start], site + 1, *state[start + 1 :])
        yield target, jump_rate(profile, site, height)
        start += height


def build_generator(window: StateWindow, profile: RateProfile) -> Generator:
    size = window.size
    rows, cols, data = [], [], []
    exit_rates = np.zeros(size)
    leak_rates = np.zeros(size)
    for i, state in enumerate(window.states):
        for target, rate in _moves(state, profile):
            exit_rates[i] += rate
            if target[0] > window.ceiling:
                leak_rates[i] += rate
                continue
            rows.append(i)
            cols.append(window.index[target])
            data.append(rate)
    rates = sparse.csr_matrix((data, (rows, cols)), shape=(size, size))
    return Generator(window=window, rates=rates, exit_rates=exit_rates, leak_rates=leak_rates)


@dataclass(frozen=True)
class Distribution:
    window: StateWindow
    mass: np.ndarray
    leak: float = 0.0

    @classmethod
    def point_mass(cls, window: StateWindow, state: StateVector) -> Distribution:
        mass = np.zeros(window.size)
        mass[window.index[state.coords]] = 1.0
        return cls(window=window, mass=mass)

    def prob(self, state: StateVector) -> float:
        if state.n != self.window.lower.n:
            raise ValueError(f"state {state} has {state.n} particles, window has {self.window.lower.n}")
        i = self.window.index.get(state.coords)
        return 0.0 if i is None else float(self.mass[i])

    @property
    def total(self) -> float:
        return float(self.mass.sum()) + self.leak

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "state": [",".join(str(c) for c in s) for s in self.window.states],
                "mass": self.mass,
            }
        )


def evolve(gen: Generator, initial: Distribution, t: float, tail: float = POISSON_TAIL) -> Distribution:
    """P(t) = sum_m Poisson(m; L t) * P(0) S^m with S = I + H / L.

    Leaked mass is tracked as an absorbing cemetery state of the uniformized
    chain. The series stops once the Poisson tail falls below ``tail``.
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    rate = gen.uniformization_rate
    if t == 0 or rate == 0:
        return initial
    mu = rate * t
    steps = int(poisson.isf(tail, mu)) + 1
    weights = poisson.pmf(np.arange(steps + 1), mu)

    flow = gen.rates.T.tocsr()
    stay = 1.0 - gen.exit_rates / rate
    p = initial.mass.copy()
    cemetery = 0.0
    mass = weights[0] * p
    leak = 0.0
    for weight in weights[1:]:
        cemetery += float(p @ gen.leak_rates) / rate
        p = stay * p + flow @ p / rate
        mass += weight * p
        leak += weight * cemetery
    logger.debug("uniformization: L=%.4g, %d Poisson terms", rate, steps)
    return Distribution(window=initial.window, mass=mass, leak=initial.leak + leak)


def window_bound(t: float, profile: RateProfile, eps: float = DEFAULT_EPS, n: int = 1) -> int:
    """Smallest K with P(Poisson(n * a_max * t) >= K) < eps.

    The total jump rate never exceeds n * a_max, so no particle travels K
    sites except with probability below eps.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    mu = n * profile.a_max() * t
    if mu == 0:
        return 1
    k = 0
    while poisson.sf(k - 1, mu) >= eps:
        k += 1
    return k


def oracle_distribution(
    initial: StateVector,
    t: float,
    profile: RateProfile,
    eps: float = DEFAULT_EPS,
    cap: int = STATE_CAP,
) -> Distribution:
    k = window_bound(t, profile, eps, initial.n)
    window = StateWindow.build(initial, max(initial.coords) + k, cap)
    logger.info("oracle window: %d states, ceiling %d (K=%d)", window.size, window.ceiling, k)
    gen = build_generator(window, profile)
    return evolve(gen, Distribution.point_mass(window, initial), t)


def oracle_prob(
    initial: StateVector,
    final: StateVector,
    t: float,
    profile: RateProfile,
    eps: float = DEFAULT_EPS,
) -> float:
    return oracle_distribution(initial, t, profile, eps).prob(final)
