"""q-deformed combinatorics, stack bookkeeping and the extended product."""

from __future__ import annotations

import functools
import math
import operator
from collections.abc import Callable
from itertools import groupby
from typing import Any

import numpy as np

from qtazrp.errors import PoleError
from qtazrp.models import QParams, RateProfile, StackDecomposition, StateVector

POLE_RTOL = 1e-12


def q_integer(k: int, q: QParams) -> float:
    """[k]_q = (1 - q^k) / (1 - q) = 1 + q + ... + q^(k-1)."""
    return (1.0 - q.q**k) / (1.0 - q.q)


def q_factorial(k: int, q: QParams) -> float:
    """[k]_q! = (1-q)(1-q^2)...(1-q^k) / (1-q)^k, with [0]_q! = 1."""
    if k < 0:
        raise ValueError(f"q_factorial needs k >= 0, got {k}")
    return math.prod(q_integer(j, q) for j in range(1, k + 1))


def _require_ordered(state: StateVector, what: str) -> None:
    if not state.ordered:
        raise ValueError(f"{what} needs a weakly decreasing state, got {state.coords}")


def stacks(state: StateVector) -> StackDecomposition:
    """Group equal coordinates into (site, height) pairs, largest site first."""
    _require_ordered(state, "stacks")
    entries = tuple((site, sum(1 for _ in group)) for site, group in groupby(state.coords))
    return StackDecomposition(entries=entries)


def weight_W(state: StateVector, q: QParams) -> float:
    """Product of q-factorials of the stack heights; 1 when all sites differ."""
    return math.prod(q_factorial(h, q) for h in stacks(state).heights)


def rate_b(profile: RateProfile, site: int) -> float:
    return profile.a(site) * (1.0 - profile.q.q)


def jump_rate(profile: RateProfile, site: int, height: int) -> float:
    """Rate at which the top particle of a stack of ``height`` at ``site`` jumps."""
    return profile.a(site) * (1.0 - profile.q.q**height)


def check_pole(denominator: Any, scale: Any, what: str) -> None:
    """Raise :class:`PoleError` where ``|denominator| < 1e-12 * scale``.

    Works elementwise on numpy arrays as well as on scalars.
    """
    vanishing = np.abs(denominator) <= POLE_RTOL * np.abs(scale)
    if np.any(vanishing):
        raise PoleError(f"{what}: denominator vanishes")


def product(values) -> Any:
    return functools.reduce(operator.mul, values, 1.0)


def prod_prime(f: Callable[[int], Any], lower: int, upper: int) -> Any:
    """The extended product over k from ``lower`` to ``upper``.

    Ordinary product when upper >= lower, 1 when upper == lower - 1, and
    1 / prod_{k=upper+1}^{lower-1} f(k) when upper < lower - 1. ``f`` may
    return numpy arrays; the result then broadcasts the same way.
    """
    if upper >= lower:
        return product(f(k) for k in range(lower, upper + 1))
    if upper == lower - 1:
        return 1.0
    denominator = product(f(k) for k in range(upper + 1, lower))
    if np.any(denominator == 0):
        raise PoleError(f"extended product from {lower} to {upper}: a reciprocal factor is zero")
    return 1.0 / denominator
