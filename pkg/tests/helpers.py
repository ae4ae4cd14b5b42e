"""Shared test helpers."""

import numpy as np

from qtazrp import verify
from qtazrp.models import ContourOptions, RateProfile, StateVector
from qtazrp.verify import random_ordered_state  # noqa: F401


def make_profile(q: float = 0.5, default_a: float = 1.0, **overrides) -> RateProfile:
    """Create a RateProfile; keyword overrides are ``a<site>=value``, ``am<site>`` for negative sites."""
    sites = {}
    for key, value in overrides.items():
        site = -int(key[2:]) if key.startswith("am") else int(key[1:])
        sites[site] = value
    return RateProfile(q=q, default_a=default_a, overrides=sites)


def state(*coords: int) -> StateVector:
    return StateVector(coords=coords)


def random_profile(rng: np.random.Generator, q: float, low: int = -2, high: int = 6) -> RateProfile:
    return verify.random_profile(rng, q, low, high)


def fast_contour(**overrides) -> ContourOptions:
    """Looser settings for multi-particle integrals in unit tests."""
    settings = dict(nodes=32, max_nodes=256, tol=1e-11)
    settings.update(overrides)
    return ContourOptions(**settings)
