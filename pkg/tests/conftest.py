"""Shared test fixtures."""

import numpy as np
import pytest

from qtazrp.models import RateProfile
from helpers import make_profile


@pytest.fixture()
def homogeneous() -> RateProfile:
    """a = 1 everywhere, q = 0.5, so b = 0.5."""
    return RateProfile.homogeneous(0.5)


@pytest.fixture()
def unit_b() -> RateProfile:
    """b = 1 everywhere at q = 0.5."""
    return RateProfile.homogeneous(0.5, 2.0)


@pytest.fixture()
def inhomogeneous() -> RateProfile:
    return make_profile(q=0.5, a0=1.0, a1=2.0, a2=0.7, a3=1.4, am1=1.6)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)
