import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from superlac.frequencies import ExplicitFrequencies
from superlac.series import ExplicitCoefficients, SeriesSpec

# Numerical properties are cheap per example but some build mpmath contexts;
# the deadline is noise, determinism is not.
settings.register_profile(
    "numeric",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("numeric")


@pytest.fixture
def exp_it() -> SeriesSpec:
    """f(t) = exp(i t): the one series whose modulus is known in closed form."""
    return SeriesSpec(
        frequencies=ExplicitFrequencies({1: 1}),
        coefficients=ExplicitCoefficients({1: 1.0 + 0.0j}),
        truncation=1,
        label="exp(it)",
    )


@pytest.fixture
def small_two_sided() -> SeriesSpec:
    """Tiny two-sided series with hand-checkable numbers."""
    return SeriesSpec(
        frequencies=ExplicitFrequencies({1: 3, 2: 9, -1: -3, -2: -9}),
        coefficients=ExplicitCoefficients({1: 0.5, 2: 0.25, -1: 0.5, -2: 0.25}),
        truncation=2,
        label="toy",
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260815)
