import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

CONFIG_GRID = [
    (bits, pol, n)
    for bits in (2, 4, 8)
    for pol in ("unipolar", "bipolar")
    for n in (1, 2, 4, 8)
]


def chunked_unary(magnitude, n):
    """Oracle: a plain 1-per-cycle pulse of ``magnitude`` ones, regrouped n at a time."""
    ones = [1] * magnitude
    chunks = [ones[i : i + n] for i in range(0, magnitude, n)]
    return [(True, len(c) if len(c) < n else 0) for c in chunks]


def value_bounds(bits, polarity):
    if polarity == "unipolar":
        return 0, 2**bits - 1
    return -(2 ** (bits - 1)), 2 ** (bits - 1) - 1


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
