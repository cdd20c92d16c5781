import math

import numpy as np
import pytest
from hypothesis import strategies as st

from causal_friendliness.core.models import ScenarioConfig
from causal_friendliness.core.tensor import BlochVector, DensityMatrix

TSIRELSON = 2 * math.sqrt(2)
R = 1 / math.sqrt(2)

_polar = st.floats(min_value=0.0, max_value=math.pi, allow_nan=False, allow_infinity=False)
_azimuth = st.floats(min_value=0.0, max_value=2 * math.pi, allow_nan=False, allow_infinity=False)


@st.composite
def bloch_vectors(draw):
    return BlochVector.from_angles(draw(_polar), draw(_azimuth))


@st.composite
def mixed_configs(draw):
    """Random observables on the maximally mixed input."""
    return ScenarioConfig(
        input_state=DensityMatrix.maximally_mixed(),
        charlie=draw(bloch_vectors()),
        alice=draw(bloch_vectors()),
        debbie=draw(bloch_vectors()),
        bob=draw(bloch_vectors()),
    )


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@pytest.fixture
def optimal_config() -> ScenarioConfig:
    return ScenarioConfig.complementary()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
