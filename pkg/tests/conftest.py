import numpy as np
import pytest

from cvqkd_rates import ChannelParams, ProtocolConfig


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


@pytest.fixture
def ref_config():
    """Modulation variance used throughout the region figures."""
    return ProtocolConfig(10.0)


@pytest.fixture
def ref_channel():
    """Lossy noisy x channel used throughout the region figures."""
    return ChannelParams(eta_x=0.1, eps_x=0.05)
