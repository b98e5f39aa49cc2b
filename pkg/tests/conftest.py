from __future__ import annotations

import numpy as np
import pytest

from mdlest.channel import ChannelModel, GaussianNoise, gaussian_channel, matrix_operator
from mdlest.quantizer import QuantGrid


@pytest.fixture
def two_level_grid() -> QuantGrid:
    return QuantGrid(levels=np.array([-1.0, 1.0]), kind="adaptive")


def random_identity_channel(n: int, sigma2: float, seed: int) -> ChannelModel:
    rng = np.random.default_rng(seed)
    return gaussian_channel(rng.normal(0.0, 1.0, n), sigma2)


def random_matrix_channel(m: int, n: int, sigma2: float, seed: int) -> ChannelModel:
    rng = np.random.default_rng(seed)
    j = rng.normal(0.0, 1.0 / np.sqrt(m), (m, n))
    y = rng.normal(0.0, 1.0, m)
    return ChannelModel(operator=matrix_operator(j), noise=GaussianNoise(sigma2), y=y)
