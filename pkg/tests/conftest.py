import numpy as np
import pytest

from iscc_sim.sensing import SpectrumMask, TargetSet, WaveformConfig


@pytest.fixture
def cfg():
    return WaveformConfig()


@pytest.fixture
def gap_mask(cfg):
    return SpectrumMask.with_gap(cfg.num_subcarriers, 256)


@pytest.fixture
def three_targets():
    return TargetSet([312.4, 575.9, 871.2], [1.0, 0.8 * np.exp(1j * 1.1), 0.6 * np.exp(-2j)])
