import math

import pytest

from fdccsim import FdcciiParams, Sin, build_allpass_netlist

R = 1e3
C = 1e-9
W0 = 1.0 / (R * C)  # 1e6 rad/s
F0 = W0 / (2.0 * math.pi)  # 159154.943... Hz


@pytest.fixture
def stage():
    """Ideal all-pass stage, R=1k C=1n, unit AC source."""
    return build_allpass_netlist(R, C)


@pytest.fixture
def stage_sin():
    """Same stage driven by a 1 V sine at its pole frequency."""
    return build_allpass_netlist(R, C, waveform=Sin(0.0, 1.0, F0))


def make_params(**kwargs) -> FdcciiParams:
    return FdcciiParams(**kwargs)
