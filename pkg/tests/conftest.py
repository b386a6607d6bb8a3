import math

import numpy as np
import pytest

from rydgate.core import (
    Direct,
    ExcitationProfile,
    GateConfig,
    GridSpec,
    calibrate_c6,
)


def make_config(d=21.0, w_par=3.0, w_perp=8.0, t=5.0, phase=math.pi,
                protocol=Direct(), n=256, ext=5.0, c6=None, **kwargs):
    """Two identical clouds on the x axis, c6 calibrated unless given."""
    c6v = c6 if c6 is not None else calibrate_c6(d, t, phase)
    if c6 is None:
        kwargs.setdefault("c6_calibrated", True)
    p1 = ExcitationProfile(w_par=w_par, w_perp=w_perp,
                           center=(d / 2, 0, 0), k0=(0, 0, 8.06))
    p2 = ExcitationProfile(w_par=w_par, w_perp=w_perp,
                           center=(-d / 2, 0, 0), k0=(0, 0, 8.06))
    return GateConfig(profile1=p1, profile2=p2, separation=(d, 0, 0),
                      c6=c6v, t_int=t, protocol=protocol,
                      grid=GridSpec(n, ext), **kwargs)


@pytest.fixture
def paper_point():
    """The headline working point: d=21 um, w=(3,8) um, pi phase in 5 us."""
    return make_config()


@pytest.fixture
def raw_config():
    """Minimal valid raw config document."""
    return {
        "profile1": {"w_par": "3", "w_perp": "8"},
        "profile2": {"w_par": "3", "w_perp": "8"},
        "geometry": {"separation": "21 0 0"},
        "interaction": {"calibrate_time": "5", "calibrate_phase": "pi"},
    }
