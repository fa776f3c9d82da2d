import numpy as np
import pytest
from hypothesis import settings

from moving_string.moore import moore_for
from moving_string.profiles import gaussian_velocity_bump, make_damping, make_profile
from moving_string.spectral import compute_coefficients

settings.register_profile("default", max_examples=40, deadline=None, derandomize=True)
settings.load_profile("default")


class Setup:
    """Profile, damping, bump data, Moore map and coefficients for one case."""

    def __init__(self, kind, v, T, eta, L=1.0, N=256):
        self.profile = make_profile(kind, L, v, T)
        self.damping = make_damping(eta)
        self.init = gaussian_velocity_bump(L)
        self.moore = moore_for(self.profile)
        self.modes = compute_coefficients(self.init, self.moore, self.damping, N=N,
                                          profile=self.profile)


_CACHE = {}


@pytest.fixture(scope="session")
def setup():
    def get(kind="linear", v=0.5, T=3.0, eta=0.5, **kw):
        key = (kind, v, T, eta, tuple(sorted(kw.items())))
        if key not in _CACHE:
            _CACHE[key] = Setup(kind, v, T, eta, **kw)
        return _CACHE[key]
    return get


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
