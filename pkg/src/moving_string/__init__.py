"""Vibrating string with a moving, dash-pot damped end.

Two independent solvers share the profile and damping types: a
generalized Fourier series built on a solution of Moore's functional
equation (``spectral``) and a characteristics table (``characteristics``).
``energy`` turns either into energies, envelopes and two-sided estimates.
"""
from .characteristics import build_table
from .errors import StringModelError
from .moore import moore_for
from .profiles import make_damping, make_profile
from .spectral import compute_coefficients

__all__ = ["build_table", "compute_coefficients", "make_damping", "make_profile",
           "moore_for", "StringModelError"]
__version__ = "0.1.0"
