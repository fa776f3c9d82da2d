"""Generalized Fourier series solution.

With phi solving Moore's equation, the solution is

    u(x, t) = sum_n c_n (exp(w_n phi(t + x)) - exp(w_n phi(t - x)))

where w_n = -ln|gamma|/2 + i(2n+1)pi/2 (eta < 1) or -ln|gamma|/2 + i n pi
(eta > 1).  Writing u = f(t + x) - f(t - x), the traveling profile is
f'(xi) = phi'(xi) sum_n w_n c_n exp(w_n phi(xi)); everything below is
evaluated through f'.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfDomain, SeriesNotReal
from .moore import MooreMap
from .profiles import DampingConfig, InitialData, LengthProfile, Regime
from .quadrature import integrate

DEFAULT_N = 256
IMAG_TOL = 1e-9


def mode_indices(damping: DampingConfig, N: int) -> np.ndarray:
    """Symmetric index window: pairs (n, -n-1) for eta < 1, (n, -n) for eta > 1."""
    damping.require_spectral()
    if damping.eta < 1:
        return np.arange(-N, N)
    return np.arange(-N, N + 1)


def omega(n, damping: DampingConfig):
    damping.require_spectral()
    n = np.asarray(n)
    re = -0.5 * damping.log_abs_gamma
    if damping.eta < 1:
        return re + 1j * (2 * n + 1) * math.pi / 2
    return re + 1j * n * math.pi


def mode_exponentials(phi, w, sign: float = 1.0, block: int = 16):
    """exp(sign * phi w_n) for an equally spaced mode list, shape (len(phi), len(w)).

    Built as coarse * fine products, which costs two small exp tables
    instead of one full one and adds a single rounding per entry.
    """
    phi = np.asarray(phi, dtype=float)
    if w.size <= block:
        return np.exp(sign * np.outer(phi, w))
    step = w[1] - w[0]
    coarse = np.exp(sign * np.outer(phi, w[::block]))
    fine = np.exp(sign * np.outer(phi, step * np.arange(block)))
    out = (coarse[:, :, None] * fine[:, None, :]).reshape(phi.size, -1)
    return out[:, :w.size]


def series_sum(phi, w, amp, block: int = 16):
    """sum_n amp_n exp(w_n phi) for equally spaced w_n on a vertical line.

    Within each block of modes the sum is a polynomial in the unit-modulus
    z = exp((w_1 - w_0) phi), evaluated by Horner's rule; every block is
    anchored by its own exp(w_k phi) so phase errors cannot build up over
    more than ``block`` powers of z.
    """
    phi = np.asarray(phi, dtype=float)
    if w.size == 1:
        return amp[0] * np.exp(w[0] * phi)
    z = np.exp((w[1] - w[0]) * phi)
    total = np.zeros(phi.shape, dtype=complex)
    for k in range(0, w.size, block):
        chunk = amp[k:k + block]
        acc = np.full(phi.shape, chunk[-1], dtype=complex)
        for a in chunk[-2::-1]:
            acc *= z
            acc += a
        total += acc * np.exp(w[k] * phi)
    return total


@dataclass(frozen=True)
class ModeSet:
    damping: DampingConfig
    moore: MooreMap = field(repr=False)
    N: int
    indices: np.ndarray = field(repr=False)
    omegas: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)
    profile: LengthProfile | None = field(default=None, repr=False)

    @property
    def weights(self):
        """w_n c_n, the coefficients of f'/phi'."""
        return self.omegas * self.coeffs

    @property
    def parseval_sum(self) -> float:
        """S_eta = 2 sum |w_n c_n|^2 (equals S_0 when eta = 0)."""
        return 2.0 * parseval_lhs(self)

    def _series(self, phi, amp):
        return series_sum(np.ravel(phi), self.omegas, amp)

    def _real(self, z, scale):
        bad = np.abs(z.imag) > IMAG_TOL * np.maximum(1.0, scale)
        if np.any(bad):
            raise SeriesNotReal(f"imaginary residue {np.abs(z.imag).max():.3g}")
        return z.real

    def fprime(self, xi):
        xi = np.asarray(xi, dtype=float)
        phi = self.moore.phi(xi)
        dphi = self.moore.phi_prime(xi)
        z = self._series(phi, self.weights).reshape(xi.shape)
        scale = np.sum(np.abs(self.weights)) * np.exp(np.max(self.omegas.real) * phi)
        return self._real(z * dphi, scale * dphi)

    def f(self, xi):
        xi = np.asarray(xi, dtype=float)
        phi = self.moore.phi(xi)
        z = self._series(phi, self.coeffs).reshape(xi.shape)
        return self._real(z, np.sum(np.abs(self.coeffs)) * np.exp(np.max(self.omegas.real) * phi))

    def _check_xt(self, x, t):
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        if self.profile is not None:
            ell = self.profile.ell(t)
            if np.any(x < -1e-12) or np.any(x > ell + 1e-12):
                raise OutOfDomain("x outside [0, l(t)]")
        return x, t

    def ut_ux(self, x, t):
        x, t = self._check_xt(x, t)
        fp, fm = self.fprime(t + x), self.fprime(t - x)
        return fp - fm, fp + fm


def compute_coefficients(init: InitialData, moore: MooreMap, damping: DampingConfig,
                         N: int = DEFAULT_N, quad_tol: float = 1e-10,
                         profile: LengthProfile | None = None,
                         perturb: float = 0.0) -> ModeSet:
    """c_n = (1 / 4w_n) int_{-L}^{L} (u0x_even + u1_odd) exp(-w_n phi) dx.

    ``perturb`` scales every coefficient by (1 + perturb); it exists only
    for fault-injection runs.
    """
    damping.require_spectral()
    L = init.L
    idx = mode_indices(damping, N)
    w = omega(idx, damping)
    dphi_max = float(np.max(moore.phi_prime(np.linspace(-L, L, 2049))))
    period = 2 * math.pi / np.max(np.abs(w.imag)) / dphi_max
    h = init.extended

    def integrand(x):
        return h(x)[:, None] * mode_exponentials(moore.phi(x), w, -1.0)

    integral = integrate(integrand, init.breakpoints(), abs_tol=quad_tol, max_width=period / 4)
    c = integral / (4 * w) * (1.0 + perturb)
    return ModeSet(damping, moore, N, idx, w, c, profile)


def eval_u(modes: ModeSet, x, t):
    x, t = modes._check_xt(x, t)
    return modes.f(t + x) - modes.f(t - x)


def eval_ux(modes: ModeSet, x, t):
    return modes.ut_ux(x, t)[1]


def eval_ut(modes: ModeSet, x, t):
    return modes.ut_ux(x, t)[0]


def parseval_lhs(modes: ModeSet) -> float:
    return float(np.sum(np.abs(modes.weights) ** 2))


def parseval_rhs(init: InitialData, moore: MooreMap, damping: DampingConfig,
                 quad_tol: float = 1e-12) -> float:
    """(1/8) int_{-L}^{L} (u0x_even + u1_odd)^2 |gamma|^phi / phi' dx."""
    damping.require_spectral()
    a = damping.log_abs_gamma

    def integrand(x):
        return init.extended(x) ** 2 * np.exp(a * moore.phi(x)) / moore.phi_prime(x)

    return float(integrate(integrand, init.breakpoints(), abs_tol=quad_tol,
                           max_width=init.L / 32)) / 8.0


def s0_from_coefficients(modes: ModeSet) -> float:
    """S_0 = (pi^2 / 2) sum |(2n+1) c_n|^2, the undamped invariant."""
    if modes.damping.regime is not Regime.UNDAMPED:
        raise ValueError("S_0 is defined for eta = 0 only")
    return float(math.pi ** 2 / 2 * np.sum(np.abs((2 * modes.indices + 1) * modes.coeffs) ** 2))


def tail_fraction(modes: ModeSet) -> float:
    """Share of sum |w_n c_n|^2 carried by the outermost 10% of modes."""
    if modes.N < 8:
        raise ValueError("tail_fraction needs N >= 8")
    power = np.abs(modes.weights) ** 2
    total = power.sum()
    if total == 0:
        return 0.0
    # distance from the centre of the symmetric window
    centre = -0.5 if modes.damping.eta < 1 else 0.0
    order = np.argsort(-np.abs(modes.indices - centre), kind="stable")
    k = int(math.ceil(0.1 * power.size))
    return float(power[order[:k]].sum() / total)


def coefficients_at_time(fprime, moore: MooreMap, damping: DampingConfig,
                         profile: LengthProfile, indices, t: float,
                         quad_tol: float = 1e-10) -> np.ndarray:
    """c_n recomputed from the traveling profile at time t.

    Uses c_n = (1 / 2w_n) int_{t-l}^{t+l} f'(xi) exp(-w_n phi(xi)) dxi, which
    must not depend on t.  ``fprime`` can come from any solver.
    """
    w = omega(indices, damping)
    lo, hi = float(profile.beta(t)), float(profile.alpha(t))
    dphi_max = float(np.max(moore.phi_prime(np.linspace(lo, hi, 2049))))
    period = 2 * math.pi / np.max(np.abs(w.imag)) / dphi_max

    def integrand(xi):
        return fprime(xi)[:, None] * mode_exponentials(moore.phi(xi), w, -1.0)

    return integrate(integrand, [lo, hi], abs_tol=quad_tol, max_width=period / 4) / (2 * w)
