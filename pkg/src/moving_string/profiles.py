"""Length profiles, damping configuration and initial data.

A profile describes the moving end x = l(t) of the string on a finite
horizon [0, T].  Every constructor validates the subsonic assumption
|l'(t)| < 1 and positivity of l by dense sampling, since the solvers
downstream silently produce garbage otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import (
    Collapse,
    InitialDataError,
    NegativeDamping,
    NotReached,
    OutOfDomain,
    ProfileError,
    SpeedLimit,
    TransparentDamping,
)

ArrayFn = Callable[[np.ndarray], np.ndarray]

DEFAULT_SAMPLES = 10_000
TRANSPARENT_GUARD = 1e-6


class ProfileKind(str, Enum):
    CONSTANT = "constant"
    LINEAR = "linear"
    CUSTOM = "custom"


@dataclass(frozen=True)
class LengthProfile:
    kind: ProfileKind
    L: float
    T: float
    ell: ArrayFn = field(repr=False, compare=False)
    dell: ArrayFn = field(repr=False, compare=False)
    v: float = 0.0
    label: str = ""

    def __call__(self, t):
        return self.ell(t)

    def alpha(self, t):
        t = np.asarray(t, dtype=float)
        return t + self.ell(t)

    def beta(self, t):
        t = np.asarray(t, dtype=float)
        return t - self.ell(t)

    @property
    def xi_max(self) -> float:
        """Right end of the characteristic range needed on [0, T]."""
        return float(self.alpha(self.T))


def _const(L):
    def ell(t):
        return np.full_like(np.asarray(t, dtype=float), L)

    def dell(t):
        return np.zeros_like(np.asarray(t, dtype=float))

    return ell, dell


def _linear(L, v):
    def ell(t):
        return L + v * np.asarray(t, dtype=float)

    def dell(t):
        return np.full_like(np.asarray(t, dtype=float), v)

    return ell, dell


def validate_profile(profile: LengthProfile, samples: int = DEFAULT_SAMPLES,
                     fd_step: float = 1e-5) -> None:
    """Raise unless l > 0, |l'| < 1 and l' is consistent with l on [0, T]."""
    ts = np.linspace(0.0, profile.T, samples)
    lp = np.asarray(profile.dell(ts), dtype=float)
    if not np.all(np.abs(lp) < 1.0):
        worst = ts[np.argmax(np.abs(lp))]
        raise SpeedLimit(f"|l'(t)| >= 1 at t={worst:.6g} (l'={profile.dell(worst)})")
    ell = np.asarray(profile.ell(ts), dtype=float)
    if not np.all(ell > 0.0):
        worst = ts[np.argmin(ell)]
        raise Collapse(f"l(t) <= 0 at t={worst:.6g}")
    if abs(float(profile.ell(0.0)) - profile.L) > 1e-12 * max(1.0, profile.L):
        raise ProfileError(f"l(0)={float(profile.ell(0.0))} differs from L={profile.L}")
    # one-sided at the edges keeps the check inside [0, T]
    inner = ts[(ts >= fd_step) & (ts <= profile.T - fd_step)]
    if inner.size:
        fd = (profile.ell(inner + fd_step) - profile.ell(inner - fd_step)) / (2 * fd_step)
        err = np.max(np.abs(fd - profile.dell(inner)))
        if err > 1e-6:
            raise ProfileError(f"l' inconsistent with l: finite-difference mismatch {err:.3g}")


def make_profile(kind, L: float, v: float = 0.0, T: float = 1.0,
                 samples: int = DEFAULT_SAMPLES) -> LengthProfile:
    """Build a constant or linear profile l(t) = L + v t on [0, T]."""
    kind = ProfileKind(kind)
    if not L > 0:
        raise ProfileError(f"L must be positive, got {L}")
    if not T > 0:
        raise ProfileError(f"T must be positive, got {T}")
    if kind is ProfileKind.CONSTANT:
        ell, dell = _const(float(L))
        prof = LengthProfile(kind, float(L), float(T), ell, dell, 0.0, f"constant L={L}")
    elif kind is ProfileKind.LINEAR:
        if abs(v) >= 1.0:
            raise SpeedLimit(f"|v|={abs(v)} >= 1")
        if v < 0 and not T < L / abs(v):
            raise Collapse(f"l(t)=L+vt vanishes at t={L / abs(v):.6g} <= T={T}")
        ell, dell = _linear(float(L), float(v))
        prof = LengthProfile(kind, float(L), float(T), ell, dell, float(v),
                             f"linear L={L} v={v}")
    else:
        raise ProfileError("custom profiles go through make_custom_profile")
    validate_profile(prof, samples)
    return prof


def make_custom_profile(ell: ArrayFn, dell: ArrayFn, T: float, label: str = "custom",
                        samples: int = DEFAULT_SAMPLES) -> LengthProfile:
    """Wrap vectorised callables l, l' after checking admissibility on [0, T]."""
    if not T > 0:
        raise ProfileError(f"T must be positive, got {T}")
    L = float(ell(np.float64(0.0)))
    if not L > 0:
        raise Collapse(f"l(0)={L} is not positive")
    prof = LengthProfile(ProfileKind.CUSTOM, L, float(T), ell, dell, 0.0, label)
    validate_profile(prof, samples)
    return prof


def _bisect_increasing(fun, target, lo, hi, tol=1e-12, maxiter=200):
    """Vectorised bisection for fun(t) = target, fun increasing on [lo, hi]."""
    target = np.asarray(target, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), target.shape).copy()
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        below = fun(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= tol):
            break
    return 0.5 * (lo + hi)


def alpha(profile: LengthProfile, t):
    """alpha(t) = t + l(t), the moving-end image along the ingoing characteristic."""
    _check_time(profile, t)
    return profile.alpha(t)


def beta(profile: LengthProfile, t):
    """beta(t) = t - l(t)."""
    _check_time(profile, t)
    return profile.beta(t)


def _check_time(profile, t, slack=1e-12):
    t = np.asarray(t, dtype=float)
    if np.any(t < -slack) or np.any(t > profile.T * (1 + slack) + slack):
        raise OutOfDomain(f"t outside [0, {profile.T}]")


def inverse_alpha(profile: LengthProfile, xi, tol=1e-12):
    """Solve alpha(t) = xi for xi >= L (t may slightly exceed T)."""
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < profile.L - 1e-14):
        raise ProfileError("inverse_alpha needs xi >= L")
    # alpha(t) >= t while l > 0, so t = xi brackets from above
    hi = np.where(profile.alpha(profile.T) >= xi, profile.T, xi)
    return _bisect_increasing(profile.alpha, xi, 0.0, hi, tol)


def inverse_beta(profile: LengthProfile, y, tol=1e-12):
    """Solve beta(t) = y on [0, T] (requires -L <= y <= beta(T))."""
    y = np.asarray(y, dtype=float)
    if np.any(y < -profile.L - 1e-14) or np.any(y > profile.beta(profile.T) + 1e-14):
        raise ProfileError("inverse_beta argument outside [beta(0), beta(T)]")
    return _bisect_increasing(profile.beta, y, 0.0, profile.T, tol)


def extinction_time(profile: LengthProfile, tol: float = 1e-10) -> float:
    """Time after which a transparent end has absorbed every disturbance: beta(t) = L."""
    if float(profile.beta(profile.T)) < profile.L:
        raise NotReached(f"beta(T)={float(profile.beta(profile.T)):.6g} < L={profile.L}")
    lo, hi = 0.0, profile.T
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if float(profile.beta(mid)) < profile.L:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- damping -----------------------------------------------------------------

class Regime(str, Enum):
    UNDAMPED = "undamped"
    SUB = "sub"
    TRANSPARENT = "transparent"
    SUPER = "super"


@dataclass(frozen=True)
class DampingConfig:
    eta: float
    gamma: float | None
    log_abs_gamma: float | None
    regime: Regime

    @property
    def spectral_ok(self) -> bool:
        return self.regime is not Regime.TRANSPARENT and abs(self.eta - 1.0) >= TRANSPARENT_GUARD

    def require_spectral(self) -> None:
        if not self.spectral_ok:
            raise TransparentDamping(
                f"eta={self.eta} is (numerically) transparent; series solution undefined")


def make_damping(eta: float) -> DampingConfig:
    eta = float(eta)
    if eta < 0 or math.isnan(eta):
        raise NegativeDamping(f"eta must be >= 0, got {eta}")
    if eta == 1.0:
        return DampingConfig(eta, None, None, Regime.TRANSPARENT)
    gamma = (1.0 + eta) / (1.0 - eta)
    if eta == 0.0:
        regime = Regime.UNDAMPED
    elif eta < 1.0:
        regime = Regime.SUB
    else:
        regime = Regime.SUPER
    return DampingConfig(eta, gamma, math.log(abs(gamma)), regime)


# -- initial data ------------------------------------------------------------

class Preset(str, Enum):
    SINE_MODE = "sine_mode"
    TRIANGLE = "triangle"
    GAUSSIAN_VELOCITY_BUMP = "gaussian_velocity_bump"
    CUSTOM = "custom"


@dataclass(frozen=True)
class InitialData:
    """Initial shape u0 (with derivative u0x) and velocity u1 on [0, L].

    ``kinks`` lists interior points where u0x or u1 jump; quadratures split
    there.
    """
    L: float
    u0: ArrayFn = field(repr=False, compare=False)
    u0x: ArrayFn = field(repr=False, compare=False)
    u1: ArrayFn = field(repr=False, compare=False)
    preset: Preset = Preset.CUSTOM
    params: tuple = ()
    kinks: tuple = ()
    smooth: bool = True

    def extended(self, s):
        """Even extension of u0x plus odd extension of u1 on (-L, L)."""
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        return self.u0x(a) + np.sign(s) * self.u1(a)

    def breakpoints(self) -> list[float]:
        """Sorted breakpoints of the extended integrand on [-L, L]."""
        pts = {-self.L, 0.0, self.L}
        for k in self.kinks:
            pts.update((-k, k))
        return sorted(pts)


def validate_initial(init: InitialData, samples: int = 20_001) -> None:
    if abs(float(init.u0(np.float64(0.0)))) > 1e-12:
        raise InitialDataError(f"u0(0)={float(init.u0(np.float64(0.0)))} != 0")
    xs = np.union1d(np.linspace(0.0, init.L, samples), np.asarray(init.kinks, dtype=float))
    # midpoint sums never sample u0x on a kink, where it is one-sided
    mids = 0.5 * (xs[1:] + xs[:-1])
    recon = np.concatenate([[0.0], np.cumsum(init.u0x(mids) * np.diff(xs))])
    err = np.max(np.abs(recon - init.u0(xs)))
    if err > 1e-8:
        raise InitialDataError(f"u0x is not the derivative of u0 (quadrature mismatch {err:.3g})")


def sine_mode(L: float, k: int = 0, amplitude: float = 1.0) -> InitialData:
    """u0 = A sin((2k+1) pi x / 2L), u1 = 0: a standing wave of the fixed-free string."""
    kk = (2 * k + 1) * math.pi / (2 * L)
    init = InitialData(
        L,
        u0=lambda x: amplitude * np.sin(kk * np.asarray(x, dtype=float)),
        u0x=lambda x: amplitude * kk * np.cos(kk * np.asarray(x, dtype=float)),
        u1=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        preset=Preset.SINE_MODE,
        params=(("k", k), ("amplitude", amplitude)),
    )
    validate_initial(init)
    return init


def triangle(L: float, peak: float, amplitude: float = 1.0) -> InitialData:
    """Plucked string: piecewise linear shape with its apex at ``peak``."""
    if not 0 < peak < L:
        raise InitialDataError(f"peak must lie in (0, L), got {peak}")

    def u0(x):
        x = np.asarray(x, dtype=float)
        return amplitude * np.where(x <= peak, x / peak, (L - x) / (L - peak))

    def u0x(x):
        x = np.asarray(x, dtype=float)
        return amplitude * np.where(x <= peak, 1.0 / peak, -1.0 / (L - peak))

    init = InitialData(L, u0, u0x, lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                       Preset.TRIANGLE, (("peak", peak), ("amplitude", amplitude)),
                       kinks=(float(peak),), smooth=False)
    validate_initial(init)
    return init


def gaussian_velocity_bump(L: float, center: float | None = None, width: float | None = None,
                           amplitude: float = 1.0) -> InitialData:
    """String at rest position with a Gaussian velocity kick away from both ends."""
    c = 0.5 * L if center is None else float(center)
    w = 0.05 * L if width is None else float(width)
    if w <= 0:
        raise InitialDataError("width must be positive")

    def u1(x):
        x = np.asarray(x, dtype=float)
        return amplitude * np.exp(-0.5 * ((x - c) / w) ** 2)

    init = InitialData(L, lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                       lambda x: np.zeros_like(np.asarray(x, dtype=float)), u1,
                       Preset.GAUSSIAN_VELOCITY_BUMP,
                       (("center", c), ("width", w), ("amplitude", amplitude)))
    edge = max(abs(float(u1(np.float64(0.0)))), abs(float(u1(np.float64(L)))))
    if edge >= 1e-12 * max(1.0, abs(amplitude)):
        raise InitialDataError(f"velocity bump not interior: |u1| = {edge:.3g} at an end")
    validate_initial(init)
    return init


def custom_initial(L: float, u0: ArrayFn, u0x: ArrayFn, u1: ArrayFn,
                   kinks=(), smooth: bool = True) -> InitialData:
    init = InitialData(L, u0, u0x, u1, Preset.CUSTOM, (), tuple(float(k) for k in kinks), smooth)
    validate_initial(init)
    return init
