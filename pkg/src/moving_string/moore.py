"""Solutions of Moore's functional equation phi(t + l(t)) - phi(t - l(t)) = 2.

Closed forms exist for constant and linear profiles.  Any other admissible
profile is handled by pulling points back along characteristics until they
land in the seed interval [-L, L], where a C^1 seed is prescribed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline, PPoly

from .errors import DomainExceeded, OutOfDomain, RecursionDepth, SeedMismatch
from .profiles import LengthProfile, ProfileKind, inverse_alpha

GRID_PER_UNIT = 2 ** 14
MAX_BOUNCES = 10_000
_DOMAIN_TOL = 1e-9


class MooreSource(str, Enum):
    CLOSED_FORM_CONSTANT = "closed_form_constant"
    CLOSED_FORM_LINEAR = "closed_form_linear"
    NUMERIC_RECURSION = "numeric_recursion"


@dataclass(frozen=True)
class MooreMap:
    """phi and phi' on the characteristic interval [lo, hi]."""
    lo: float
    hi: float
    source: MooreSource
    _phi: object = field(repr=False)
    _dphi: object = field(repr=False)
    table: tuple | None = field(default=None, repr=False)
    kinks: tuple = field(default=(), repr=False)

    def _check(self, xi):
        xi = np.asarray(xi, dtype=float)
        if np.any(xi < self.lo - _DOMAIN_TOL) or np.any(xi > self.hi + _DOMAIN_TOL):
            raise OutOfDomain(
                f"xi in [{xi.min():.6g}, {xi.max():.6g}] outside [{self.lo:.6g}, {self.hi:.6g}]")
        return xi

    def phi(self, xi):
        return self._phi(self._check(xi))

    def phi_prime(self, xi):
        return self._dphi(self._check(xi))

    @property
    def normalization(self) -> float:
        """Value of phi at the left end -L (phi(0) = 0 by construction)."""
        return float(self._phi(np.float64(self.lo)))

    def tabulate(self, n: int | None = None):
        """(xi, phi, phi') on a uniform grid, or the construction grid if there is one."""
        if n is None and self.table is not None:
            return self.table
        hi = self.hi if math.isfinite(self.hi) else self.lo + 10.0
        xi = np.linspace(self.lo, hi, n or 4097)
        return xi, self._phi(xi), self._dphi(xi)


def moore_constant(L: float, ximax: float = math.inf) -> MooreMap:
    """phi(xi) = xi / L."""
    return MooreMap(-float(L), float(ximax), MooreSource.CLOSED_FORM_CONSTANT,
                    lambda xi: np.asarray(xi, dtype=float) / L,
                    lambda xi: np.full_like(np.asarray(xi, dtype=float), 1.0 / L))


def moore_linear(L: float, v: float, ximax: float | None = None) -> MooreMap:
    """Closed form for l(t) = L + v t, normalised so that phi(0) = 0.

    phi(xi) = 2 ln((L + v xi) / L) / ln((1 + v) / (1 - v)).
    """
    if not 0 < abs(v) < 1:
        raise DomainExceeded(f"moore_linear needs 0 < |v| < 1, got v={v}")
    if ximax is None:
        ximax = math.inf if v > 0 else L / abs(v)
    if v < 0 and L + v * ximax < 0:
        raise DomainExceeded(f"L + v xi <= 0 before xi_max={ximax}")
    k = 2.0 / math.log((1 + v) / (1 - v))

    def phi(xi):
        return k * np.log1p(v * np.asarray(xi, dtype=float) / L)

    def dphi(xi):
        return k * v / (L + v * np.asarray(xi, dtype=float))

    if v < 0 and L + v * ximax == 0:
        # open right end: evaluation at the collapse point itself is refused
        ximax = np.nextafter(ximax, -math.inf)
    return MooreMap(-float(L), float(ximax), MooreSource.CLOSED_FORM_LINEAR, phi, dphi)


def moore_for(profile: LengthProfile, ximax: float | None = None, **kwargs) -> MooreMap:
    """Closed form when one is known, numeric recursion otherwise."""
    xm = profile.xi_max if ximax is None else ximax
    if profile.kind is ProfileKind.CONSTANT:
        return moore_constant(profile.L, xm)
    if profile.kind is ProfileKind.LINEAR and profile.v != 0:
        return moore_linear(profile.L, profile.v, xm)
    if profile.kind is ProfileKind.LINEAR:
        return moore_constant(profile.L, xm)
    return moore_numeric(profile, ximax=ximax, **kwargs)


def _hermite_seed(profile: LengthProfile):
    L = profile.L
    lp0 = float(profile.dell(np.float64(0.0)))
    r = (1 + lp0) / (1 - lp0)
    d_minus, d_plus = math.sqrt(r) / L, 1.0 / (math.sqrt(r) * L)
    shift = -(1.0 + L * (d_minus - d_plus) / 4.0)   # puts phi(0) at 0
    spline = CubicHermiteSpline([-L, L], [shift, shift + 2.0], [d_minus, d_plus])
    return spline, spline.derivative()


def _check_seed(profile, phi, dphi, samples=4097):
    L = profile.L
    jump = float(phi(np.float64(L)) - phi(np.float64(-L)))
    if abs(jump - 2.0) > 1e-12:
        raise SeedMismatch(f"seed must satisfy phi(L) - phi(-L) = 2, got {jump!r}")
    lp0 = float(profile.dell(np.float64(0.0)))
    lhs = (1 + lp0) / (1 - lp0) * float(dphi(np.float64(L)))
    rhs = float(dphi(np.float64(-L)))
    if abs(lhs - rhs) > 1e-9 * max(1.0, abs(rhs)):
        raise SeedMismatch(f"seed slopes violate the C1 gluing condition: {lhs!r} vs {rhs!r}")
    xs = np.linspace(-L, L, samples)
    if not np.all(dphi(xs) > 0):
        raise SeedMismatch("seed is not strictly increasing on [-L, L]")


def _junctions(profile: LengthProfile, ximax: float, cap: int):
    """L and its forward images xi -> alpha(beta^{-1}(xi)); phi'' may jump there."""
    from .profiles import _bisect_increasing

    pts = [profile.L]
    while len(pts) < cap:
        y = pts[-1]
        hi = profile.T
        while float(profile.beta(hi)) < y:
            hi *= 2.0
            if hi > 1e6:
                return pts
        t = float(_bisect_increasing(profile.beta, np.float64(y), 0.0, hi))
        nxt = float(profile.alpha(t))
        if nxt > ximax:
            break
        pts.append(nxt)
    return pts


def pull_back(profile: LengthProfile, xi, max_bounces: int = MAX_BOUNCES):
    """Follow characteristics from xi back into [-L, L].

    Returns (x, bounces, slope) with phi(xi) = phi(x) + 2 bounces and
    phi'(xi) = slope * phi'(x).
    """
    x = np.array(xi, dtype=float, copy=True)
    bounces = np.zeros(x.shape, dtype=int)
    slope = np.ones(x.shape)
    L = profile.L
    for _ in range(max_bounces):
        mask = x > L
        if not np.any(mask):
            return x, bounces, slope
        t = inverse_alpha(profile, x[mask])
        lp = profile.dell(t)
        slope[mask] *= (1 - lp) / (1 + lp)
        bounces[mask] += 1
        x[mask] = profile.beta(t)
    raise RecursionDepth(f"more than {max_bounces} characteristic bounces; xi_max too large")


def moore_numeric(profile: LengthProfile, seed_kind: str = "hermite", ximax: float | None = None,
                  seed=None, grid_per_unit: int = GRID_PER_UNIT,
                  max_bounces: int = MAX_BOUNCES) -> MooreMap:
    """Tabulated solution of Moore's equation for an arbitrary admissible profile.

    ``seed_kind`` is ``"hermite"`` (monotone cubic through the gluing
    conditions), ``"affine"`` (xi / L; only valid when l'(0) = 0) or
    ``"callable"`` with ``seed=(phi, phi_prime)`` given on [-L, L].
    """
    L = profile.L
    h = 1.0 / grid_per_unit
    if ximax is None:
        ximax = profile.xi_max + h
    if ximax < profile.xi_max:
        raise DomainExceeded(f"ximax={ximax} < T + l(T) = {profile.xi_max}")

    if seed_kind == "hermite":
        sphi, sdphi = _hermite_seed(profile)
    elif seed_kind == "affine":
        sphi, sdphi = (lambda x: np.asarray(x, dtype=float) / L,
                       lambda x: np.full_like(np.asarray(x, dtype=float), 1.0 / L))
    elif seed_kind == "callable":
        if seed is None:
            raise SeedMismatch("seed_kind='callable' needs seed=(phi, phi_prime)")
        p0, d0 = seed
        c0 = float(p0(np.float64(0.0)))
        sphi, sdphi = (lambda x: p0(x) - c0), d0
    else:
        raise SeedMismatch(f"unknown seed kind {seed_kind!r}")
    _check_seed(profile, sphi, sdphi)

    n = int(math.ceil((ximax + L) * grid_per_unit)) + 1
    grid = np.linspace(-L, ximax, n)
    kinks = [p for p in _junctions(profile, ximax, 4096) if p < ximax]
    grid = np.union1d(grid, kinks)
    x, bounces, slope = pull_back(profile, grid, max_bounces)
    phi_vals = sphi(x) + 2.0 * bounces
    dphi_vals = sdphi(x) * slope
    spline, dspline = _piecewise_c2(grid, phi_vals, dphi_vals, kinks)
    return MooreMap(-L, float(ximax), MooreSource.NUMERIC_RECURSION, spline, dspline,
                    table=(grid, phi_vals, dphi_vals), kinks=tuple(kinks))


def _piecewise_c2(grid, phi_vals, dphi_vals, kinks):
    """phi' as a C^2 cubic spline between junctions, phi as its antiderivative.

    phi'' genuinely jumps at the junctions, so each segment gets its own
    spline; within a segment phi' is smooth and a C^2 interpolant keeps
    the Fourier integrands smooth enough for Gauss-Legendre panels.  Each
    segment's antiderivative is anchored to the exact phi at its left end.
    """
    cuts = np.searchsorted(grid, kinks)
    bounds = np.unique(np.concatenate([[0], cuts, [grid.size - 1]]))
    dc, pc = [], []
    for j0, j1 in zip(bounds[:-1], bounds[1:]):
        xs, ds = grid[j0:j1 + 1], dphi_vals[j0:j1 + 1]
        if xs.size >= 4:
            seg = CubicSpline(xs, ds)
        else:
            seg = CubicHermiteSpline(xs, phi_vals[j0:j1 + 1], ds).derivative()
        anti = seg.antiderivative()
        c = anti.c.copy()
        c[-1] += phi_vals[j0]
        dc.append(np.vstack([np.zeros((4 - seg.c.shape[0], seg.c.shape[1])), seg.c]))
        pc.append(np.vstack([np.zeros((5 - c.shape[0], c.shape[1])), c]))
    dphi = PPoly(np.concatenate(dc, axis=1), grid)
    phi = PPoly(np.concatenate(pc, axis=1), grid)
    return phi, dphi


def moore_residual(mmap: MooreMap, profile: LengthProfile, t):
    """phi(alpha(t)) - phi(beta(t)) - 2."""
    return mmap.phi(profile.alpha(t)) - mmap.phi(profile.beta(t)) - 2.0


def moore_diagnostics(mmap: MooreMap, profile: LengthProfile, samples: int = 1000,
                      fd_step: float = 1e-6) -> dict:
    """Worst-case residuals of every MooreMap invariant on sampled points."""
    ts = np.linspace(0.0, profile.T, samples)
    res = np.abs(moore_residual(mmap, profile, ts))
    lp = profile.dell(ts)
    compat = np.abs((1 + lp) / (1 - lp) * mmap.phi_prime(profile.alpha(ts))
                    - mmap.phi_prime(profile.beta(ts)))
    hi = min(mmap.hi, profile.xi_max)
    xs = np.linspace(mmap.lo + fd_step, hi - fd_step, 4 * samples)
    fd = (mmap.phi(xs + fd_step) - mmap.phi(xs - fd_step)) / (2 * fd_step)
    fd_err = np.abs(fd - mmap.phi_prime(xs))
    return {
        "moore_residual": float(res.max()),
        "c1_compat": float(compat.max()),
        "min_phi_prime": float(mmap.phi_prime(np.linspace(mmap.lo, hi, 8 * samples)).min()),
        "fd_mismatch": float(fd_err.max()),
    }
