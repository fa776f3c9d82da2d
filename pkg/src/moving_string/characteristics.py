"""Method-of-characteristics oracle.

u(x, t) = f(t + x) - f(t - x) with f' known on (-L, L) from the initial
data.  Past the seed interval f' is propagated by the moving-end reflection

    alpha'(t) f'(alpha(t)) = -(1/gamma) beta'(t) f'(beta(t)),

so nothing here touches phi or the Fourier coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .errors import GridTooCoarse, OutOfDomain
from .profiles import (
    DampingConfig,
    InitialData,
    LengthProfile,
    Regime,
    _bisect_increasing,
    inverse_alpha,
)

MAX_SNAP_POINTS = 32


@dataclass(frozen=True)
class CharacteristicTable:
    grid: np.ndarray = field(repr=False)
    fprime_values: np.ndarray = field(repr=False)
    damping: DampingConfig
    profile: LengthProfile = field(repr=False)
    h: float = 0.0

    def fprime(self, xi):
        xi = np.asarray(xi, dtype=float)
        if np.any(xi < self.grid[0] - 1e-12) or np.any(xi > self.grid[-1] + 1e-12):
            raise OutOfDomain(f"xi outside table range [{self.grid[0]:.6g}, {self.grid[-1]:.6g}]")
        return np.interp(xi, self.grid, self.fprime_values)

    def ut_ux(self, x, t):
        return oracle_ut_ux(self, x, t)


def _snap_points(init: InitialData, profile: LengthProfile, ximax: float) -> list[float]:
    """Kinks of the seed and their first few images across the moving end."""
    L = init.L
    seeds = sorted({L, *init.kinks, *(-k for k in init.kinks)})
    pts = set(seeds)
    frontier = seeds
    while frontier and len(pts) < MAX_SNAP_POINTS:
        nxt = []
        for y in frontier:
            if y > float(profile.beta(profile.T)):
                continue
            t = float(_bisect_increasing(profile.beta, np.float64(y), 0.0, profile.T))
            img = float(profile.alpha(t))
            if L < img <= ximax and len(pts) < MAX_SNAP_POINTS:
                pts.add(img)
                nxt.append(img)
        frontier = nxt
    return sorted(p for p in pts if -L <= p <= ximax)


def build_table(init: InitialData, profile: LengthProfile, damping: DampingConfig,
                h: float | None = None, ximax: float | None = None,
                snap: bool = True) -> CharacteristicTable:
    """Tabulate f' on [-L, ximax] with step ``h`` (default 1e-4 L)."""
    L = profile.L
    h = 1e-4 * L if h is None else float(h)
    if h <= 0:
        raise ValueError("grid step must be positive")
    ximax = profile.xi_max + h if ximax is None else float(ximax)
    n = int(np.ceil((ximax + L) / h))
    grid = -L + h * np.arange(n + 1)
    if snap:
        grid = np.union1d(grid, _snap_points(init, profile, grid[-1]))
    fp = np.empty_like(grid)

    seed = grid <= L
    fp[seed] = 0.5 * init.extended(grid[seed])
    k = int(np.count_nonzero(seed)) - 1
    rest = grid[k + 1:]
    if rest.size == 0:
        return CharacteristicTable(grid, fp, damping, profile, h)
    if damping.regime is Regime.TRANSPARENT:
        fp[k + 1:] = 0.0
        return CharacteristicTable(grid, fp, damping, profile, h)

    t = inverse_alpha(profile, rest)
    src = profile.beta(t)
    lp = profile.dell(t)
    factor = -(1.0 / damping.gamma) * (1 - lp) / (1 + lp)
    # grid index of the first node at or right of each source point
    need = np.searchsorted(grid, src, side="left")
    cur = 0
    while cur < rest.size:
        filled = k + cur
        stop = int(np.searchsorted(need, filled, side="right"))
        if stop <= cur:
            raise GridTooCoarse(f"stencil for xi={rest[cur]:.6g} not filled yet; refine h")
        j = slice(cur, stop)
        fp[k + 1 + cur:k + 1 + stop] = factor[j] * np.interp(src[j], grid[:filled + 1],
                                                             fp[:filled + 1])
        cur = stop
    return CharacteristicTable(grid, fp, damping, profile, h)


def oracle_ut_ux(table: CharacteristicTable, x, t):
    """(u_t, u_x) from the tabulated f' at t + x and t - x."""
    x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    ell = table.profile.ell(t)
    if np.any(x < -1e-12) or np.any(x > ell + 1e-12):
        raise OutOfDomain("x outside [0, l(t)]")
    fp, fm = table.fprime(t + x), table.fprime(t - x)
    return fp - fm, fp + fm


def oracle_energy(table: CharacteristicTable, t: float) -> float:
    """E(t) = int_{beta(t)}^{alpha(t)} f'(xi)^2 dxi by trapezoid on the table grid.

    This is the same number as (1/2) int_0^l (u_t^2 + u_x^2) dx because
    u_t^2 + u_x^2 = 2 (f'(t+x)^2 + f'(t-x)^2).
    """
    lo, hi = float(table.profile.beta(t)), float(table.profile.alpha(t))
    g = table.grid
    i0, i1 = np.searchsorted(g, lo, side="right"), np.searchsorted(g, hi, side="left")
    xs = np.concatenate([[lo], g[i0:i1], [hi]])
    ys = np.concatenate([table.fprime([lo]), table.fprime_values[i0:i1], table.fprime([hi])])
    return float(trapezoid(ys ** 2, xs))
