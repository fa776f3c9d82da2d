"""Adaptive composite Gauss-Legendre quadrature for vector-valued integrands.

Each panel is compared against the sum over its two halves; panels whose
difference exceeds their share of the absolute tolerance are bisected.
The integrand is called on flat arrays of nodes and may return extra
trailing axes (e.g. one column per Fourier mode), in which case the
error test uses the worst component.
"""
from __future__ import annotations

import numpy as np

from .errors import QuadratureFailure

ORDER = 15
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(ORDER)


def _panel_rule(fun, a, b, chunk):
    """Gauss-Legendre sums over panels [a_i, b_i]; returns array (npanel, ...)."""
    out = []
    for s in range(0, a.size, chunk):
        aa, bb = a[s:s + chunk], b[s:s + chunk]
        half = 0.5 * (bb - aa)
        mid = 0.5 * (bb + aa)
        x = (mid[:, None] + half[:, None] * _NODES[None, :]).ravel()
        y = np.asarray(fun(x))
        y = y.reshape((aa.size, ORDER) + y.shape[1:])
        w = (half[:, None] * _WEIGHTS[None, :]).reshape((aa.size, ORDER) + (1,) * (y.ndim - 2))
        out.append(np.sum(w * y, axis=1))
    return np.concatenate(out, axis=0)


def integrate(fun, breakpoints, abs_tol: float = 1e-10, max_width: float | None = None,
              max_panels: int = 1 << 20, chunk: int = 128, max_levels: int = 50):
    """Integrate ``fun`` over [breakpoints[0], breakpoints[-1]].

    Interior breakpoints are always panel edges (put derivative jumps
    there).  ``max_width`` caps the initial panel width, which is how
    oscillatory integrands get resolved a priori.
    """
    bp = np.unique(np.asarray(breakpoints, dtype=float))
    if bp.size < 2:
        raise ValueError("need at least two breakpoints")
    total_width = bp[-1] - bp[0]
    if total_width == 0:
        return 0.0
    edges = []
    for lo, hi in zip(bp[:-1], bp[1:]):
        n = 1 if max_width is None else max(1, int(np.ceil((hi - lo) / max_width)))
        edges.append(np.linspace(lo, hi, n + 1)[:-1])
    a = np.concatenate(edges)
    b = np.append(a[1:], bp[-1])
    # intervals between breakpoints end exactly at the breakpoint
    whole = _panel_rule(fun, a, b, chunk)
    result = np.zeros(whole.shape[1:], dtype=whole.dtype)
    for _ in range(max_levels):
        m = 0.5 * (a + b)
        halves = _panel_rule(fun, np.concatenate([a, m]), np.concatenate([m, b]), chunk)
        left, right = halves[:a.size], halves[a.size:]
        refined = left + right
        err = np.abs(refined - whole)
        if err.ndim > 1:
            err = err.reshape(err.shape[0], -1).max(axis=1)
        mag = np.abs(refined)
        if mag.ndim > 1:
            mag = mag.reshape(mag.shape[0], -1).max(axis=1)
        # roundoff floor, otherwise large integrands never converge
        ok = err <= np.maximum(abs_tol * (b - a) / total_width, 64 * np.finfo(float).eps * mag)
        result = result + refined[ok].sum(axis=0)
        if np.all(ok):
            return result
        bad = ~ok
        a, b = np.concatenate([a[bad], m[bad]]), np.concatenate([m[bad], b[bad]])
        whole = np.concatenate([left[bad], right[bad]])
        if a.size > max_panels:
            break
    raise QuadratureFailure(
        f"adaptive Gauss-Legendre did not reach abs_tol={abs_tol:g} "
        f"({a.size} unresolved panels)")
