"""Energy, envelope functions and the two-sided energy estimates.

Notation: a = ln|gamma_eta| (zero when undamped), m/M are the extrema of
phi' over the characteristic window [t - l(t), t + l(t)], and the tilde
versions weight phi' by exp(-a phi).  Every estimate here is a product of
an invariant (S_0 or S_eta, fixed by the initial data) with such
envelopes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import trapezoid

from .characteristics import CharacteristicTable, oracle_energy
from .errors import SingularBoundary
from .moore import MooreMap
from .profiles import DampingConfig, LengthProfile, Regime
from .quadrature import integrate
from .spectral import ModeSet

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)

BOUND_SLACK = 1e-6
ABS_FLOOR = 1e-12
MONOTONE_NOISE = 1e-12


def _log_gamma(damping: DampingConfig | None) -> float:
    if damping is None or damping.regime is Regime.UNDAMPED:
        return 0.0
    damping.require_spectral()
    return damping.log_abs_gamma


def _x_nodes(table: CharacteristicTable, t: float, ell: float) -> np.ndarray:
    """x-grid on [0, l] containing every table node seen from t + x or t - x."""
    g = table.grid
    plus = g[(g > t) & (g < t + ell)] - t
    minus = t - g[(g > t - ell) & (g < t)]
    return np.unique(np.concatenate([[0.0, ell], plus, minus]))


def _integrate_x(evaluator, t: float, integrand, quad_tol: float) -> float:
    """int_0^l integrand(x, u_t, u_x) dx with the evaluator's natural rule."""
    ell = float(evaluator.profile.ell(t))
    if isinstance(evaluator, CharacteristicTable):
        xs = _x_nodes(evaluator, t, ell)
        ut, ux = evaluator.ut_ux(xs, t)
        return float(trapezoid(integrand(xs, ut, ux), xs))

    def fun(x):
        ut, ux = evaluator.ut_ux(x, t)
        return integrand(x, ut, ux)

    return float(integrate(fun, [0.0, ell], abs_tol=quad_tol,
                           max_width=_resolution(evaluator, t)))


def _resolution(modes: ModeSet, t: float, profile: LengthProfile | None = None) -> float:
    """One period of the fastest mode, mapped back to x near time t."""
    prof = profile if profile is not None else modes.profile
    xs = np.linspace(float(prof.beta(t)), float(prof.alpha(t)), 257)
    dphi = float(np.max(modes.moore.phi_prime(xs)))
    return 2 * math.pi / float(np.max(np.abs(modes.omegas.imag))) / dphi


def _xi_integral(modes: ModeSet, profile: LengthProfile, t: float, weight=None) -> float:
    """int_{beta(t)}^{alpha(t)} weight(xi) f'(xi)^2 dxi on fixed Gauss-Legendre panels.

    Panels are half a period of the fastest mode wide (15 nodes resolve
    that to roundoff), break at the kinks of phi' and move continuously
    with t, so the result is a smooth function of t that can be
    finite-differenced.
    """
    lo, hi = float(profile.beta(t)), float(profile.alpha(t))
    if hi <= lo:
        return 0.0
    width = 0.5 * _resolution(modes, t, profile)
    bp = np.concatenate([[lo], [k for k in modes.moore.kinks if lo < k < hi], [hi]])
    edges = np.concatenate([np.linspace(a, b, max(1, int(math.ceil((b - a) / width))) + 1)[:-1]
                            for a, b in zip(bp[:-1], bp[1:])] + [[hi]])
    half = 0.5 * np.diff(edges)
    xi = (0.5 * (edges[1:] + edges[:-1]))[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = modes.fprime(xi.ravel()) ** 2
    if weight is not None:
        vals = vals * weight(xi.ravel())
    return float(np.sum(vals.reshape(xi.shape) * _GL_WEIGHTS[None, :] * half[:, None]))


def energy_at(evaluator, profile: LengthProfile, t: float, method: str = "xi",
              quad_tol: float = 1e-13) -> float:
    """E(t) = (1/2) int_0^l(t) (u_t^2 + u_x^2) dx.

    Since u_t^2 + u_x^2 = 2 (f'(t+x)^2 + f'(t-x)^2), this equals the
    integral of f'^2 over the characteristic window, which is what the
    default ``method="xi"`` computes for a ModeSet.  ``method="x"``
    integrates the x-form adaptively instead (used as a cross-check).
    The characteristics oracle always uses the trapezoid on its grid.
    """
    if isinstance(evaluator, CharacteristicTable):
        return oracle_energy(evaluator, t)
    if method == "xi":
        return _xi_integral(evaluator, profile, t)
    if evaluator.profile is None:
        evaluator = _with_profile(evaluator, profile)
    return _integrate_x(evaluator, t, lambda x, ut, ux: 0.5 * (ut ** 2 + ux ** 2), quad_tol)


def _with_profile(modes: ModeSet, profile: LengthProfile) -> ModeSet:
    from dataclasses import replace
    return replace(modes, profile=profile)


# -- envelopes ---------------------------------------------------------------

def _window_samples(moore: MooreMap, profile: LengthProfile, t: float, h_grid: float | None):
    lo, hi = float(profile.beta(t)), float(profile.alpha(t))
    if h_grid is None and moore.table is not None:
        h_grid = float(np.min(np.diff(moore.table[0][:2])))
    n = 1024 if h_grid is None else max(1024, int(math.ceil(64 * (hi - lo) / h_grid)))
    return np.linspace(lo, hi, n)


def envelopes(moore: MooreMap, profile: LengthProfile, t: float, h_grid: float | None = None):
    """(m(t), M(t)): min and max of phi' over [t - l(t), t + l(t)]."""
    d = moore.phi_prime(_window_samples(moore, profile, t, h_grid))
    return float(d.min()), float(d.max())


def weighted_envelopes(moore: MooreMap, damping: DampingConfig, profile: LengthProfile,
                       t: float, h_grid: float | None = None):
    """(m~(t), M~(t)): extrema of phi' exp(-a phi) over the same window."""
    a = _log_gamma(damping)
    xs = _window_samples(moore, profile, t, h_grid)
    w = moore.phi_prime(xs) * np.exp(-a * moore.phi(xs))
    return float(w.min()), float(w.max())


def bounds_undamped(S0: float, m: float, M: float):
    return S0 * m, S0 * M


def bounds_damped(Seta: float, m_tilde: float, M_tilde: float):
    return Seta * m_tilde, Seta * M_tilde


def bounds_stab0(moore: MooreMap, damping: DampingConfig, profile: LengthProfile, t: float,
                 Seta: float, m: float | None = None, M: float | None = None):
    """Coarser damped sandwich using the plain envelopes m, M."""
    a = _log_gamma(damping)
    if m is None or M is None:
        m, M = envelopes(moore, profile, t)
    lo = Seta * m * math.exp(-a * float(moore.phi(profile.alpha(t))))
    hi = Seta * M * math.exp(-a * float(moore.phi(profile.beta(t))))
    return lo, hi


def within_bounds(E: float, lower: float, upper: float, E0: float,
                  slack: float = BOUND_SLACK, floor: float = ABS_FLOOR) -> bool:
    tol = floor * E0
    return lower <= E * (1 + slack) + tol and E <= upper * (1 + slack) + tol


# -- comparisons between two times --------------------------------------------

def phi_prime_monotone(moore: MooreMap, lo: float, hi: float, samples: int = 4096) -> int:
    """+1 nondecreasing, -1 nonincreasing, 0 neither (on sampled points)."""
    d = np.diff(moore.phi_prime(np.linspace(lo, hi, samples)))
    noise = MONOTONE_NOISE * max(1.0, float(np.max(np.abs(moore.phi_prime([lo, hi])))))
    if np.all(d >= -noise):
        return 1
    if np.all(d <= noise):
        return -1
    return 0


def bounds_relative(moore: MooreMap, damping: DampingConfig | None, profile: LengthProfile,
                    t0: float, t: float, E_t0: float, return_form: bool = False):
    """Sandwich for E(t) in terms of E(t0), t0 < t.

    When phi' is monotone on [t0 - l(t0), t + l(t)] and l' keeps one sign on
    [t0, t], the envelopes are read off at the window ends; otherwise they
    are sampled.
    """
    if not t0 < t:
        raise ValueError("need t0 < t")
    a = _log_gamma(damping)
    phi, dphi = moore.phi, moore.phi_prime
    b0, a0 = float(profile.beta(t0)), float(profile.alpha(t0))
    b1, a1 = float(profile.beta(t)), float(profile.alpha(t))
    lp = profile.dell(np.linspace(t0, t, 1025))
    trend = phi_prime_monotone(moore, b0, a1)
    if trend == 1 and np.all(lp <= 0):
        form = "nondecreasing"
        m_t, M_t, m_t0, M_t0 = float(dphi(b1)), float(dphi(a1)), float(dphi(b0)), float(dphi(a0))
    elif trend == -1 and np.all(lp >= 0):
        form = "nonincreasing"
        m_t, M_t, m_t0, M_t0 = float(dphi(a1)), float(dphi(b1)), float(dphi(a0)), float(dphi(b0))
    else:
        form = "generic"
        m_t, M_t = envelopes(moore, profile, t)
        m_t0, M_t0 = envelopes(moore, profile, t0)
    lower = m_t * math.exp(-a * float(phi(a1))) / (M_t0 * math.exp(-a * float(phi(b0)))) * E_t0
    upper = M_t * math.exp(-a * float(phi(b1))) / (m_t0 * math.exp(-a * float(phi(a0)))) * E_t0
    if return_form:
        return lower, upper, form
    return lower, upper


# -- weighted identities --------------------------------------------------------

def _identity_integral(evaluator, moore: MooreMap, a: float, t: float, quad_tol: float):
    if isinstance(evaluator, ModeSet):
        # the x-integrand collapses to 4 w(t+x) f'(t+x)^2 + 4 w(t-x) f'(t-x)^2
        return 4.0 * _xi_integral(evaluator, evaluator.profile, t,
                                  lambda xi: np.exp(a * moore.phi(xi)) / moore.phi_prime(xi))

    def integrand(x, ut, ux):
        wp = np.exp(a * moore.phi(t + x)) / moore.phi_prime(t + x)
        wm = np.exp(a * moore.phi(t - x)) / moore.phi_prime(t - x)
        return (wp + wm) * (ux ** 2 + ut ** 2) + 2 * (wp - wm) * ux * ut

    return _integrate_x(evaluator, t, integrand, quad_tol)


def _relative(value: float, target: float) -> float:
    if target == 0:
        return abs(value)
    return (value - target) / target


def check_identity_undamped(evaluator, moore: MooreMap, profile: LengthProfile, t: float,
                            S0: float, quad_tol: float = 1e-13) -> float:
    """Relative residual of the phi'-weighted identity that equals 4 S_0."""
    if isinstance(evaluator, ModeSet) and evaluator.profile is None:
        evaluator = _with_profile(evaluator, profile)
    return _relative(_identity_integral(evaluator, moore, 0.0, t, quad_tol), 4 * S0)


def check_identity_damped(evaluator, moore: MooreMap, damping: DampingConfig,
                          profile: LengthProfile, t: float, Seta: float,
                          quad_tol: float = 1e-13) -> float:
    """Same with weights exp(a phi)/phi'; target 4 S_eta."""
    if isinstance(evaluator, ModeSet) and evaluator.profile is None:
        evaluator = _with_profile(evaluator, profile)
    a = _log_gamma(damping)
    return _relative(_identity_integral(evaluator, moore, a, t, quad_tol), 4 * Seta)


# -- energy derivative ---------------------------------------------------------

def endpoint_values(evaluator, profile: LengthProfile, t: float):
    """(u_t, u_x) at the moving end x = l(t)."""
    ut, ux = evaluator.ut_ux(float(profile.ell(t)), t)
    return float(ut), float(ux)


def energy_derivative_general(evaluator, profile: LengthProfile, t: float) -> float:
    """E'(t) = l'/2 (u_x^2 + u_t^2) + u_t u_x at the moving end (any eta)."""
    ut, ux = endpoint_values(evaluator, profile, t)
    lp = float(profile.dell(t))
    return 0.5 * lp * (ux ** 2 + ut ** 2) + ut * ux


def energy_derivative_e2(lprime: float, eta: float, ut: float) -> float:
    """-(1/2) P(eta) (1 - l'^2) / (1 + eta l')^2 u_t^2 with P = l' eta^2 + 2 eta + l'."""
    den = 1 + eta * lprime
    if abs(den) < 1e-9:
        raise SingularBoundary(f"1 + eta l' = {den:.3g}; use the u_x form")
    P = lprime * eta ** 2 + 2 * eta + lprime
    return -0.5 * P * (1 - lprime ** 2) / den ** 2 * ut ** 2


def energy_derivative(evaluator, profile: LengthProfile, damping: DampingConfig,
                      t: float) -> float:
    """E'(t) from the boundary form that matches the regime at time t."""
    ut, ux = endpoint_values(evaluator, profile, t)
    lp = float(profile.dell(t))
    eta = damping.eta
    if eta == 0:
        return -0.5 * lp * (1 - lp ** 2) * ut ** 2
    if lp == 0:
        return -eta * ut ** 2
    if abs(lp + eta) < 1e-12:
        return -0.5 * eta * ut ** 2
    try:
        return energy_derivative_e2(lp, eta, ut)
    except SingularBoundary:
        # l' = -1/eta: the moving end is at rest in the transverse direction
        return -ux ** 2 / (2 * eta)


# -- critical damping ------------------------------------------------------------

class WindowRegime(str, Enum):
    EXPANDING_ALWAYS_DECAY = "ExpandingAlwaysDecay"
    SHRINKING_WINDOW = "ShrinkingWindow"
    STATIC = "Static"


@dataclass(frozen=True)
class DampingWindow:
    t: float
    lprime: float
    eta1: float | None
    eta2: float | None
    regime: WindowRegime

    def classify(self, eta: float, tol: float = 1e-12) -> str:
        """'decay', 'constant' or 'growth' for the energy at this instant."""
        if self.regime is WindowRegime.EXPANDING_ALWAYS_DECAY:
            return "decay"
        if self.regime is WindowRegime.STATIC:
            return "decay" if eta > 0 else "constant"
        if abs(eta - self.eta1) <= tol or abs(eta - self.eta2) <= tol * self.eta2:
            return "constant"
        if self.eta1 < eta < self.eta2:
            return "decay"
        return "growth"


def critical_damping(lprime: float, t: float = math.nan) -> DampingWindow:
    """Roots eta1 < 1 < eta2 of P(eta) = l' eta^2 + 2 eta + l' for a shrinking end."""
    lprime = float(lprime)
    if lprime > 0:
        return DampingWindow(t, lprime, None, None, WindowRegime.EXPANDING_ALWAYS_DECAY)
    if lprime == 0:
        return DampingWindow(t, lprime, None, None, WindowRegime.STATIC)
    s = math.sqrt(1 - lprime ** 2)
    # rationalised form of (-1 + s)/l', free of cancellation for small |l'|
    eta1 = -lprime / (1 + s)
    eta2 = (-1 - s) / lprime
    return DampingWindow(t, lprime, eta1, eta2, WindowRegime.SHRINKING_WINDOW)


# -- per-sample report -------------------------------------------------------------

@dataclass(frozen=True)
class EnergyReport:
    t: float
    E: float
    S: float
    lower: float
    upper: float
    m: float
    M: float
    m_tilde: float
    M_tilde: float
    identity_residual: float
    bounds_satisfied: bool


def energy_report(modes: ModeSet, moore: MooreMap, damping: DampingConfig,
                  profile: LengthProfile, t: float, E: float, E0: float,
                  quad_tol: float = 1e-13, S_ref: float | None = None) -> EnergyReport:
    """Bounds, envelopes and identity residual at t for a measured energy E.

    Bounds use S from the coefficients.  The identity is checked against
    ``S_ref`` when given (e.g. S computed from the initial data), so that
    a corrupted coefficient set cannot validate itself.
    """
    S = modes.parseval_sum
    S_id = S if S_ref is None else S_ref
    m, M = envelopes(moore, profile, t)
    mt, Mt = weighted_envelopes(moore, damping, profile, t)
    if damping.regime is Regime.UNDAMPED:
        lower, upper = bounds_undamped(S, m, M)
        res = check_identity_undamped(modes, moore, profile, t, S_id, quad_tol)
    else:
        lower, upper = bounds_damped(S, mt, Mt)
        res = check_identity_damped(modes, moore, damping, profile, t, S_id, quad_tol)
    ok = within_bounds(E, lower, upper, E0)
    return EnergyReport(t, E, S, lower, upper, m, M, mt, Mt, res, ok)
