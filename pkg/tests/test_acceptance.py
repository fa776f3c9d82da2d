"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary lines
are printed even when output capture is on.
"""
import math

import numpy as np
import pytest

from moving_string import energy as en
from moving_string.characteristics import build_table
from moving_string.cli import main
from moving_string.moore import moore_for, moore_numeric, moore_residual
from moving_string.profiles import (
    extinction_time,
    gaussian_velocity_bump,
    make_custom_profile,
    make_damping,
    make_profile,
)
from moving_string.spectral import compute_coefficients, parseval_lhs, parseval_rhs, s0_from_coefficients

ETAS = (0.0, 0.5, 3.0)
SAMPLES = 64
# (kind, v, T) with T keeping l > 0
SMOOTH_CASES = [("constant", 0.0, 3.0), ("linear", 0.5, 3.0), ("linear", -0.5, 1.5)]


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, f"criterion {n}: {detail}"
    return emit


class Case:
    def __init__(self, kind, v, T, eta, N=256):
        self.profile = make_profile(kind, 1.0, v, T)
        self.damping = make_damping(eta)
        self.init = gaussian_velocity_bump(1.0)
        self.moore = moore_for(self.profile)
        self.table = build_table(self.init, self.profile, self.damping)
        self.modes = None
        if self.damping.spectral_ok:
            self.modes = compute_coefficients(self.init, self.moore, self.damping, N=N,
                                              profile=self.profile)
        self.E0 = en.energy_at(self.table, self.profile, 0.0)

    def spec(self, t):
        return en.energy_at(self.modes, self.profile, float(t))

    def oracle(self, t):
        return en.energy_at(self.table, self.profile, float(t))


_CASES = {}


def case(kind, v, T, eta):
    key = (kind, v, T, eta)
    if key not in _CASES:
        _CASES[key] = Case(*key)
    return _CASES[key]


def test_criterion_01_moore_residual(report):
    worst_closed, worst_numeric = 0.0, 0.0
    profiles = [make_profile("constant", 1.0, T=3.0)]
    profiles += [make_profile("linear", 1.0, v, 1.5 if v < -0.5 else 3.0)
                 for v in (0.3, -0.3, 0.6, -0.6)]
    for p in profiles:
        t = np.linspace(0.0, p.T, 1000)
        worst_closed = max(worst_closed, float(np.max(np.abs(moore_residual(moore_for(p), p, t)))))
        if p.v != 0:
            num = moore_numeric(p)
            worst_numeric = max(worst_numeric, float(np.max(np.abs(moore_residual(num, p, t)))))
    breathing = make_custom_profile(lambda t: 1 + 0.1 * np.sin(t), lambda t: 0.1 * np.cos(t), 3.0)
    t = np.linspace(0.0, 3.0, 1000)
    num = moore_for(breathing)
    worst_numeric = max(worst_numeric, float(np.max(np.abs(moore_residual(num, breathing, t)))))
    ok = worst_closed <= 1e-12 and worst_numeric <= 1e-8
    report(1, ok, f"closed {worst_closed:.2e} <= 1e-12, numeric {worst_numeric:.2e} <= 1e-8")


def test_criterion_02_parseval(report):
    worst = 0.0
    for kind, v, T in SMOOTH_CASES[:2]:
        for eta in ETAS:
            c = case(kind, v, T, eta)
            rhs = parseval_rhs(c.init, c.moore, c.damping)
            worst = max(worst, abs(parseval_lhs(c.modes) - rhs) / rhs)
    report(2, worst <= 1e-6, f"max relative Parseval gap {worst:.2e} <= 1e-6")


def test_criterion_03_oracle_vs_spectral(report):
    worst = 0.0
    for kind, v, T in SMOOTH_CASES[:2]:
        for eta in ETAS:
            c = case(kind, v, T, eta)
            for t in np.linspace(0.0, 3.0, SAMPLES):
                worst = max(worst, abs(c.spec(t) - c.oracle(t)) / c.E0)
    report(3, worst <= 1e-4, f"max |E_spec - E_oracle| / E(0) = {worst:.2e} <= 1e-4")


def test_criterion_04_undamped_constant_length(report):
    c = Case("constant", 0.0, 10.0, 0.0)
    E = np.array([c.spec(t) for t in np.linspace(0.0, 10.0, SAMPLES)])
    S0 = s0_from_coefficients(c.modes)
    drift = float(np.ptp(E) / E[0])
    gap = float(np.max(np.abs(E - S0)) / S0)
    report(4, drift <= 1e-6 and gap <= 1e-6,
           f"relative drift {drift:.2e} <= 1e-6, max |E - S0| / S0 = {gap:.2e} <= 1e-6")


def test_criterion_05_constant_length_damped(report):
    violations, rate_err = 0, 0.0
    t = np.linspace(0.0, 10.0, SAMPLES)
    for eta in (0.5, 3.0):
        c = Case("constant", 0.0, 10.0, eta)
        a = c.damping.log_abs_gamma
        g2 = math.exp(2 * a)
        E = np.array([c.spec(s) for s in t])
        env = c.E0 * np.exp(-a * t)
        violations += int(np.sum(E < env / g2 * (1 - 1e-6))) + int(np.sum(E > g2 * env * (1 + 1e-6)))
        slope = np.polyfit(t, np.log(E), 1)[0]
        rate_err = max(rate_err, abs(-slope - a / c.profile.L) / (a / c.profile.L))
    report(5, violations == 0 and rate_err <= 0.05,
           f"{violations} sandwich violations, decay rate error {rate_err:.2%} <= 5%")


def test_criterion_06_sandwiches(report):
    bad, checked = 0, 0
    for kind, v, T in SMOOTH_CASES[1:]:
        for eta in ETAS:
            c = case(kind, v, T, eta)
            for t in np.linspace(0.0, T, SAMPLES):
                E = c.spec(t)
                rep = en.energy_report(c.modes, c.moore, c.damping, c.profile, float(t), E, c.E0)
                bad += not en.within_bounds(E, rep.lower, rep.upper, c.E0, slack=1e-6)
                checked += 1
                if eta > 0:
                    lo, hi = en.bounds_stab0(c.moore, c.damping, c.profile, float(t), rep.S)
                    bad += not en.within_bounds(E, lo, hi, c.E0, slack=1e-6)
                    checked += 1
    report(6, bad == 0, f"{bad} of {checked} sandwich checks violated (slack 1e-6)")


def test_criterion_07_critical_window(report):
    w = en.critical_damping(-0.6)
    roots_ok = abs(w.eta1 - 1 / 3) <= 1e-12 and abs(w.eta2 - 3.0) <= 1e-12
    p = make_profile("linear", 1.0, -0.6, 1.5)
    init = gaussian_velocity_bump(1.0)
    t = np.linspace(0.0, 1.5, SAMPLES)
    trends = {}
    for eta in (0.5, 2.0, 0.1, 10.0, 1 / 3):
        tab = build_table(init, p, make_damping(eta))
        trends[eta] = np.array([en.energy_at(tab, p, s) for s in t])
    noise = {eta: 1e-12 * E[0] for eta, E in trends.items()}
    dec = all(np.all(np.diff(trends[e]) <= noise[e]) for e in (0.5, 2.0))
    inc = all(np.all(np.diff(trends[e]) >= -noise[e]) for e in (0.1, 10.0))
    E = trends[1 / 3]
    spread = float(np.ptp(E) / E[0])
    ok = roots_ok and dec and inc and spread <= 1e-4
    report(7, ok, f"eta1={w.eta1!r}, eta2={w.eta2!r}; nonincreasing {dec}, nondecreasing {inc}, "
                  f"eta=1/3 spread {spread:.2e} <= 1e-4")


def test_criterion_08_transparent_extinction(report):
    worst, detail = 0.0, []
    for v, T in ((0.5, 6.0), (-0.5, 1.9)):
        c = Case("linear", v, T, 1.0)
        T_ell = extinction_time(c.profile)
        late = np.linspace(T_ell, T, SAMPLES)
        worst = max(worst, max(c.oracle(s) for s in late) / c.E0)
        detail.append(f"v={v}: T_l={T_ell:.6f}")
    T4 = extinction_time(make_profile("linear", 1.0, 0.5, 6.0))
    ok = worst <= 1e-8 and abs(T4 - 4.0) <= 1e-8
    report(8, ok, f"{', '.join(detail)}; max E(t >= T_l) / E(0) = {worst:.2e} <= 1e-8")


def _derivative_gap(c, t, h=1e-4):
    d1 = (c.spec(t + h) - c.spec(t - h)) / (2 * h)
    d2 = (c.spec(t + h / 2) - c.spec(t - h / 2)) / h
    fd = (4 * d2 - d1) / 3
    exact = en.energy_derivative(c.modes, c.profile, c.damping, t)
    general = en.energy_derivative_general(c.modes, c.profile, t)
    floor = 1e-6 * c.E0 / c.profile.L
    return max(abs(fd - exact), abs(fd - general)) / (abs(exact) + floor)


def test_criterion_09_energy_derivative(report):
    worst = 0.0
    for kind, v, T in SMOOTH_CASES:
        for eta in ETAS:
            c = case(kind, v, T, eta)
            for t in np.linspace(2e-4, T - 2e-4, 16):
                worst = max(worst, _derivative_gap(c, float(t)))
    report(9, worst <= 1e-3, f"max relative derivative mismatch {worst:.2e} <= 1e-3")


def test_criterion_10_identities(report):
    worst = 0.0
    for kind, v, T in SMOOTH_CASES:
        for eta in ETAS:
            c = case(kind, v, T, eta)
            S = 2.0 * parseval_rhs(c.init, c.moore, c.damping)
            for t in np.linspace(0.0, T, 16):
                if eta == 0:
                    r = en.check_identity_undamped(c.modes, c.moore, c.profile, float(t), S)
                else:
                    r = en.check_identity_damped(c.modes, c.moore, c.damping, c.profile,
                                                 float(t), S)
                worst = max(worst, abs(r))
    report(10, worst <= 1e-5, f"max relative identity residual {worst:.2e} <= 1e-5")


def test_criterion_11_determinism(report, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"profile": {"kind": "linear", "v": -0.5, "T": 1.5}, "eta": 3.0,'
                   ' "time_samples": {"count": 16},'
                   ' "outputs": {"modes_csv": true, "fprime_csv": true}}')
    runs = []
    for name, threads in (("a", "1"), ("b", "4")):
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / name),
                     "--threads", threads]) == 0
        runs.append({p.name: p.read_bytes() for p in sorted((tmp_path / name).iterdir())})
    same = runs[0] == runs[1] and len(runs[0]) == 4
    report(11, same, f"{len(runs[0])} CSV files byte-identical across two runs: {same}")
