import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from moving_string.errors import DomainExceeded, OutOfDomain, SeedMismatch
from moving_string.moore import (
    MooreSource,
    moore_constant,
    moore_diagnostics,
    moore_for,
    moore_linear,
    moore_numeric,
    moore_residual,
    pull_back,
)
from moving_string.profiles import make_custom_profile, make_profile


def breathing(T=3.0):
    return make_custom_profile(lambda t: 1 + 0.1 * np.sin(t), lambda t: 0.1 * np.cos(t), T)


def test_constant_map_is_affine():
    m = moore_constant(2.0)
    assert m.phi(3.0) == pytest.approx(1.5)
    assert m.phi_prime(-1.0) == pytest.approx(0.5)
    assert m.normalization == -1.0


def test_linear_closed_form_values():
    m = moore_linear(1.0, 0.5)
    k = 2 / math.log(3.0)
    assert m.phi(0.0) == 0.0
    assert m.phi(2.0) == pytest.approx(k * math.log(2.0))
    assert m.phi_prime(2.0) == pytest.approx(k * 0.5 / 2.0)


@pytest.mark.parametrize("v", [-0.6, -0.3, 0.3, 0.6])
def test_linear_residual_closed_form(v):
    T = 1.5 if v < 0 else 3.0
    p = make_profile("linear", 1.0, v, T)
    m = moore_for(p)
    assert m.source is MooreSource.CLOSED_FORM_LINEAR
    t = np.linspace(0, T, 1000)
    assert np.max(np.abs(moore_residual(m, p, t))) <= 1e-12


def test_linear_domain_errors():
    with pytest.raises(DomainExceeded):
        moore_linear(1.0, 1.0)
    with pytest.raises(DomainExceeded):
        moore_linear(1.0, -0.5, ximax=3.0)
    m = moore_linear(1.0, 0.5, ximax=4.0)
    with pytest.raises(OutOfDomain):
        m.phi(4.5)


def test_numeric_map_residual_and_diagnostics():
    p = breathing()
    m = moore_for(p)
    assert m.source is MooreSource.NUMERIC_RECURSION
    d = moore_diagnostics(m, p)
    assert d["moore_residual"] <= 1e-8
    assert d["c1_compat"] <= 1e-6
    assert d["min_phi_prime"] > 0
    assert d["fd_mismatch"] <= 1e-6
    assert m.phi(0.0) == pytest.approx(0.0, abs=1e-12)


def test_numeric_reproduces_closed_form_with_its_seed():
    p = make_profile("linear", 1.0, 0.5, 3.0)
    lin = moore_linear(1.0, 0.5)
    m = moore_numeric(p, seed_kind="callable", seed=(lin.phi, lin.phi_prime))
    xi = np.linspace(-1.0, p.xi_max, 20001)
    assert np.ptp(m.phi(xi) - lin.phi(xi)) <= 1e-10
    np.testing.assert_allclose(m.phi_prime(xi), lin.phi_prime(xi), rtol=1e-10)


def test_numeric_affine_seed_on_constant():
    p = make_profile("constant", 1.0, T=3.0)
    m = moore_numeric(p, seed_kind="affine")
    xi = np.linspace(-1.0, p.xi_max, 5001)
    np.testing.assert_allclose(m.phi(xi), xi, atol=1e-11)


def test_seed_mismatch_rejected():
    p = make_profile("linear", 1.0, 0.5, 3.0)
    with pytest.raises(SeedMismatch):
        # an affine seed cannot satisfy the gluing condition when l'(0) != 0
        moore_numeric(p, seed_kind="affine")
    with pytest.raises(SeedMismatch):
        moore_numeric(p, seed_kind="callable", seed=(lambda x: x, lambda x: 1.0 + 0 * x))


def test_pull_back_lands_in_seed_interval():
    p = breathing()
    xi = np.linspace(1.0, p.xi_max, 50)
    x, bounces, slope = pull_back(p, xi)
    assert np.all(np.abs(x) <= 1.0 + 1e-12)
    assert np.all(bounces >= 0) and np.all(slope > 0)


def test_derivative_form_of_moores_equation():
    # phi'(alpha) alpha' = phi'(beta) beta'
    p = breathing()
    m = moore_for(p)
    t = np.linspace(0, 3, 200)
    lp = p.dell(t)
    lhs = m.phi_prime(p.alpha(t)) * (1 + lp)
    rhs = m.phi_prime(p.beta(t)) * (1 - lp)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-8)


@given(v=st.floats(-0.8, 0.8).filter(lambda v: abs(v) > 1e-3), s=st.floats(0, 1))
def test_linear_map_monotone_and_residual(v, s):
    T = 2.0 if v > 0 else 0.9 / abs(v)
    p = make_profile("linear", 1.0, v, T)
    m = moore_for(p)
    t = s * T
    assert abs(float(moore_residual(m, p, t))) <= 1e-12
    assert m.phi_prime(p.alpha(t)) > 0


def test_tabulate():
    m = moore_for(breathing())
    xi, phi, dphi = m.tabulate()
    assert xi.size == phi.size == dphi.size and np.all(np.diff(phi) > 0)
    xi, phi, dphi = moore_constant(1.0).tabulate(11)
    np.testing.assert_allclose(phi, xi)
