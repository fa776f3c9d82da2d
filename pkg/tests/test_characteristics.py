import numpy as np
import pytest

from moving_string import energy as en
from moving_string.characteristics import build_table, oracle_energy, oracle_ut_ux
from moving_string.errors import OutOfDomain
from moving_string.profiles import (
    gaussian_velocity_bump,
    inverse_alpha,
    make_damping,
    make_profile,
    sine_mode,
    triangle,
)


def test_seed_is_half_extended_data():
    init = gaussian_velocity_bump(1.0)
    tab = build_table(init, make_profile("linear", 1.0, 0.5, 3.0), make_damping(0.5))
    xi = np.linspace(-1, 1, 101)
    np.testing.assert_allclose(tab.fprime(xi), 0.5 * init.extended(xi), atol=1e-8)


def test_standing_wave_oracle():
    p = make_profile("constant", 1.0, T=4.0)
    tab = build_table(sine_mode(1.0), p, make_damping(0.0))
    x = np.linspace(0, 1, 11)
    for t in (0.3, 1.7, 3.9):
        ut, ux = oracle_ut_ux(tab, x, t)
        np.testing.assert_allclose(ux, np.pi / 2 * np.cos(np.pi * x / 2) * np.cos(np.pi * t / 2),
                                   atol=1e-7)
        np.testing.assert_allclose(ut, -np.pi / 2 * np.sin(np.pi * x / 2) * np.sin(np.pi * t / 2),
                                   atol=1e-7)
        assert oracle_energy(tab, t) == pytest.approx(np.pi ** 2 / 16, rel=1e-7)


def test_fixed_end_has_zero_velocity():
    tab = build_table(gaussian_velocity_bump(1.0), make_profile("linear", 1.0, 0.5, 3.0),
                      make_damping(3.0))
    ut, ux = oracle_ut_ux(tab, 0.0, np.linspace(0, 3, 7))
    assert np.max(np.abs(ut)) == 0.0
    np.testing.assert_allclose(ux, 2 * tab.fprime(np.linspace(0, 3, 7)))


def test_reflection_relation_at_nodes():
    p = make_profile("linear", 1.0, -0.5, 1.5)
    d = make_damping(0.5)
    tab = build_table(gaussian_velocity_bump(1.0), p, d)
    # f'(alpha) (1 + l') = -(1/gamma)(1 - l') f'(beta), exact at grid nodes past L
    nodes = tab.grid[tab.grid > 1.0][::97]
    t = inverse_alpha(p, nodes)
    lhs = tab.fprime(nodes) * (1 - 0.5)
    rhs = -(1 / d.gamma) * (1 + 0.5) * tab.fprime(p.beta(t))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * np.max(np.abs(tab.fprime_values)))


def test_transparent_table_vanishes_past_seed():
    tab = build_table(gaussian_velocity_bump(1.0), make_profile("linear", 1.0, 0.5, 6.0),
                      make_damping(1.0))
    assert np.all(tab.fprime_values[tab.grid > 1.0] == 0.0)


def test_kinks_are_grid_nodes():
    init = triangle(1.0, 0.3)
    p = make_profile("linear", 1.0, 0.5, 3.0)
    tab = build_table(init, p, make_damping(0.0))
    assert np.any(np.isclose(tab.grid, 0.3, rtol=0, atol=1e-15))
    assert np.any(np.isclose(tab.grid, -0.3, rtol=0, atol=1e-15))


def test_energy_forms_agree():
    p = make_profile("linear", 1.0, 0.5, 3.0)
    tab = build_table(gaussian_velocity_bump(1.0), p, make_damping(0.5))
    for t in (0.4, 2.5):
        xform = en._integrate_x(tab, t, lambda x, ut, ux: 0.5 * (ut ** 2 + ux ** 2), 0.0)
        assert oracle_energy(tab, t) == pytest.approx(xform, rel=1e-6)


def test_outside_table():
    tab = build_table(sine_mode(1.0), make_profile("constant", 1.0, T=1.0), make_damping(0.0))
    with pytest.raises(OutOfDomain):
        tab.fprime(5.0)
    with pytest.raises(OutOfDomain):
        oracle_ut_ux(tab, 2.0, 0.5)
