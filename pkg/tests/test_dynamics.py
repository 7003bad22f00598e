import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from spinspin.dynamics import (
    DissipationSpec, FullState, Model, SpinState, UnboundOrbitError, angular_momentum,
    averaged_dissipation, hamiltonian_full, hamiltonian_keplerian, orbital_elements,
    rhs_full, rhs_keplerian,
)
from spinspin.integrate import propagate
from spinspin.kepler import kepler_state
from oracles import averaged_by_quadrature, mp_full_rhs, richardson_gradient
from strategies import angles, body_pairs

NONE = DissipationSpec.none()


def pericenter_state(p, th1=0.3, p1=None, th2=-0.5, p2=None):
    p1 = p.C1 if p1 is None else p1
    p2 = p.C2 if p2 is None else p2
    return Model("full", p).initial_state(th1, p1, th2, p2)


def test_spherical_bodies_follow_pure_kepler(spherical):
    dy = rhs_full(spherical, 1, NONE, pericenter_state(spherical))
    assert dy[3] == 0.0 and dy[6] == 0.0 and dy[7] == 0.0
    r, mu = dy[0], spherical.mu
    a, e = spherical.a0, spherical.e0
    rddot = a * e / (1 - e) ** 2
    assert dy[2] / mu == pytest.approx(rddot, rel=1e-10)


@settings(max_examples=80, deadline=None)
@given(body_pairs(), st.floats(0.7, 1.5), angles, st.floats(-0.05, 0.05), angles, angles,
       st.floats(-2, 2), st.floats(-2, 2), st.sampled_from([0, 1]))
def test_total_angular_momentum_is_stationary(p, rs, f, prs, th1, th2, p1, p2, chi):
    pf = p.mu * p.a0**2
    y = np.array([rs * p.a0, f, prs * pf / p.a0, pf, th1, th2, p1, p2])
    dy = rhs_full(p, chi, NONE, y)
    scale = max(abs(dy[3]), abs(dy[6]), abs(dy[7]), 1.0)
    assert abs(dy[3] + dy[6] + dy[7]) < 1e-13 * scale


@pytest.mark.parametrize("y", [
    [17.836, 0.0, 0.0, 81.6, 0.3, -0.5, 0.6, 0.4],
    [18.5, 2.1, 0.3, 82.0, 1.7, 0.4, 0.9, -0.2],
])
def test_full_rhs_against_arbitrary_precision(pm, y):
    np.testing.assert_allclose(rhs_full(pm, 1, NONE, y), mp_full_rhs(pm, y), rtol=1e-12, atol=1e-15)


def test_full_state_round_trip(pm):
    y = pericenter_state(pm)
    fs = FullState.from_array(y)
    assert np.array_equal(fs.as_array(), y)
    assert fs.total_angular_momentum == pytest.approx(angular_momentum(y), rel=1e-15)
    np.testing.assert_array_equal(rhs_full(pm, 1, NONE, fs), rhs_full(pm, 1, NONE, y))


def test_rhs_rejects_bad_input(pm):
    y = pericenter_state(pm)
    y[0] = -1.0
    with pytest.raises(ValueError):
        rhs_full(pm, 1, NONE, y)
    with pytest.raises(TypeError):
        rhs_keplerian(pm, 1, NONE, [0.0, 0.0, 0.6, 0.4])


def test_spin_orbit_decoupling(pm):
    a = rhs_keplerian(pm, 0, NONE, SpinState(0.3, 1.1, 0.6, 0.4, 0.7))
    b = rhs_keplerian(pm, 0, NONE, SpinState(0.3, -0.9, 0.6, 0.4, 0.7))
    c = rhs_keplerian(pm, 0, NONE, SpinState(2.0, 1.1, 0.6, 0.4, 0.7))
    assert a[2] == b[2]
    assert a[3] == c[3]
    d = rhs_keplerian(pm, 1, NONE, SpinState(0.3, -0.9, 0.6, 0.4, 0.7))
    assert d[2] != b[2]


@pytest.mark.parametrize("t", [0.0, 0.8, 4.0])
def test_synchronous_equilibrium_on_circular_orbit(pm, t):
    p = pm.with_orbit(e0=0.0)
    diss = DissipationSpec.direct(p, 1e-3, 2e-3)
    dy = rhs_keplerian(p, 1, diss, SpinState(t, t, p.C1, p.C2, t))
    assert dy[2] == pytest.approx(0.0, abs=1e-15)
    assert dy[3] == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("e, omega", [(0.02, 1.3), (0.3, 0.7), (0.6, 2.0)])
def test_direct_torque_averages_to_averaged_torque(spherical, e, omega):
    p = spherical.with_orbit(e0=e)
    delta = (1e-3, 3e-3)
    direct = DissipationSpec.direct(p, *delta)
    avg = DissipationSpec.averaged(p, *delta)

    def torque(t, j):
        dy = rhs_keplerian(p, 1, direct, SpinState(omega * t, omega * t, p.C1 * omega, p.C2 * omega, t))
        return dy[2 + j]

    for j, (gb, mb) in enumerate(((avg.gammabar1, avg.mubar1), (avg.gammabar2, avg.mubar2))):
        mean = quad(torque, 0, 2 * math.pi, args=(j,), epsabs=1e-14, epsrel=1e-13, limit=400)[0] / (2 * math.pi)
        assert mean == pytest.approx(-gb * (omega - mb), abs=1e-10)
        s = SpinState(omega, omega, p.C1 * omega, p.C2 * omega, 1.0)
        assert rhs_keplerian(p, 1, avg, s)[2 + j] == pytest.approx(-gb * (omega - mb), rel=1e-15)


def test_averaged_dissipation_circular(pm):
    g1, g2, m1, m2 = averaged_dissipation(pm.with_orbit(e0=0.0), 1e-3, 2e-3)
    assert (g1, g2, m1, m2) == (1e-3 * pm.C1, 2e-3 * pm.C2, 1.0, 1.0)


def test_averaged_dissipation_quadrature(pm):
    k, m = averaged_by_quadrature(0.2)
    g1, g2, m1, m2 = averaged_dissipation(pm.with_orbit(e0=0.2), 1e-3, 2e-3)
    assert g1 == pytest.approx(1e-3 * pm.C1 * k, abs=1e-12)
    assert g2 == pytest.approx(2e-3 * pm.C2 * k, abs=1e-12)
    assert m1 == m2 == pytest.approx(m, abs=1e-12)


def test_mubar_shared_by_both_bodies(pm):
    g1, g2, m1, m2 = averaged_dissipation(pm.with_orbit(e0=0.3), 1e-3, 5e-3)
    assert g1 != g2
    assert m1 == m2


def test_dissipation_validation(pm):
    with pytest.raises(ValueError):
        DissipationSpec("tidal")
    with pytest.raises(ValueError):
        DissipationSpec.direct(pm, -1.0, 0.0)
    with pytest.raises(ValueError):
        DissipationSpec.from_gammabar(pm, 1e-3, 1e-3, mode="none")


def test_from_gammabar_inverts_averaging(pm):
    d = DissipationSpec.from_gammabar(pm, 6e-6, 4e-6, mode="direct")
    assert d.mode == "direct"
    assert d.gammabar1 == pytest.approx(6e-6, rel=1e-14)
    assert d.gammabar2 == pytest.approx(4e-6, rel=1e-14)


def test_elements_at_pericenter(pm):
    y = pericenter_state(pm)
    a, e = orbital_elements(pm, y)
    assert a == pytest.approx(pm.a0, rel=1e-15)
    assert e == pytest.approx(pm.e0, rel=1e-12)


@pytest.mark.parametrize("t", [0.0, 1.0, 5.5])
def test_elements_on_circular_orbit(pm, t):
    p = pm.with_orbit(e0=0.0)
    ks = kepler_state(p, t)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        a, e = orbital_elements(p, [ks.r, ks.f, ks.pr, ks.pf, 0, 0, 0, 0])
    assert a == pytest.approx(p.a0, rel=1e-14)
    assert e == pytest.approx(0.0, abs=1e-7)


def test_elements_reject_unbound(pm):
    y = pericenter_state(pm)
    y[3] *= 2.0
    with pytest.raises(UnboundOrbitError):
        orbital_elements(pm, y)


def test_elements_stay_fixed_without_coupling(spherical):
    m = Model("full", spherical)
    y0 = m.initial_state(0.0, 0.6, 0.0, 0.4)
    tr = propagate(m.rhs, y0, 0.0, 200 * math.pi, args=m.args, t_eval=np.linspace(0, 200 * math.pi, 401))
    a, e = orbital_elements(spherical, tr.y)
    assert np.max(np.abs(a - spherical.a0)) < 1e-9 * spherical.a0
    assert np.max(np.abs(e - spherical.e0)) < 1e-9


@settings(max_examples=40, deadline=None)
@given(body_pairs(), st.floats(0, 7), angles, angles, st.floats(-2, 2), st.floats(-2, 2))
def test_keplerian_rhs_is_hamiltonian(p, t, th1, th2, p1, p2):
    dy = rhs_keplerian(p, 1, NONE, SpinState(th1, th2, p1, p2, t))
    grad = richardson_gradient(lambda a, b, c, d: float(hamiltonian_keplerian(p, 1, t, [a, b, c, d])),
                               [th1, th2, p1, p2], np.full(4, 1e-3))
    np.testing.assert_allclose(dy, [grad[2], grad[3], -grad[0], -grad[1]], rtol=0, atol=1e-7)


def test_hamiltonian_vectorized(pm):
    y = pericenter_state(pm)
    Y = np.vstack([y, y])
    assert np.array_equal(hamiltonian_full(pm, 1, Y), [hamiltonian_full(pm, 1, y)] * 2)


def test_model_selection(pm):
    assert Model("full", pm).dim == 8
    assert Model("keplerian", pm).dim == 4
    with pytest.raises(ValueError):
        Model("averaged", pm)
    with pytest.raises(ValueError):
        Model("full", pm, chi=3)
