import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import solve_ivp
from scipy.optimize import bisect

from spinspin.kepler import kepler_state, solve_kepler, true_anomaly


def test_pericenter_symmetry():
    assert solve_kepler(0.3, 0.0) == 0.0


def test_circular_identity():
    assert solve_kepler(0.0, 1.234) == 1.234


def test_bisection_oracle():
    e, M = 0.02, math.pi / 2
    E = solve_kepler(e, M)
    ref = bisect(lambda x: x - e * math.sin(x) - M, 0.0, math.pi, xtol=1e-15)
    assert abs(E - e * math.sin(E) - M) < 1e-14
    assert E == pytest.approx(ref, abs=1e-14)


@given(st.floats(0.0, 0.99), st.floats(-50.0, 50.0))
def test_kepler_residual(e, M):
    E = solve_kepler(e, M)
    assert abs(E - e * math.sin(E) - M) < 1e-13 * max(1.0, abs(M))


def test_vectorized_matches_scalar():
    M = np.linspace(-7, 7, 31)
    E = solve_kepler(0.7, M)
    assert np.array_equal(E, [solve_kepler(0.7, m) for m in M])


def test_bad_eccentricity():
    with pytest.raises(ValueError):
        solve_kepler(1.0, 0.3)
    with pytest.raises(ValueError):
        true_anomaly(-0.1, 0.3)


def test_pericenter_values(pm):
    ks = kepler_state(pm, 0.0)
    assert ks.r == pytest.approx(17.836, rel=1e-15)
    assert ks.f == 0.0 and ks.pr == 0.0


@pytest.mark.parametrize("e", [0.0, 0.02, 0.5, 0.9])
def test_apocenter(pm, e):
    ks = kepler_state(pm.with_orbit(e0=e), math.pi)
    assert ks.f == pytest.approx(math.pi, abs=1e-14)
    assert ks.r == pytest.approx(pm.a0 * (1 + e), rel=1e-14)


def test_ode_oracle(pm):
    a, mu = pm.a0, pm.mu
    GM = pm.G

    def rhs(t, y):
        r, f, pr, pf = y
        return [pr / mu, pf / (mu * r * r), pf * pf / (mu * r**3) - GM * mu / r**2, 0.0]

    k0 = kepler_state(pm, 0.0)
    sol = solve_ivp(rhs, (0, 1.0), [k0.r, k0.f, k0.pr, k0.pf], method="DOP853",
                    rtol=1e-13, atol=1e-13)
    k1 = kepler_state(pm, 1.0)
    assert sol.y[0, -1] == pytest.approx(k1.r, abs=1e-10 * a)
    assert sol.y[1, -1] == pytest.approx(k1.f, abs=1e-10)


@pytest.mark.parametrize("e", [0.0, 0.02, 0.3, 0.9])
def test_orbit_invariants(pm, e):
    p = pm.with_orbit(e0=e)
    t = np.linspace(0, 4 * math.pi, 2001)
    ks = kepler_state(p, t)
    a, mu = p.a0, p.mu
    np.testing.assert_allclose(ks.r, a * (1 - e * e) / (1 + e * np.cos(ks.f)), rtol=1e-12)
    np.testing.assert_allclose(ks.pf, mu * a * a * math.sqrt(1 - e * e), rtol=1e-12)
    rdot = ks.pr / mu
    energy = 0.5 * (rdot**2 + ks.r**2 * ks.fdot**2) - p.G / ks.r
    np.testing.assert_allclose(energy, -p.G / (2 * a), rtol=1e-12)
    later = kepler_state(p, t + 2 * math.pi)
    np.testing.assert_allclose(later.r, ks.r, rtol=1e-12)
    np.testing.assert_allclose(np.cos(later.f), np.cos(ks.f), atol=1e-12)
