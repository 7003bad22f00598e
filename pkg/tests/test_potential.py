import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinspin.potential import (
    PotentialInput, check_chi, grad_exact, v2_exact, v4_exact, v_expanded, vper_along_kepler,
)
from oracles import mp_potential, richardson_gradient, v_total
from strategies import angles, body_pairs


def test_spherical_bodies_vanish(spherical):
    inp = PotentialInput(0.3, 1.1, 18.0, 0.2)
    assert v2_exact(spherical, inp) == 0.0
    assert v4_exact(spherical, inp) == 0.0
    assert v_expanded(spherical, 0.3, 1.1, 0.7) == (0.0, 0.0)


def test_aligned_axes(pm):
    r, f = 17.5, 0.4
    v = v2_exact(pm, PotentialInput(f, f, r, f))
    G = pm.G
    ref = -G * pm.M2 * (pm.q1 + 3 * pm.d1) / (4 * r**3) - G * pm.M1 * (pm.q2 + 3 * pm.d2) / (4 * r**3)
    assert v == pytest.approx(ref, rel=1e-15)


def test_v4_constant_block(pm):
    p = pm.__class__(**{**pm.as_dict(), "d1": 0.0, "d2": 0.0})
    r = 18.0
    v = v4_exact(p, PotentialInput(0.3, 1.1, r, 0.2))
    q1, q2, M1, M2 = p.q1, p.q2, p.M1, p.M2
    ref = -3 * p.G / (4**3 * r**5) * (12 * q1 * q2 + 15 / 7 * (2 * q1**2 * M2 / M1 + 2 * q2**2 * M1 / M2))
    assert v == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize("state", [(0.3, 1.1, 18.0, 0.2), (2.0, -0.7, 17.9, 3.0), (-1.4, 5.5, 18.5, -2.2)])
def test_arbitrary_precision_oracle(pm, state):
    v2, v4 = mp_potential(pm, *state)
    inp = PotentialInput(*state)
    assert v2_exact(pm, inp) == pytest.approx(v2, rel=1e-13)
    assert v4_exact(pm, inp) == pytest.approx(v4, rel=1e-13)


def test_spherical_gradient(spherical):
    g = grad_exact(spherical, PotentialInput(0.3, 1.1, 18.0, 0.2), 1)
    assert g[0] == g[1] == g[3] == 0.0
    assert g[2] == pytest.approx(spherical.G * spherical.mu / 18.0**2, rel=1e-15)


def test_check_chi():
    assert check_chi(0) == 0 and check_chi(1) == 1
    for bad in (2, True, 0.5):
        with pytest.raises(ValueError):
            check_chi(bad)


def test_nonpositive_separation():
    with pytest.raises(ValueError):
        PotentialInput(0.0, 0.0, 0.0, 0.0)


@settings(max_examples=60, deadline=None)
@given(body_pairs(), angles, angles, st.floats(0.6, 1.6), angles, st.sampled_from([0, 1]))
def test_gradient_matches_finite_differences(p, th1, th2, rs, f, chi):
    r = rs * p.a0
    g = np.array(grad_exact(p, PotentialInput(th1, th2, r, f), chi))
    fd = richardson_gradient(lambda a, b, c, d: v_total(p, chi, a, b, c, d),
                             [th1, th2, r, f], np.array([1e-3, 1e-3, 1e-3 * r, 1e-3]))
    np.testing.assert_allclose(g, fd, rtol=0, atol=1e-7)


@settings(max_examples=60, deadline=None)
@given(body_pairs(), angles, angles, st.floats(0.6, 1.6), angles)
def test_pi_periodicity(p, th1, th2, rs, f):
    r = rs * p.a0
    base = PotentialInput(th1, th2, r, f)
    for shifted in (PotentialInput(th1 + math.pi, th2, r, f), PotentialInput(th1, th2 + math.pi, r, f)):
        assert v2_exact(p, shifted) == pytest.approx(v2_exact(p, base), rel=1e-12, abs=1e-14)
        assert v4_exact(p, shifted) == pytest.approx(v4_exact(p, base), rel=1e-12, abs=1e-14)
        np.testing.assert_allclose(grad_exact(p, shifted, 1), grad_exact(p, base, 1), rtol=1e-11, atol=1e-13)
    e2, e4 = v_expanded(p, th1, th2, f)
    s2, s4 = v_expanded(p, th1 + math.pi, th2 - math.pi, f)
    assert s2 == pytest.approx(e2, rel=1e-12, abs=1e-14)
    assert s4 == pytest.approx(e4, rel=1e-12, abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(body_pairs(), angles, angles, st.floats(0.6, 1.6), angles)
def test_exchange_symmetry(p, th1, th2, rs, f):
    r = rs * p.a0
    a = PotentialInput(th1, th2, r, f)
    b = PotentialInput(th2, th1, r, f)
    q = p.swapped()
    assert v2_exact(q, b) == pytest.approx(v2_exact(p, a), rel=1e-12, abs=1e-14)
    assert v4_exact(q, b) == pytest.approx(v4_exact(p, a), rel=1e-12, abs=1e-14)


def test_expanded_circular_constant(pm):
    p = pm.with_orbit(e0=0.0)
    v2, _ = v_expanded(p, 0.0, 0.0, 0.0)
    a3 = p.a0**3
    G = p.G
    ref = (-G * p.M2 * p.q1 / (4 * a3) - G * p.M1 * p.q2 / (4 * a3)
           - 3 * p.d1 * G * p.M2 / (4 * a3) - 3 * p.d2 * G * p.M1 / (4 * a3))
    assert v2 == pytest.approx(ref, rel=1e-14)


def test_expanded_matches_exact_on_circular_orbit(pm):
    p = pm.with_orbit(e0=0.0)
    t = np.linspace(0, 2 * math.pi, 50)
    e2, e4 = v_expanded(p, 0.4, 1.3, t)
    x2, x4 = vper_along_kepler(p, 0.4, 1.3, t)
    np.testing.assert_allclose(e2, x2, rtol=1e-13)
    np.testing.assert_allclose(e4, x4, rtol=1e-13)


def truncation_errors(p, th1, th2, es, order2=True, n=4001):
    t = np.linspace(0, 2 * math.pi, n)
    out = []
    for e in es:
        q = p.with_orbit(e0=e)
        e2, e4 = v_expanded(q, th1, th2, t, order2)
        x2, x4 = vper_along_kepler(q, th1, th2, t)
        out.append((np.max(np.abs(e2 - x2)), np.max(np.abs(e4 - x4))))
    return np.array(out)


@pytest.mark.parametrize("th", [(0.3, 1.1), (1.3, -0.4)])
def test_truncation_is_third_order(pm, th):
    err = truncation_errors(pm, *th, [0.04, 0.02, 0.01])
    ratios = err[:-1] / err[1:]
    assert np.all(np.abs(ratios - 8) < 1), ratios
    first = truncation_errors(pm, *th, [0.04, 0.02], order2=False)
    assert np.all(np.abs(first[0] / first[1] - 4) < 0.5)
    assert np.all(err[0] < first[0])
