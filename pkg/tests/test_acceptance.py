"""Acceptance suite: one test, and one PASS/FAIL line, per criterion.

Run on its own with ``pytest tests/test_acceptance.py -v``. Criterion 9
integrates two seeds for 1e5 orbital periods and takes several minutes.
"""

import math

import numpy as np
import pytest

from spinspin.bodies import BodyPairParams
from spinspin.dynamics import (
    DissipationSpec, Model, angular_momentum, averaged_dissipation, hamiltonian_full,
    mean_a_over_r6,
)
from spinspin.integrate import propagate
from spinspin.poincare import (
    PortraitSpec, end_state, libration_center, section_full, section_keplerian,
)
from spinspin.potential import PotentialInput, grad_exact, v_expanded, vper_along_kepler
from spinspin.stability import (
    Equilibrium, ResonanceSpec, coefficients, coefficients_by_averaging, equilibria, linearize,
    stability_map,
)
from oracles import averaged_by_mp_quadrature, richardson_gradient, v_total

TWO_PI = 2 * math.pi
R11 = ResonanceSpec(1, 1, 1, 1)
R32 = ResonanceSpec(3, 2, 3, 2)
R1132 = ResonanceSpec(1, 1, 3, 2)
ORIGIN = Equilibrium(0.0, 0.0, 0.0)
UNSTABLE = 1e-10


def circ_dist(a, b):
    d = (a - b) % math.pi
    return min(d, math.pi - d)


@pytest.fixture(scope="module")
def conservative_run():
    from spinspin.bodies import patroclus_menoetius
    p = patroclus_menoetius()
    m = Model("full", p, 1)
    y0 = m.initial_state(0.1, p.C1, 0.2, p.C2)
    t1 = 1000 * TWO_PI
    tr = propagate(m.rhs, y0, 0.0, t1, None, m.args, t_eval=np.linspace(0.0, t1, 20001))
    return p, tr


def test_criterion_01_energy(conservative_run, verdict):
    p, tr = conservative_run
    H = hamiltonian_full(p, 1, tr.y)
    dH = float(np.max(np.abs(H - H[0])))
    assert verdict(1, dH <= 1e-10, f"max |H - H0| over 1000 periods = {dH:.3e} (limit 1e-10)")


def test_criterion_02_angular_momentum(conservative_run, verdict):
    _, tr = conservative_run
    L = angular_momentum(tr.y)
    dL = float(np.max(np.abs(L - L[0])))
    assert verdict(2, dL <= 1e-10, f"max |Pf - Pf0| over 1000 periods = {dL:.3e} (limit 1e-10)")


def transition(params, spec, chi, e_grid):
    """Midpoint between the last stable and first unstable eccentricity."""
    prev = None
    for e in e_grid:
        unstable = linearize(params.with_orbit(e0=e), spec, chi, None, ORIGIN).max_real > UNSTABLE
        if unstable and prev is not None:
            return 0.5 * (prev + e)
        prev = None if unstable else e
    return math.nan


def test_criterion_03_stability_thresholds(pm, verdict):
    e_grid = np.round(np.arange(0.0, 0.9 + 1e-9, 1e-3), 3)
    e0 = transition(pm, R11, 0, e_grid)
    e1 = transition(pm, R11, 1, e_grid)
    worst32 = max(linearize(pm.with_orbit(e0=e), R32, 1, None, ORIGIN).max_real
                  for e in np.round(np.arange(0.0, 0.91, 0.1), 1))
    ok0 = abs(e0 - 0.632) <= 0.001
    ok1 = abs(e1 - 0.302) <= 0.001
    ok32 = worst32 <= 1e-10
    detail = (f"chi=0 flip at e={e0:.4f} (want 0.632+-0.001, {'ok' if ok0 else 'off'}); "
              f"chi=1 flip at e={e1:.4f} (want 0.302+-0.001, {'ok' if ok1 else 'off'}); "
              f"(3:2,3:2) max_real={worst32:.2e} (want <= 1e-10, {'ok' if ok32 else 'off'})")
    assert verdict(3, ok0 and ok1 and ok32, detail)


def test_criterion_04_dissipative_eigenvalues(pm, verdict):
    c = coefficients(pm, R11)
    # gammabar at half the bound, the bound itself evaluated at the equilibrium it produces
    gb = (0.0, 0.0)
    phi = (0.0, 0.0)
    for _ in range(50):
        gb = (0.5 * math.sqrt(8 * c.K1 * pm.C1 * math.cos(phi[0])),
              0.5 * math.sqrt(8 * c.L1 * pm.C2 * math.cos(phi[1])))
        diss = DissipationSpec.from_gammabar(pm, *gb)
        eq = equilibria(pm, R11, 0, diss, seeds=[(0.0, 0.0)])[0]
        phi = (eq.phi1, eq.phi2)
    rep = linearize(pm, R11, 0, diss, eq)
    expected = []
    for g, Q, C, ph in ((diss.gammabar1, c.K1, pm.C1, eq.phi1), (diss.gammabar2, c.L1, pm.C2, eq.phi2)):
        root = np.sqrt(complex((g / C) ** 2 - 8 * Q * math.cos(ph) / C))
        expected += [-g / (2 * C) + root / 2, -g / (2 * C) - root / 2]
    err = max(np.min(np.abs(rep.eigenvalues - x)) / abs(x) for x in expected)
    ok = rep.max_real < 0 and err <= 1e-10
    assert verdict(4, ok, f"max_real = {rep.max_real:.3e}, worst relative deviation from "
                          f"closed form = {err:.2e} (limit 1e-10)")


def test_criterion_05_averaged_dissipation(pm, verdict):
    delta = (1e-3, 2e-3)
    worst = 0.0
    raw = 0.0
    same = True
    for e in np.round(np.arange(0.0, 0.91, 0.1), 1):
        p = pm.with_orbit(e0=e)
        g1, g2, m1, m2 = averaged_dissipation(p, *delta)
        k, m = averaged_by_mp_quadrature(e)
        raw = max(raw, abs(mean_a_over_r6(e) - k) / k)
        worst = max(worst, abs(g1 - delta[0] * p.C1 * k), abs(g2 - delta[1] * p.C2 * k),
                    abs(m1 - m), abs(m2 - m))
        same = same and m1 == m2
    ok = worst <= 1e-12 and same
    assert verdict(5, ok, f"max |closed form - quadrature| = {worst:.2e} for delta = {delta} "
                          f"(limit 1e-12); mubar1 == mubar2: {same}; "
                          f"relative error of <(a/r)^6> itself {raw:.1e}")


def test_criterion_06_truncation_order(pm, verdict):
    t = np.linspace(0.0, TWO_PI, 4001)
    ratios = []
    for th1, th2 in ((0.3, 1.1), (1.3, -0.4), (0.0, 0.0)):
        errs = []
        for e in (0.08, 0.04, 0.02):
            p = pm.with_orbit(e0=e)
            s2, s4 = v_expanded(p, th1, th2, t)
            x2, x4 = vper_along_kepler(p, th1, th2, t)
            errs.append((np.max(np.abs(s2 - x2)), np.max(np.abs(s4 - x4))))
        errs = np.array(errs)
        ratios.extend((errs[:-1] / errs[1:]).ravel())
    ratios = np.array(ratios)
    ok = bool(np.all(np.abs(ratios - 8) <= 1))
    assert verdict(6, ok, f"error ratios per halving of e in [{ratios.min():.3f}, {ratios.max():.3f}] "
                          f"(want 8+-1)")


def test_criterion_07_gradient(verdict):
    rng = np.random.default_rng(20240607)
    worst = 0.0
    for _ in range(1000):
        M1 = rng.uniform(0.1, 0.9)
        C1 = rng.uniform(0.1, 0.9)
        C2 = 1.0 - C1
        d1, d2 = rng.uniform(0, 0.5) * C1, rng.uniform(0, 0.5) * C2
        q1 = min(d1 + rng.uniform() * (2 * C1 - d1), 2 * C1)
        q2 = min(d2 + rng.uniform() * (2 * C2 - d2), 2 * C2)
        p = BodyPairParams(M1, 1 - M1, C1, C2, d1, d2, q1, q2, rng.uniform(5, 40), rng.uniform(0, 0.5))
        chi = int(rng.integers(0, 2))
        x = np.array([rng.uniform(-np.pi, np.pi), rng.uniform(-np.pi, np.pi),
                      rng.uniform(0.6, 1.6) * p.a0, rng.uniform(-np.pi, np.pi)])
        g = np.array(grad_exact(p, PotentialInput(*x), chi))
        fd = richardson_gradient(lambda a, b, r, f: v_total(p, chi, a, b, r, f), x,
                                 np.array([1e-3, 1e-3, 1e-3 * x[2], 1e-3]))
        worst = max(worst, float(np.max(np.abs(g - fd))))
    assert verdict(7, worst <= 1e-7, f"max |grad - Richardson FD| over 1000 states = {worst:.2e} "
                                     f"(limit 1e-7)")


def test_criterion_08_coefficient_oracle(pm, verdict):
    worst = 0.0
    for spec in (R11, R32, R1132):
        for e in (0.0, 0.02, 0.1, 0.3, 0.6, 0.9):
            for params in (pm.with_orbit(e0=e), pm.with_orbit(a0=25.0, e0=e)):
                closed = coefficients(params, spec).as_dict()
                avg = coefficients_by_averaging(params, spec).as_dict()
                floor = max(abs(v) for v in closed.values())
                for name, v in closed.items():
                    # exact zeros are compared against the largest coefficient
                    worst = max(worst, abs(avg[name] - v) / (abs(v) if v != 0 else floor))
    assert verdict(8, worst <= 1e-12, f"max relative deviation from resonant averaging = {worst:.2e} "
                                      f"(limit 1e-12)")


@pytest.mark.slow
def test_criterion_09_full_vs_keplerian(pm, verdict):
    # (i) libration centers, conservative, 300 sections
    seeds = ((0.2, pm.C1, 0.2, pm.C2), (0.0, 1.05 * pm.C1, 0.0, 1.05 * pm.C2), (0.5, pm.C1, 0.3, pm.C2))
    kep = section_keplerian(pm, 1, None, PortraitSpec(seeds, 300))
    full = section_full(pm, 1, None, PortraitSpec(seeds, 300, "full"))
    dist = 0.0
    for k, f in zip(kep, full):
        assert k.ok and f.ok
        for body in (1, 2):
            tk, pk = libration_center(k, body)
            tf, pf = libration_center(f, body)
            dist = max(dist, circ_dist(tk, tf), abs(pk - pf))
    ok_i = dist <= 0.05

    # (ii) and (iii) dissipative full problem, 1e5 periods
    diss = DissipationSpec.from_gammabar(pm, 6e-6, 4e-6, mode="direct")
    fig4 = ((0.0, 0.2, 0.0, 0.4), (0.0, 1.0, 0.0, 0.4))
    runs = section_full(pm, 1, diss, PortraitSpec(fig4, 100_000, "full"), element_cadence=10 * TWO_PI)
    off_p, off_a, off_e = [], 0.0, 0.0
    for r in runs:
        assert r.ok, r.error
        arr = r.as_array()[-100:]
        off_p.append((float(np.mean(np.abs(arr[:, 4] - pm.C1))), float(np.mean(np.abs(arr[:, 5] - pm.C2)))))
        off_a = max(off_a, float(np.max(np.abs(r.history.a - pm.a0)) / pm.a0))
        off_e = max(off_e, float(np.max(np.abs(r.history.e - pm.e0)) / pm.e0))
        end_state(r)
    ok_ii = all(max(x) < 0.01 for x in off_p)
    ok_iii = off_a <= 0.05 and off_e <= 0.05
    detail = (f"(i) max center offset {dist:.4f} (limit 0.05, {'ok' if ok_i else 'off'}); "
              f"(ii) mean |p - C| of last 100 points "
              + ", ".join(f"({a:.4f}, {b:.4f})" for a, b in off_p)
              + f" (limit 0.01, {'ok' if ok_ii else 'off'}); "
              f"(iii) max relative drift a {off_a:.3f}, e {off_e:.3f} (limit 0.05, {'ok' if ok_iii else 'off'})")
    assert verdict(9, ok_i and ok_ii and ok_iii, detail)


def spread(values):
    return float((np.max(values) - np.min(values)) / np.max(np.abs(values)))


def test_criterion_10_map_structure(pm, verdict):
    cons = stability_map(pm, R11, 1, equilibrium="0,pi", a_range=(15, 30), e_range=(0, 0.3))
    diss = stability_map(pm, R11, 1, delta=(1e-3, 2e-3), equilibrium="0,0",
                         a_range=(15, 30), e_range=(0, 0.3))
    assert np.all(cons.status == "ok") and np.all(diss.status == "ok")
    s_cons = max(spread(cons.max_real[i, :]) for i in range(cons.a.size))
    s_diss = max(spread(diss.max_real[:, j]) for j in range(diss.e.size))
    ok_c, ok_d = s_cons < 0.1, s_diss < 0.1
    detail = (f"conservative (0,pi) worst spread across e = {100 * s_cons:.1f}% "
              f"({'ok' if ok_c else 'off'}); dissipative (0,0) worst spread across a = "
              f"{100 * s_diss:.2e}% ({'ok' if ok_d else 'off'}); limit 10%")
    assert verdict(10, ok_c and ok_d, detail)


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-v"]))
