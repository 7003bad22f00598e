"""Elliptic two-body motion with mean motion 1 (mean anomaly == time)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .bodies import BodyPairParams

__all__ = ["KeplerState", "solve_kepler", "kepler_state", "true_anomaly"]

_TWO_PI = 2.0 * math.pi
_RESID_TOL = 1e-14


@njit(cache=True)
def _solve_kepler(e, M):
    # reduce to [-pi, pi]; add the 2*pi*k back at the end so E is continuous in M
    k = math.floor((M + math.pi) / _TWO_PI)
    m = M - k * _TWO_PI
    if e == 0.0:
        return M
    E = m + e * math.sin(m)
    converged = False
    for _ in range(50):
        g = E - e * math.sin(E) - m
        if abs(g) < _RESID_TOL:
            converged = True
            break
        E -= g / (1.0 - e * math.cos(E))
    if not converged:
        lo, hi = -math.pi, math.pi
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid - e * math.sin(mid) - m < 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-16:
                break
        E = 0.5 * (lo + hi)
    return E + k * _TWO_PI


@njit(cache=True)
def _true_from_eccentric(e, E):
    k = math.floor((E + math.pi) / _TWO_PI)
    Er = E - k * _TWO_PI
    f = 2.0 * math.atan2(math.sqrt(1.0 + e) * math.sin(0.5 * Er),
                         math.sqrt(1.0 - e) * math.cos(0.5 * Er))
    return f + k * _TWO_PI


@njit(cache=True)
def _orbit(a, e, t):
    """(E, r, f, rdot, fdot) at time t for a pericenter passage at t = 0."""
    E = _solve_kepler(e, t)
    cE = math.cos(E)
    sE = math.sin(E)
    den = 1.0 - e * cE
    r = a * den
    f = _true_from_eccentric(e, E)
    rdot = a * e * sE / den
    fdot = math.sqrt(1.0 - e * e) / (den * den)
    return E, r, f, rdot, fdot


@njit(cache=True)
def _orbit_many(a, e, t):
    n = t.shape[0]
    out = np.empty((5, n))
    for i in range(n):
        E, r, f, rdot, fdot = _orbit(a, e, t[i])
        out[0, i] = E
        out[1, i] = r
        out[2, i] = f
        out[3, i] = rdot
        out[4, i] = fdot
    return out


def _check_e(e):
    if not 0.0 <= e < 1.0:
        raise ValueError(f"eccentricity must satisfy 0 <= e < 1, got {e}")


def solve_kepler(e: float, M):
    """Eccentric anomaly ``E`` with ``E - e sin E = M``.

    Newton iteration from ``M + e sin M``; bisection takes over if Newton has
    not reached a residual of 1e-14 after 50 iterations. ``M`` may be an
    array. The result is continuous in ``M`` across multiples of ``2*pi``.
    """
    _check_e(e)
    if np.ndim(M) == 0:
        return _solve_kepler(float(e), float(M))
    M = np.asarray(M, dtype=float)
    return _orbit_many(1.0, float(e), M.ravel())[0].reshape(M.shape)


def true_anomaly(e: float, E):
    """True anomaly from the eccentric anomaly (half-angle form)."""
    _check_e(e)
    if np.ndim(E) == 0:
        return _true_from_eccentric(float(e), float(E))
    return np.array([_true_from_eccentric(float(e), float(x)) for x in np.ravel(E)]).reshape(np.shape(E))


@dataclass(frozen=True)
class KeplerState:
    t: float | np.ndarray
    E: float | np.ndarray
    r: float | np.ndarray
    f: float | np.ndarray
    fdot: float | np.ndarray
    pr: float | np.ndarray
    pf: float | np.ndarray


def kepler_state(params: BodyPairParams, t) -> KeplerState:
    """Keplerian relative orbit of the pair at time(s) ``t``.

    The bodies are at pericenter (``f = 0``) at ``t = 0``. Momenta follow
    ``pr = mu * rdot`` and ``pf = mu * r**2 * fdot``; the latter is the
    constant ``mu * a**2 * sqrt(1 - e**2)``.
    """
    a, e, mu = params.a0, params.e0, params.mu
    if np.ndim(t) == 0:
        E, r, f, rdot, fdot = _orbit(a, e, float(t))
        return KeplerState(float(t), E, r, f, fdot, mu * rdot, mu * r * r * fdot)
    tt = np.asarray(t, dtype=float)
    E, r, f, rdot, fdot = _orbit_many(a, e, tt.ravel()).reshape(5, *tt.shape)
    return KeplerState(tt, E, r, f, fdot, mu * rdot, mu * r * r * fdot)
