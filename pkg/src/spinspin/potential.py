"""Mutual gravitational potential of two planar-rotating triaxial ellipsoids.

``V = V0 + V2 + chi*V4`` with ``V0 = -G M1 M2 / r`` the point-mass term,
``V2`` the quadrupole term (rotations decoupled) and ``V4`` the next term,
which couples the two rotation angles. Gradients are closed-form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .bodies import BodyPairParams
from .kepler import kepler_state
from .series import term_array, terms

__all__ = [
    "PotentialInput",
    "check_chi",
    "v0",
    "v2_exact",
    "v4_exact",
    "grad_exact",
    "v_expanded",
    "vper_along_kepler",
]


@dataclass(frozen=True)
class PotentialInput:
    theta1: float
    theta2: float
    r: float
    f: float

    def __post_init__(self):
        if np.any(np.asarray(self.r) <= 0):
            raise ValueError("separation r must be positive")


def check_chi(chi) -> int:
    """Coupling switch: 0 keeps V2 only (spin-orbit), 1 adds V4 (spin-spin)."""
    if chi not in (0, 1) or isinstance(chi, bool):
        raise ValueError(f"chi must be 0 or 1, got {chi!r}")
    return int(chi)


@njit(cache=True)
def _v2(G, M1, M2, d1, d2, q1, q2, th1, th2, r, f):
    ir3 = 1.0 / (r * r * r)
    return (-G * M2 * 0.25 * ir3 * (q1 + 3.0 * d1 * np.cos(2.0 * th1 - 2.0 * f))
            - G * M1 * 0.25 * ir3 * (q2 + 3.0 * d2 * np.cos(2.0 * th2 - 2.0 * f)))


@njit(cache=True)
def _v4(G, M1, M2, d1, d2, q1, q2, th1, th2, r, f):
    A1 = 20.0 * q2 / M2 + 100.0 / 7.0 * q1 / M1
    A2 = 20.0 * q1 / M1 + 100.0 / 7.0 * q2 / M2
    const = 12.0 * q1 * q2 + 15.0 / 7.0 * (
        M2 / M1 * d1 * d1 + 2.0 * M2 / M1 * q1 * q1
        + M1 / M2 * d2 * d2 + 2.0 * M1 / M2 * q2 * q2)
    bracket = (const
               + d1 * M2 * (A1 * np.cos(2.0 * th1 - 2.0 * f) + 25.0 * d1 / M1 * np.cos(4.0 * th1 - 4.0 * f))
               + d2 * M1 * (A2 * np.cos(2.0 * th2 - 2.0 * f) + 25.0 * d2 / M2 * np.cos(4.0 * th2 - 4.0 * f))
               + 6.0 * d1 * d2 * np.cos(2.0 * th1 - 2.0 * th2)
               + 70.0 * d1 * d2 * np.cos(2.0 * th1 + 2.0 * th2 - 4.0 * f))
    r2 = r * r
    return -3.0 * G / 64.0 / (r2 * r2 * r) * bracket


@njit(cache=True)
def _grad_vper(G, M1, M2, d1, d2, q1, q2, chi, th1, th2, r, f):
    """Partials (d/dtheta1, d/dtheta2, d/dr, d/df) of V2 + chi*V4."""
    ir = 1.0 / r
    ir3 = ir * ir * ir
    s21 = math.sin(2.0 * th1 - 2.0 * f)
    s22 = math.sin(2.0 * th2 - 2.0 * f)
    c21 = math.cos(2.0 * th1 - 2.0 * f)
    c22 = math.cos(2.0 * th2 - 2.0 * f)

    t1 = 1.5 * G * M2 * d1 * ir3 * s21
    t2 = 1.5 * G * M1 * d2 * ir3 * s22
    v2 = -0.25 * G * ir3 * (M2 * (q1 + 3.0 * d1 * c21) + M1 * (q2 + 3.0 * d2 * c22))
    g1 = t1
    g2 = t2
    gr = -3.0 * v2 * ir
    gf = -(t1 + t2)
    if chi != 0:
        A1 = 20.0 * q2 / M2 + 100.0 / 7.0 * q1 / M1
        A2 = 20.0 * q1 / M1 + 100.0 / 7.0 * q2 / M2
        const = 12.0 * q1 * q2 + 15.0 / 7.0 * (
            M2 / M1 * d1 * d1 + 2.0 * M2 / M1 * q1 * q1
            + M1 / M2 * d2 * d2 + 2.0 * M1 / M2 * q2 * q2)
        s41 = math.sin(4.0 * th1 - 4.0 * f)
        s42 = math.sin(4.0 * th2 - 4.0 * f)
        smix = math.sin(2.0 * th1 - 2.0 * th2)
        ssum = math.sin(2.0 * th1 + 2.0 * th2 - 4.0 * f)
        bracket = (const
                   + d1 * M2 * (A1 * c21 + 25.0 * d1 / M1 * math.cos(4.0 * th1 - 4.0 * f))
                   + d2 * M1 * (A2 * c22 + 25.0 * d2 / M2 * math.cos(4.0 * th2 - 4.0 * f))
                   + 6.0 * d1 * d2 * math.cos(2.0 * th1 - 2.0 * th2)
                   + 70.0 * d1 * d2 * math.cos(2.0 * th1 + 2.0 * th2 - 4.0 * f))
        db1 = (-d1 * M2 * (2.0 * A1 * s21 + 100.0 * d1 / M1 * s41)
               - 12.0 * d1 * d2 * smix - 140.0 * d1 * d2 * ssum)
        db2 = (-d2 * M1 * (2.0 * A2 * s22 + 100.0 * d2 / M2 * s42)
               + 12.0 * d1 * d2 * smix - 140.0 * d1 * d2 * ssum)
        pref = -3.0 * G / 64.0 * ir3 * ir * ir
        g1 += pref * db1
        g2 += pref * db2
        gf -= pref * (db1 + db2)
        gr += -5.0 * pref * bracket * ir
    return g1, g2, gr, gf


def _shape_args(params: BodyPairParams):
    p = params
    return p.G, p.M1, p.M2, p.d1, p.d2, p.q1, p.q2


def _unpack(inp: PotentialInput):
    return inp.theta1, inp.theta2, inp.r, inp.f


def v0(params: BodyPairParams, r):
    """Point-mass potential ``-G M1 M2 / r``."""
    return -params.G * params.mu / np.asarray(r, dtype=float)


def v2_exact(params: BodyPairParams, inp: PotentialInput):
    """Quadrupole potential V2 at (theta1, theta2, r, f); arrays broadcast."""
    return _v2.py_func(*_shape_args(params), *_unpack(inp))


def v4_exact(params: BodyPairParams, inp: PotentialInput):
    """Coupling potential V4 at (theta1, theta2, r, f); arrays broadcast."""
    return _v4.py_func(*_shape_args(params), *_unpack(inp))


def grad_exact(params: BodyPairParams, inp: PotentialInput, chi: int) -> tuple[float, float, float, float]:
    """Closed-form ``(dV/dtheta1, dV/dtheta2, dV/dr, dV/df)`` of ``V0 + V2 + chi*V4``."""
    chi = check_chi(chi)
    th1, th2, r, f = (float(x) for x in _unpack(inp))
    g1, g2, gr, gf = _grad_vper(*_shape_args(params), chi, th1, th2, r, f)
    gr += params.G * params.mu / (r * r)
    return g1, g2, gr, gf


def v_expanded(params: BodyPairParams, theta1, theta2, t, order2: bool = True):
    """``(V2, V4)`` from the second-order eccentricity series along the orbit.

    With ``order2=False`` the ``e**2`` terms are dropped. Angles and ``t``
    broadcast against each other.
    """
    p = params
    th1, th2, tt = np.broadcast_arrays(np.asarray(theta1, float), np.asarray(theta2, float),
                                       np.asarray(t, float))
    out = []
    for block in ("V2", "V4"):
        amp, kt, k1, k2 = term_array(block, p.G, p.M1, p.M2, p.d1, p.d2, p.q1, p.q2, p.a0, p.e0)
        if not order2:
            pe = np.array([tm.pe for tm in terms(block)])
            amp = np.where(pe <= 1, amp, 0.0)
        phase = (tt[..., None] * kt + th1[..., None] * k1 + th2[..., None] * k2)
        val = np.sum(amp * np.cos(phase), axis=-1)
        out.append(val[()] if val.ndim == 0 else val)
    return out[0], out[1]


def vper_along_kepler(params: BodyPairParams, theta1, theta2, t):
    """Exact ``(V2, V4)`` with ``r(t), f(t)`` taken from the Kepler solution."""
    ks = kepler_state(params, t)
    inp = PotentialInput(np.asarray(theta1, float), np.asarray(theta2, float), ks.r, ks.f)
    return v2_exact(params, inp), v4_exact(params, inp)
