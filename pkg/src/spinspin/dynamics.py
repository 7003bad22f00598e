"""Equations of motion for the spin-orbit / spin-spin model hierarchy.

Two phase spaces are used:

* full problem, ``y = (r, f, pr, pf, theta1, theta2, p1, p2)``: the orbit
  responds to the rotational potential;
* Keplerian problem, ``y = (theta1, theta2, p1, p2)``: the orbit is the fixed
  ellipse ``r(t), f(t)`` with pericenter passage at ``t = 0``.

Right-hand sides are numba kernels with the signature ``rhs(t, y, P)``, where
``P`` is the flat parameter vector built by :func:`pack`. The dataclass level
API (:func:`rhs_full`, :func:`rhs_keplerian`) wraps them.

Tidal torques come in two flavours. ``direct`` applies the MacDonald torque
``delta_j C_j (a/r)**6 (dtheta_j/dt - df/dt)``; ``averaged`` replaces it with
its orbital mean ``gammabar_j (dtheta_j/dt - mubar_j)``. Note that the second
averaged equation uses ``dtheta_2/dt``; the printed source equation has
``dtheta_1/dt`` there, which is inconsistent with the direct form.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .bodies import BodyPairParams
from .kepler import _orbit, kepler_state
from .potential import PotentialInput, _grad_vper, _v2, _v4, check_chi, v2_exact, v4_exact

__all__ = [
    "FullState",
    "SpinState",
    "DissipationSpec",
    "UnboundOrbitError",
    "Model",
    "pack",
    "averaged_dissipation",
    "mean_a_over_r6",
    "orbital_elements",
    "rhs_full",
    "rhs_keplerian",
    "hamiltonian_full",
    "hamiltonian_keplerian",
    "angular_momentum",
    "full_rhs_kernel",
    "keplerian_rhs_kernel",
]

# layout of the packed parameter vector
G_, M1_, M2_, C1_, C2_, D1_, D2_, Q1_, Q2_, A0_, E0_, MU_ = range(12)
CHI_, MODE_, DELTA1_, DELTA2_, GB1_, GB2_, MB1_, MB2_ = range(12, 20)
NPAR = 20

MODES = {"none": 0, "direct": 1, "averaged": 2}


class UnboundOrbitError(ValueError):
    """The osculating orbit has non-positive semimajor axis."""


@dataclass(frozen=True)
class FullState:
    r: float
    f: float
    pr: float
    pf: float
    theta1: float
    theta2: float
    p1: float
    p2: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("separation r must be positive")

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.f, self.pr, self.pf,
                         self.theta1, self.theta2, self.p1, self.p2], dtype=float)

    @classmethod
    def from_array(cls, y) -> "FullState":
        return cls(*(float(v) for v in y))

    @property
    def total_angular_momentum(self) -> float:
        return self.pf + self.p1 + self.p2


@dataclass(frozen=True)
class SpinState:
    theta1: float
    theta2: float
    p1: float
    p2: float
    t: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.theta1, self.theta2, self.p1, self.p2], dtype=float)


def mean_a_over_r6(e: float) -> float:
    """Orbital mean of ``(a/r)**6`` over the mean anomaly."""
    return (1.0 + 3.0 * e**2 + 0.375 * e**4) / (1.0 - e**2) ** 4.5


def _mubar(e: float) -> float:
    num = 1.0 + 7.5 * e**2 + 5.625 * e**4 + 0.3125 * e**6
    den = 1.0 + 3.0 * e**2 + 0.375 * e**4
    return num / den / (1.0 - e**2) ** 1.5


def averaged_dissipation(params: BodyPairParams, delta1: float, delta2: float):
    """``(gammabar1, gammabar2, mubar1, mubar2)`` for the reference orbit.

    ``gammabar_j = delta_j C_j <(a/r)^6>`` and ``mubar_j`` is the ratio
    ``<(a/r)^6 df/dt> / <(a/r)^6>``, the same for both bodies.
    """
    e = params.e0
    if not 0.0 <= e < 1.0:
        raise ValueError(f"eccentricity must satisfy 0 <= e < 1, got {e}")
    if delta1 < 0 or delta2 < 0:
        raise ValueError("dissipation constants must be non-negative")
    k = mean_a_over_r6(e)
    m = _mubar(e)
    return delta1 * params.C1 * k, delta2 * params.C2 * k, m, m


@dataclass(frozen=True)
class DissipationSpec:
    """Which tidal torque acts, and its constants.

    Build instances with :meth:`none`, :meth:`direct`, :meth:`averaged` or
    :meth:`from_gammabar`; the averaged coefficients are then consistent
    with the direct constants by construction.
    """

    mode: str = "none"
    delta1: float = 0.0
    delta2: float = 0.0
    gammabar1: float = 0.0
    gammabar2: float = 0.0
    mubar1: float = 0.0
    mubar2: float = 0.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown dissipation mode {self.mode!r}")
        if self.delta1 < 0 or self.delta2 < 0:
            raise ValueError("dissipation constants must be non-negative")

    @classmethod
    def none(cls) -> "DissipationSpec":
        return cls()

    @classmethod
    def direct(cls, params: BodyPairParams, delta1: float, delta2: float) -> "DissipationSpec":
        g1, g2, m1, m2 = averaged_dissipation(params, delta1, delta2)
        return cls("direct", delta1, delta2, g1, g2, m1, m2)

    @classmethod
    def averaged(cls, params: BodyPairParams, delta1: float, delta2: float) -> "DissipationSpec":
        g1, g2, m1, m2 = averaged_dissipation(params, delta1, delta2)
        return cls("averaged", delta1, delta2, g1, g2, m1, m2)

    @classmethod
    def from_gammabar(cls, params: BodyPairParams, gammabar1: float, gammabar2: float,
                      mode: str = "averaged") -> "DissipationSpec":
        """Invert the averaging: pick ``delta_j`` that give these ``gammabar_j``."""
        k = mean_a_over_r6(params.e0)
        d1 = gammabar1 / (params.C1 * k)
        d2 = gammabar2 / (params.C2 * k)
        if mode == "direct":
            return cls.direct(params, d1, d2)
        if mode == "averaged":
            return cls.averaged(params, d1, d2)
        raise ValueError("from_gammabar needs mode 'direct' or 'averaged'")

    @property
    def is_conservative(self) -> bool:
        return self.mode == "none" or (self.delta1 == 0.0 and self.delta2 == 0.0)


def pack(params: BodyPairParams, chi: int = 1, diss: DissipationSpec | None = None) -> np.ndarray:
    """Flat float vector consumed by the numba right-hand sides."""
    chi = check_chi(chi)
    diss = diss or DissipationSpec.none()
    p = params
    P = np.zeros(NPAR)
    P[[G_, M1_, M2_, C1_, C2_, D1_, D2_, Q1_, Q2_, A0_, E0_, MU_]] = (
        p.G, p.M1, p.M2, p.C1, p.C2, p.d1, p.d2, p.q1, p.q2, p.a0, p.e0, p.mu)
    P[CHI_] = chi
    P[MODE_] = MODES[diss.mode]
    P[[DELTA1_, DELTA2_, GB1_, GB2_, MB1_, MB2_]] = (
        diss.delta1, diss.delta2, diss.gammabar1, diss.gammabar2, diss.mubar1, diss.mubar2)
    return P


@njit(cache=True)
def _osc_a(P, r, pr, pf):
    k = P[A0_] ** 3 * P[M1_] ** 2 * P[M2_] ** 2
    return -k * r * r / (pf * pf - 2.0 * k * r + pr * pr * r * r)


@njit(cache=True)
def full_rhs_kernel(t, y, P):
    r = y[0]
    f = y[1]
    pr = y[2]
    pf = y[3]
    mu = P[MU_]
    G = P[G_]
    g1, g2, gr, gf = _grad_vper(G, P[M1_], P[M2_], P[D1_], P[D2_], P[Q1_], P[Q2_],
                                P[CHI_], y[4], y[5], r, f)
    dy = np.empty(8)
    fdot = pf / (mu * r * r)
    dy[0] = pr / mu
    dy[1] = fdot
    dy[2] = pf * pf / (mu * r * r * r) - (G * mu / (r * r) + gr)
    dy[3] = -gf
    w1 = y[6] / P[C1_]
    w2 = y[7] / P[C2_]
    dy[4] = w1
    dy[5] = w2
    tq1 = 0.0
    tq2 = 0.0
    mode = P[MODE_]
    if mode == 1.0:
        a = _osc_a(P, r, pr, pf)
        if not a > 0.0:
            raise ValueError("osculating semimajor axis is not positive")
        k6 = (a / r) ** 6
        tq1 = P[DELTA1_] * P[C1_] * k6 * (w1 - fdot)
        tq2 = P[DELTA2_] * P[C2_] * k6 * (w2 - fdot)
    elif mode == 2.0:
        tq1 = P[GB1_] * (w1 - P[MB1_])
        tq2 = P[GB2_] * (w2 - P[MB2_])
    dy[6] = -g1 - tq1
    dy[7] = -g2 - tq2
    return dy


@njit(cache=True)
def keplerian_rhs_kernel(t, y, P):
    a = P[A0_]
    _, r, f, _, fdot = _orbit(a, P[E0_], t)
    g1, g2, _, _ = _grad_vper(P[G_], P[M1_], P[M2_], P[D1_], P[D2_], P[Q1_], P[Q2_],
                              P[CHI_], y[0], y[1], r, f)
    w1 = y[2] / P[C1_]
    w2 = y[3] / P[C2_]
    tq1 = 0.0
    tq2 = 0.0
    mode = P[MODE_]
    if mode == 1.0:
        k6 = (a / r) ** 6
        tq1 = P[DELTA1_] * P[C1_] * k6 * (w1 - fdot)
        tq2 = P[DELTA2_] * P[C2_] * k6 * (w2 - fdot)
    elif mode == 2.0:
        tq1 = P[GB1_] * (w1 - P[MB1_])
        tq2 = P[GB2_] * (w2 - P[MB2_])
    dy = np.empty(4)
    dy[0] = w1
    dy[1] = w2
    dy[2] = -g1 - tq1
    dy[3] = -g2 - tq2
    return dy


@njit(cache=True)
def _hamiltonian_full(y, P):
    r = y[0]
    mu = P[MU_]
    G = P[G_]
    args = (G, P[M1_], P[M2_], P[D1_], P[D2_], P[Q1_], P[Q2_], y[4], y[5], r, y[1])
    v = -G * mu / r + _v2(*args)
    if P[CHI_] != 0.0:
        v += _v4(*args)
    return (y[2] ** 2 / (2.0 * mu) + y[3] ** 2 / (2.0 * mu * r * r)
            + y[6] ** 2 / (2.0 * P[C1_]) + y[7] ** 2 / (2.0 * P[C2_]) + v)


@njit(cache=True)
def _hamiltonian_full_many(Y, P):
    out = np.empty(Y.shape[0])
    for i in range(Y.shape[0]):
        out[i] = _hamiltonian_full(Y[i], P)
    return out


def _as_full_array(state) -> np.ndarray:
    if isinstance(state, FullState):
        return state.as_array()
    return np.asarray(state, dtype=float)


def rhs_full(params: BodyPairParams, chi: int, diss: DissipationSpec, state, t: float = 0.0) -> np.ndarray:
    """Time derivative of the full-problem state (autonomous unless torques)."""
    y = _as_full_array(state)
    if not y[0] > 0:
        raise ValueError("separation r must be positive")
    return full_rhs_kernel(float(t), y, pack(params, chi, diss))


def rhs_keplerian(params: BodyPairParams, chi: int, diss: DissipationSpec, state) -> np.ndarray:
    """Time derivative of ``(theta1, theta2, p1, p2)`` on the fixed ellipse."""
    if isinstance(state, SpinState):
        t, y = state.t, state.as_array()
    else:
        raise TypeError("rhs_keplerian expects a SpinState")
    return keplerian_rhs_kernel(float(t), y, pack(params, chi, diss))


def hamiltonian_full(params: BodyPairParams, chi: int, y) -> np.ndarray | float:
    """Total energy of the full problem; ``y`` may be one state or a (n, 8) stack."""
    P = pack(params, chi)
    Y = np.asarray(_as_full_array(y) if isinstance(y, FullState) else y, dtype=float)
    if Y.ndim == 1:
        return float(_hamiltonian_full(Y, P))
    return _hamiltonian_full_many(np.ascontiguousarray(Y), P)


def hamiltonian_keplerian(params: BodyPairParams, chi: int, t, y):
    """Time-dependent spin Hamiltonian on the Keplerian orbit."""
    y = np.asarray(y, dtype=float)
    ks = kepler_state(params, t)
    inp = PotentialInput(y[..., 0], y[..., 1], ks.r, ks.f)
    v = v2_exact(params, inp) + (v4_exact(params, inp) if check_chi(chi) else 0.0)
    return y[..., 2] ** 2 / (2 * params.C1) + y[..., 3] ** 2 / (2 * params.C2) + v


def angular_momentum(y) -> np.ndarray | float:
    """``pf + p1 + p2`` for a full state or stack of states."""
    Y = np.asarray(y, dtype=float)
    return Y[..., 3] + Y[..., 6] + Y[..., 7]


def orbital_elements(params: BodyPairParams, state):
    """Osculating ``(a, e)`` from the orbital part of a full state.

    ``a`` follows from the Keplerian energy with ``G M = a0**3`` held fixed;
    ``e`` from ``pf = mu sqrt(G M a (1 - e^2))``. Works on stacks of states.
    """
    Y = _as_full_array(state)
    r, pr, pf = Y[..., 0], Y[..., 2], Y[..., 3]
    k = params.a0**3 * params.mu**2
    den = pf * pf - 2.0 * k * r + pr * pr * r * r
    if np.any(den == 0.0):
        raise ZeroDivisionError("parabolic state: energy denominator vanishes")
    a = -k * r * r / den
    if np.any(a <= 0):
        raise UnboundOrbitError("state is on an unbound orbit (a <= 0)")
    rad = 1.0 - pf * pf / (k * a)
    if np.any(rad < 0):
        if np.any(rad < -1e-14):
            raise ValueError(f"inconsistent state: e**2 = {np.min(rad)!r} < 0")
        warnings.warn("eccentricity radicand slightly negative; clamped to e = 0",
                      RuntimeWarning, stacklevel=2)
        rad = np.maximum(rad, 0.0)
    e = np.sqrt(rad)
    if np.ndim(a) == 0:
        return float(a), float(e)
    return a, e


@dataclass(frozen=True)
class Model:
    """A fully specified right-hand side ready for :mod:`spinspin.integrate`.

    ``kind`` is ``"full"`` or ``"keplerian"``.
    """

    kind: str
    params: BodyPairParams
    chi: int = 1
    diss: DissipationSpec = DissipationSpec()

    def __post_init__(self):
        if self.kind not in ("full", "keplerian"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        check_chi(self.chi)

    @property
    def rhs(self):
        return full_rhs_kernel if self.kind == "full" else keplerian_rhs_kernel

    @property
    def args(self) -> np.ndarray:
        return pack(self.params, self.chi, self.diss)

    @property
    def dim(self) -> int:
        return 8 if self.kind == "full" else 4

    def initial_state(self, theta1: float, p1: float, theta2: float, p2: float) -> np.ndarray:
        """Spin state at ``t = 0``; the full problem starts at Keplerian pericenter."""
        if self.kind == "keplerian":
            return np.array([theta1, theta2, p1, p2], dtype=float)
        ks = kepler_state(self.params, 0.0)
        return np.array([ks.r, ks.f, ks.pr, ks.pf, theta1, theta2, p1, p2], dtype=float)

    def energy(self, t, y):
        if self.kind == "full":
            return hamiltonian_full(self.params, self.chi, y)
        return hamiltonian_keplerian(self.params, self.chi, t, y)

