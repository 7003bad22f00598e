"""Averaged resonant models: coefficients, equilibria and linear stability.

Near a spin-spin resonance ``(m1:n1, m2:n2)`` the resonant angles are

    phi_j = 2 theta_j - (2 m_j / n_j) t

and, after averaging over the orbit, the rotational dynamics reduces to a
four-dimensional autonomous system in ``(phi1, phi2, J1, J2)`` with
``J_j = C_j dphi_j/dt / 2``:

    dJ1/dt = -F1(phi) - gb1 (J1/C1 + k1 - mb1)
    dJ2/dt = -F2(phi) - gb2 (J2/C2 + k2 - mb2)

    F1 = K1 sin phi1 + chi [K2 sin phi1 + K3 sin 2phi1 + K4 sin(phi1+phi2) + K5 sin(phi1-phi2)]
    F2 = L1 sin phi2 + chi [L2 sin phi2 + L3 sin 2phi2 + L4 sin(phi1+phi2) - L5 sin(phi1-phi2)]

where ``k_j = m_j / n_j`` and ``gb, mb`` are the orbit-averaged tidal
coefficients. Only (1:1,1:1), (3:2,3:2) and (1:1,3:2) are supported.

Two independent routes to the coefficients exist: :func:`coefficients`
evaluates closed forms; :func:`coefficients_by_averaging` averages the
eccentricity series numerically in extended precision. The tests compare
them.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .bodies import BodyPairParams
from .dynamics import DissipationSpec
from .potential import check_chi
from .series import terms

__all__ = [
    "ResonanceSpec",
    "ResonanceCoefficients",
    "Equilibrium",
    "EquilibriumSearch",
    "StabilityReport",
    "StabilityMap",
    "NoEquilibriumError",
    "coefficients",
    "coefficients_by_averaging",
    "critical_residual",
    "find_equilibria",
    "equilibria",
    "linearize",
    "stability_map",
    "parse_equilibrium_label",
]

_SUPPORTED = {(1, 1, 1, 1), (3, 2, 3, 2), (1, 1, 3, 2)}
_TRIVIAL = ((0.0, 0.0), (0.0, math.pi), (math.pi, 0.0), (math.pi, math.pi))


class NoEquilibriumError(RuntimeError):
    """No solution of the critical equations was found."""


@dataclass(frozen=True)
class ResonanceSpec:
    m1: int
    n1: int
    m2: int
    n2: int

    def __post_init__(self):
        for m, n in ((self.m1, self.n1), (self.m2, self.n2)):
            if m == 0 or n == 0:
                raise ValueError("resonance integers must be nonzero")
            if math.gcd(m, n) != 1:
                raise ValueError(f"{m}:{n} is not in lowest terms")
        if self.key not in _SUPPORTED:
            raise ValueError(
                f"unsupported resonance {self}; choose one of 1:1,1:1 3:2,3:2 1:1,3:2")

    @classmethod
    def parse(cls, text: str) -> "ResonanceSpec":
        """Parse ``"m1:n1,m2:n2"``, e.g. ``"3:2,3:2"``."""
        try:
            left, right = text.replace(" ", "").split(",")
            m1, n1 = (int(x) for x in left.split(":"))
            m2, n2 = (int(x) for x in right.split(":"))
        except ValueError as exc:
            raise ValueError(f"cannot parse resonance {text!r}; expected 'm1:n1,m2:n2'") from exc
        return cls(m1, n1, m2, n2)

    @property
    def key(self) -> tuple[int, int, int, int]:
        return (self.m1, self.n1, self.m2, self.n2)

    @property
    def ratios(self) -> tuple[float, float]:
        """Resonant spin rates ``m_j / n_j`` in units of the mean motion."""
        return self.m1 / self.n1, self.m2 / self.n2

    def angles(self, theta1, theta2, t):
        """Resonant angles ``phi_j = 2 theta_j - 2 (m_j/n_j) t``."""
        k1, k2 = self.ratios
        return 2.0 * np.asarray(theta1) - 2.0 * k1 * np.asarray(t), \
            2.0 * np.asarray(theta2) - 2.0 * k2 * np.asarray(t)

    def __str__(self) -> str:
        return f"{self.m1}:{self.n1},{self.m2}:{self.n2}"


@dataclass(frozen=True)
class ResonanceCoefficients:
    K1: float
    K2: float
    K3: float
    K4: float
    K5: float
    L1: float
    L2: float
    L3: float
    L4: float
    L5: float

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @property
    def K(self) -> np.ndarray:
        return np.array([self.K1, self.K2, self.K3, self.K4, self.K5])

    @property
    def L(self) -> np.ndarray:
        return np.array([self.L1, self.L2, self.L3, self.L4, self.L5])


def coefficients(params: BodyPairParams, spec: ResonanceSpec, G: float | None = None) -> ResonanceCoefficients:
    """Closed-form averaged coefficients at the reference orbit ``(a0, e0)``.

    ``G`` defaults to ``a0**3`` (unit mean motion); pass a value to hold the
    gravitational constant fixed while ``a0`` varies.
    """
    p = params
    G = p.G if G is None else float(G)
    a, e = p.a0, p.e0
    M1, M2, d1, d2, q1, q2 = p.M1, p.M2, p.d1, p.d2, p.q1, p.q2
    e2 = e * e
    a3 = a**3
    a5 = a**5
    # 1:1 blocks
    so11_1 = 3 * d1 * G * M2 / (2 * a3) * (1 - 2.5 * e2)
    so11_2 = 3 * d2 * G * M1 / (2 * a3) * (1 - 2.5 * e2)
    ss11_K2 = (75 * d1 * G * M2 * q1 / (56 * a5 * M1) + 15 * d1 * G * q2 / (8 * a5)) * (1 + e2)
    ss11_L2 = (75 * d2 * G * M1 * q2 / (56 * a5 * M2) + 15 * d2 * G * q1 / (8 * a5)) * (1 + e2)
    ss11_K3 = 75 * d1**2 * G * M2 / (16 * a5 * M1) * (1 - 11 * e2)
    ss11_L3 = 75 * d2**2 * G * M1 / (16 * a5 * M2) * (1 - 11 * e2)
    # 3:2 blocks
    so32_1 = 21 * d1 * e * G * M2 / (4 * a3)
    so32_2 = 21 * d2 * e * G * M1 / (4 * a3)
    ss32_K2 = 675 * d1 * e * G * M2 * q1 / (112 * a5 * M1) + 135 * d1 * e * G * q2 / (16 * a5)
    ss32_L2 = 675 * d2 * e * G * M1 * q2 / (112 * a5 * M2) + 135 * d2 * e * G * q1 / (16 * a5)
    ss32_K3 = 3825 * d1**2 * e2 * G * M2 / (32 * a5 * M1)
    ss32_L3 = 3825 * d2**2 * e2 * G * M1 / (32 * a5 * M2)

    key = spec.key
    if key == (1, 1, 1, 1):
        k4 = 105 * d1 * d2 * G / (16 * a5) * (1 - 11 * e2)
        k5 = 9 * d1 * d2 * G / (16 * a5) + 45 * d1 * d2 * e2 * G / (16 * a5)
        return ResonanceCoefficients(so11_1, ss11_K2, ss11_K3, k4, k5,
                                     so11_2, ss11_L2, ss11_L3, k4, k5)
    if key == (3, 2, 3, 2):
        k4 = 5355 * d1 * d2 * e2 * G / (32 * a5)
        k5 = 45 * d1 * d2 * e2 * G / (16 * a5) + 9 * d1 * d2 * G / (16 * a5)
        return ResonanceCoefficients(so32_1, ss32_K2, ss32_K3, k4, k5,
                                     so32_2, ss32_L2, ss32_L3, k4, k5)
    if key == (1, 1, 3, 2):
        k4 = 1365 * d1 * d2 * e * G / (32 * a5)
        k5 = 45 * d1 * d2 * e * G / (32 * a5)
        return ResonanceCoefficients(so11_1, ss11_K2, ss11_K3, k4, k5,
                                     so32_2, ss32_L2, ss32_L3, k4, k5)
    raise ValueError(f"unsupported resonance {spec}")  # pragma: no cover


def coefficients_by_averaging(params: BodyPairParams, spec: ResonanceSpec,
                              n_t: int = 64, n_phi: int = 8) -> ResonanceCoefficients:
    """Coefficients obtained by averaging the series potential numerically.

    The substitution ``theta_j = (phi_j + 2 k_j t) / 2`` is made in every
    series term, the result is sampled on a uniform ``(t, phi1, phi2)`` grid
    and projected onto the harmonics ``cos(p phi1 + q phi2)`` (trapezoid sums,
    exact for trigonometric polynomials of low enough degree). Extended
    precision keeps small coefficients accurate next to large ones.
    """
    p = params
    ld = np.longdouble
    k1r, k2r = (ld(spec.m1) / ld(spec.n1), ld(spec.m2) / ld(spec.n2))
    two_pi = 2 * np.arccos(ld(-1))
    t = np.arange(n_t, dtype=ld) * two_pi / n_t
    ph = np.arange(n_phi, dtype=ld) * two_pi / n_phi
    T, P1, P2 = np.meshgrid(t, ph, ph, indexing="ij")
    th1 = (P1 + 2 * k1r * T) / 2
    th2 = (P2 + 2 * k2r * T) / 2
    G, M1, M2 = ld(p.G), ld(p.M1), ld(p.M2)
    d1, d2, q1, q2, a, e = (ld(x) for x in (p.d1, p.d2, p.q1, p.q2, p.a0, p.e0))

    def block_average(block):
        acc = np.zeros_like(P1)
        for tm in terms(block):
            amp = (ld(tm.num) / ld(tm.den) * G * e**tm.pe * d1**tm.pd1 * d2**tm.pd2
                   * q1**tm.pq1 * q2**tm.pq2 * M1**tm.pm1 * M2**tm.pm2 / a**tm.pa)
            acc += amp * np.cos(tm.kt * T + tm.k1 * th1 + tm.k2 * th2)
        return acc.mean(axis=0)        # time average, shape (n_phi, n_phi)

    def harmonic(avg, pp, qq):
        basis = np.cos(pp * P1[0] + qq * P2[0])
        return 2 * (avg * basis).mean()

    v2 = block_average("V2")
    v4 = block_average("V4")
    out = dict(
        K1=-2 * harmonic(v2, 1, 0), L1=-2 * harmonic(v2, 0, 1),
        K2=-2 * harmonic(v4, 1, 0), L2=-2 * harmonic(v4, 0, 1),
        K3=-4 * harmonic(v4, 2, 0), L3=-4 * harmonic(v4, 0, 2),
        K4=-2 * harmonic(v4, 1, 1), L4=-2 * harmonic(v4, 1, 1),
        K5=-2 * harmonic(v4, 1, -1), L5=-2 * harmonic(v4, 1, -1),
    )
    return ResonanceCoefficients(**{k: float(v) for k, v in out.items()})


# ----------------------------------------------------------------------------
# equilibria

@dataclass(frozen=True)
class Equilibrium:
    phi1: float
    phi2: float
    residual: float
    J1: float = 0.0
    J2: float = 0.0


@dataclass
class EquilibriumSearch:
    found: list[Equilibrium]
    failed_seeds: list[tuple[float, float]] = field(default_factory=list)


def _tidal_offsets(spec: ResonanceSpec, diss: DissipationSpec | None):
    """Constant torques ``gb_j (k_j - mb_j)`` and damping rates ``gb_j``."""
    if diss is None or diss.is_conservative:
        return 0.0, 0.0, 0.0, 0.0
    k1, k2 = spec.ratios
    g1, g2 = diss.gammabar1, diss.gammabar2
    return g1 * (k1 - diss.mubar1), g2 * (k2 - diss.mubar2), g1, g2


def _forces(c: ResonanceCoefficients, chi: int, phi1, phi2):
    s1, s2 = np.sin(phi1), np.sin(phi2)
    sp, sm = np.sin(phi1 + phi2), np.sin(phi1 - phi2)
    F1 = c.K1 * s1 + chi * (c.K2 * s1 + c.K3 * np.sin(2 * phi1) + c.K4 * sp + c.K5 * sm)
    F2 = c.L1 * s2 + chi * (c.L2 * s2 + c.L3 * np.sin(2 * phi2) + c.L4 * sp - c.L5 * sm)
    return F1, F2


def _abcoeffs(c: ResonanceCoefficients, chi: int, phi1, phi2):
    """``(a1, a2, b1, b2)``: minus the Jacobian of ``(F1, F2)``."""
    cp, cm = math.cos(phi1 + phi2), math.cos(phi1 - phi2)
    a1 = -((c.K1 + chi * c.K2) * math.cos(phi1) + 2 * chi * c.K3 * math.cos(2 * phi1)
           + chi * c.K4 * cp + chi * c.K5 * cm)
    b1 = -chi * (c.K4 * cp - c.K5 * cm)
    a2 = -chi * (c.L4 * cp - c.L5 * cm)
    b2 = -((c.L1 + chi * c.L2) * math.cos(phi2) + 2 * chi * c.L3 * math.cos(2 * phi2)
           + chi * c.L4 * cp + chi * c.L5 * cm)
    return a1, a2, b1, b2


def critical_residual(params, spec, chi, diss, phi1, phi2, coeffs=None) -> tuple[float, float]:
    """Left-hand sides of the two critical equations at ``(phi1, phi2)``."""
    chi = check_chi(chi)
    c = coeffs or coefficients(params, spec)
    t1, t2, _, _ = _tidal_offsets(spec, diss)
    F1, F2 = _forces(c, chi, phi1, phi2)
    return F1 + t1, F2 + t2


def _wrap(x: float) -> float:
    """Angle reduced to ``(-pi, pi]``."""
    y = math.remainder(x, 2 * math.pi)
    return math.pi if y == -math.pi else y


def _ang_dist(p, q) -> float:
    return max(abs(_wrap(p[0] - q[0])), abs(_wrap(p[1] - q[1])))


def _newton(c, chi, t1, t2, seed, tol, max_iter=100):
    x = np.array(seed, dtype=float)
    F = np.array(_forces(c, chi, x[0], x[1])) + (t1, t2)
    norm = np.max(np.abs(F))
    for _ in range(max_iter):
        if norm < tol:
            return x, norm
        a1, a2, b1, b2 = _abcoeffs(c, chi, x[0], x[1])
        Jm = -np.array([[a1, b1], [a2, b2]])
        try:
            dx = np.linalg.solve(Jm, -F)
        except np.linalg.LinAlgError:
            return None, norm
        step = 1.0
        while step > 1e-6:
            xn = x + step * dx
            Fn = np.array(_forces(c, chi, xn[0], xn[1])) + (t1, t2)
            nn = np.max(np.abs(Fn))
            if nn < norm or nn < tol:
                break
            step *= 0.5
        else:
            return None, norm
        x, F, norm = xn, Fn, nn
    return (x, norm) if norm < tol else (None, norm)


def find_equilibria(params: BodyPairParams, spec: ResonanceSpec, chi: int = 1,
                    diss: DissipationSpec | None = None, seeds=None,
                    tol: float = 1e-13) -> EquilibriumSearch:
    """Solve the critical equations with damped Newton from each seed.

    In the conservative model the four points with ``phi_j in {0, pi}`` are
    exact solutions and are always returned first. Seeds default to those
    same four points. Solutions closer than 1e-8 rad are merged.
    """
    chi = check_chi(chi)
    c = coefficients(params, spec)
    t1, t2, _, _ = _tidal_offsets(spec, diss)
    conservative = t1 == 0.0 and t2 == 0.0
    scale = max(float(np.max(np.abs(np.r_[c.K, c.L]))), abs(t1), abs(t2), 1e-300)
    found: list[Equilibrium] = []
    failed: list[tuple[float, float]] = []

    def add(x, res):
        pt = (_wrap(float(x[0])), _wrap(float(x[1])))
        if all(_ang_dist(pt, (q.phi1, q.phi2)) > 1e-8 for q in found):
            found.append(Equilibrium(pt[0], pt[1], float(res)))

    if conservative:
        for pt in _TRIVIAL:
            F = _forces(c, chi, *pt)
            add(pt, max(abs(F[0]), abs(F[1])))
    for seed in (seeds if seeds is not None else _TRIVIAL):
        x, res = _newton(c, chi, t1, t2, seed, tol * scale)
        if x is None:
            failed.append(tuple(float(s) for s in seed))
        else:
            add(x, res)
    return EquilibriumSearch(found, failed)


def equilibria(params: BodyPairParams, spec: ResonanceSpec, chi: int = 1,
               diss: DissipationSpec | None = None, seeds=None) -> list[Equilibrium]:
    """Equilibria of the averaged model; raises if none exists."""
    res = find_equilibria(params, spec, chi, diss, seeds)
    if not res.found:
        raise NoEquilibriumError(
            "no equilibrium: the tidal torque exceeds the resonant restoring torque "
            f"(seeds tried: {len(res.failed_seeds)})")
    return res.found


def parse_equilibrium_label(label: str) -> tuple[float, float]:
    """``"0,pi"`` -> ``(0.0, pi)``; components may be numbers or ``pi``."""
    out = []
    for part in label.replace(" ", "").split(","):
        part = part.lower()
        if part in ("pi", "+pi"):
            out.append(math.pi)
        elif part == "-pi":
            out.append(-math.pi)
        else:
            out.append(float(part))
    if len(out) != 2:
        raise ValueError(f"equilibrium label {label!r} must have two components")
    return out[0], out[1]


# ----------------------------------------------------------------------------
# linear stability

@dataclass(frozen=True)
class StabilityReport:
    equilibrium: Equilibrium
    matrix: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray
    max_real: float
    a1: float
    a2: float
    b1: float
    b2: float
    alpha: float
    beta: float
    method: str


def _biquadratic_roots(alpha: float, beta: float) -> np.ndarray:
    disc = complex(alpha * alpha - 4.0 * beta)
    s = np.sqrt(disc)
    x2 = np.array([(-alpha + s) / 2.0, (-alpha - s) / 2.0], dtype=complex)
    r = np.sqrt(x2)
    return np.array([r[0], -r[0], r[1], -r[1]])


def linearize(params: BodyPairParams, spec: ResonanceSpec, chi: int,
              diss: DissipationSpec | None, eq: Equilibrium,
              coeffs: ResonanceCoefficients | None = None) -> StabilityReport:
    """Linearization at ``eq`` in the variables ``(xi1, xi2, J1, J2)``.

    Without dissipation the characteristic polynomial is the biquadratic
    ``x**4 + alpha x**2 + beta`` and its roots are taken in closed form;
    otherwise the 4x4 matrix goes to a general eigenvalue solver.
    """
    chi = check_chi(chi)
    c = coeffs or coefficients(params, spec)
    _, _, g1, g2 = _tidal_offsets(spec, diss)
    C1, C2 = params.C1, params.C2
    a1, a2, b1, b2 = _abcoeffs(c, chi, eq.phi1, eq.phi2)
    A = np.array([
        [0.0, 0.0, 2.0 / C1, 0.0],
        [0.0, 0.0, 0.0, 2.0 / C2],
        [a1, b1, -g1 / C1, 0.0],
        [a2, b2, 0.0, -g2 / C2],
    ])
    alpha = -2.0 * (a1 / C1 + b2 / C2)
    beta = 4.0 / (C1 * C2) * (a1 * b2 - a2 * b1)
    if g1 == 0.0 and g2 == 0.0:
        ev = _biquadratic_roots(alpha, beta)
        method = "biquadratic"
    else:
        ev = np.linalg.eigvals(A).astype(complex)
        method = "eig"
    ev = ev[np.lexsort((ev.imag, ev.real))]
    return StabilityReport(eq, A, ev, float(np.max(ev.real)), a1, a2, b1, b2, alpha, beta, method)


@dataclass
class StabilityMap:
    """``max_real[i, j]`` belongs to ``(a[i], e[j])``; NaN marks missing cells."""

    a: np.ndarray
    e: np.ndarray
    max_real: np.ndarray
    eigenvalues: np.ndarray
    status: np.ndarray
    spec: ResonanceSpec
    chi: int
    equilibrium: tuple[float, float]

    def records(self):
        """Rows ``(a, e, status, max_real, eig0..eig3)`` in a-major order."""
        for i, a in enumerate(self.a):
            for j, e in enumerate(self.e):
                yield a, e, self.status[i, j], self.max_real[i, j], self.eigenvalues[i, j]


def stability_map(template: BodyPairParams, spec: ResonanceSpec, chi: int,
                  delta: tuple[float, float] = (0.0, 0.0),
                  a_range: tuple[float, float] = (15.0, 30.0),
                  e_range: tuple[float, float] = (0.0, 0.3),
                  grid: tuple[int, int] = (16, 16),
                  equilibrium: str | tuple[float, float] = "0,0",
                  threads: int = 1, hold_gravity: bool = False) -> StabilityMap:
    """Largest real eigenvalue part of one equilibrium over an ``(a, e)`` grid.

    ``delta`` are the direct tidal constants; the averaged coefficients are
    recomputed at every eccentricity. In the conservative case the labelled
    equilibrium is used as is; with dissipation it is continued by Newton
    from the label and the cell is marked ``missing`` if that fails.
    ``hold_gravity`` keeps ``G`` of the template instead of ``G = a**3``.
    """
    chi = check_chi(chi)
    na, ne = grid
    if na < 2 or ne < 2:
        raise ValueError("grid must be at least 2 x 2")
    if not (0 < a_range[0] <= a_range[1]) or not (0 <= e_range[0] <= e_range[1] < 1):
        raise ValueError("invalid a or e range")
    if delta[0] < 0 or delta[1] < 0:
        raise ValueError("dissipation constants must be non-negative")
    target = parse_equilibrium_label(equilibrium) if isinstance(equilibrium, str) else tuple(equilibrium)
    a_vals = np.linspace(a_range[0], a_range[1], na)
    e_vals = np.linspace(e_range[0], e_range[1], ne)
    G_fixed = template.G if hold_gravity else None
    dissipative = delta[0] > 0 or delta[1] > 0

    def cell(i, j):
        params = template.with_orbit(a0=float(a_vals[i]), e0=float(e_vals[j]))
        diss = DissipationSpec.averaged(params, *delta) if dissipative else None
        c = coefficients(params, spec, G=G_fixed)
        t1, t2, _, _ = _tidal_offsets(spec, diss)
        if not dissipative:
            F = _forces(c, chi, *target)
            eq = Equilibrium(target[0], target[1], float(max(abs(F[0]), abs(F[1]))))
        else:
            scale = max(float(np.max(np.abs(np.r_[c.K, c.L]))), abs(t1), abs(t2))
            x, res = _newton(c, chi, t1, t2, target, 1e-13 * scale)
            if x is None or _ang_dist((x[0], x[1]), target) > 0.5 * math.pi:
                return "missing", math.nan, np.full(4, complex(math.nan, math.nan))
            eq = Equilibrium(_wrap(x[0]), _wrap(x[1]), float(res))
        rep = linearize(params, spec, chi, diss, eq, coeffs=c)
        return "ok", rep.max_real, rep.eigenvalues

    def row(i):
        return [cell(i, j) for j in range(ne)]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, range(na)))
    else:
        rows = [row(i) for i in range(na)]
    status = np.empty((na, ne), dtype=object)
    max_real = np.empty((na, ne))
    eigs = np.empty((na, ne, 4), dtype=complex)
    for i, r in enumerate(rows):
        for j, (s, m, ev) in enumerate(r):
            status[i, j] = s
            max_real[i, j] = m
            eigs[i, j] = ev
    return StabilityMap(a_vals, e_vals, max_real, eigs, status, spec, chi, target)
