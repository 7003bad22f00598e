"""Physical parameters of the two ellipsoids in normalized units.

Units are fixed by ``M1 + M2 = 1``, ``C1 + C2 = 1`` and an orbital period of
``2*pi``, so that the mean motion is 1 and ``G = a**3``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

__all__ = [
    "BodyPairParams",
    "DerivedParams",
    "ParameterError",
    "derive",
    "patroclus_menoetius",
    "load_config",
    "PRESETS",
]

_SUM_TOL = 1e-12


class ParameterError(ValueError):
    """Raised when a parameter set violates a physical constraint."""


@dataclass(frozen=True)
class BodyPairParams:
    """Masses, inertia and shape of the pair plus the reference orbit.

    ``d = B - A`` measures equatorial ellipticity, ``q = 2C - B - A`` the
    flattening. Validation happens in ``__post_init__``; an instance that
    exists satisfies every constraint.
    """

    M1: float
    M2: float
    C1: float
    C2: float
    d1: float
    d2: float
    q1: float
    q2: float
    a0: float
    e0: float
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        for key in ("M1", "M2", "C1", "C2", "d1", "d2", "q1", "q2", "a0", "e0"):
            val = getattr(self, key)
            if not isinstance(val, (int, float)) or not math.isfinite(val):
                raise ParameterError(f"{key} must be a finite number, got {val!r}")
            object.__setattr__(self, key, float(val))
        if abs(self.M1 + self.M2 - 1.0) > _SUM_TOL:
            raise ParameterError(f"M1 + M2 = 1 violated (sum = {self.M1 + self.M2!r})")
        if abs(self.C1 + self.C2 - 1.0) > _SUM_TOL:
            raise ParameterError(f"C1 + C2 = 1 violated (sum = {self.C1 + self.C2!r})")
        if self.M1 <= 0 or self.M2 <= 0:
            raise ParameterError("masses must be positive")
        for j in (1, 2):
            d = getattr(self, f"d{j}")
            q = getattr(self, f"q{j}")
            C = getattr(self, f"C{j}")
            if not 0.0 <= d:
                raise ParameterError(f"0 <= d{j} violated (d{j} = {d})")
            if not d <= C:
                raise ParameterError(f"d{j} <= C{j} violated (d{j} = {d}, C{j} = {C})")
            if not C <= 1.0:
                raise ParameterError(f"C{j} <= 1 violated (C{j} = {C})")
            if not C > 0.0:
                raise ParameterError(f"C{j} > 0 violated (C{j} = {C})")
            if not d <= q:
                raise ParameterError(f"d{j} <= q{j} violated (d{j} = {d}, q{j} = {q})")
            if not q <= 2.0 * C:
                raise ParameterError(f"q{j} <= 2*C{j} violated (q{j} = {q}, C{j} = {C})")
        if not self.a0 > 0.0:
            raise ParameterError(f"a0 > 0 violated (a0 = {self.a0})")
        if not 0.0 <= self.e0 < 1.0:
            raise ParameterError(f"0 <= e0 < 1 violated (e0 = {self.e0})")

    @property
    def G(self) -> float:
        return self.a0**3

    @property
    def mu(self) -> float:
        return self.M1 * self.M2

    def with_orbit(self, a0: float | None = None, e0: float | None = None) -> "BodyPairParams":
        """Copy with a different reference semimajor axis and/or eccentricity."""
        return replace(
            self,
            a0=self.a0 if a0 is None else a0,
            e0=self.e0 if e0 is None else e0,
        )

    def swapped(self) -> "BodyPairParams":
        """Same system with the labels of the two bodies exchanged."""
        return replace(
            self, M1=self.M2, M2=self.M1, C1=self.C2, C2=self.C1,
            d1=self.d2, d2=self.d1, q1=self.q2, q2=self.q1,
        )

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class DerivedParams:
    G: float
    mu: float
    n: float
    lambda1: float
    lambda2: float
    sigma1: float
    sigma2: float
    qhat1: float
    qhat2: float


def derive(params: BodyPairParams) -> DerivedParams:
    """Gravitational constant, reduced mass and the non-dimensional groups.

    ``lambda_j = 3 mu d_j / (M_j C_j)``, ``sigma_j = C_j / (3 mu a**2)`` and
    ``qhat_j = q_j / (M_j a**2)``. They are exposed for reference only; no
    equation of motion in this package uses them.
    """
    p = params
    mu = p.mu
    a2 = p.a0 * p.a0
    return DerivedParams(
        G=p.a0**3,
        mu=mu,
        n=math.sqrt(p.a0**3 * (p.M1 + p.M2) / p.a0**3),
        lambda1=3.0 * mu / p.M1 * p.d1 / p.C1,
        lambda2=3.0 * mu / p.M2 * p.d2 / p.C2,
        sigma1=p.C1 / (3.0 * mu * a2),
        sigma2=p.C2 / (3.0 * mu * a2),
        qhat1=p.q1 / (p.M1 * a2),
        qhat2=p.q2 / (p.M2 * a2),
    )


def patroclus_menoetius() -> BodyPairParams:
    """Binary Trojan asteroid Patroclus-Menoetius (a = 18.2, e = 0.02)."""
    return BodyPairParams(
        M1=0.56, M2=0.44, C1=0.6, C2=0.4,
        d1=0.0482, d2=0.0321, q1=0.2226, q2=0.1443,
        a0=18.2, e0=0.02, name="patroclus-menoetius",
    )


PRESETS = {"patroclus-menoetius": patroclus_menoetius}

_PRESET_DIR = Path(__file__).with_name("presets")


def _read_mapping(path: Path) -> dict:
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return json.loads(text)
    try:
        import tomllib  # type: ignore[import-not-found]
    except ModuleNotFoundError:
        import tomli as tomllib
    return tomllib.loads(text)


def _get(cfg: Mapping, dotted: str, default=None):
    node: Any = cfg
    for part in dotted.split("."):
        if not isinstance(node, Mapping) or part not in node:
            if default is not None:
                return default
            raise ParameterError(f"config key {dotted!r} missing")
        node = node[part]
    return node


def load_config(path: str | Path) -> tuple[BodyPairParams, tuple[float, float]]:
    """Read a TOML or JSON config.

    Returns the body parameters and the direct dissipation constants
    ``(delta1, delta2)`` (zero when the ``dissipation`` table is absent).
    A bare preset name (``patroclus-menoetius``, ``pluto-charon``) is also
    accepted in place of a path.
    """
    path = Path(path)
    if not path.exists():
        stem = str(path)
        builtin = _PRESET_DIR / f"{stem}.toml"
        if builtin.exists():
            path = builtin
        else:
            raise ParameterError(f"config file {stem!r} not found")
    cfg = _read_mapping(path)
    params = BodyPairParams(
        M1=_get(cfg, "masses.M1"), M2=_get(cfg, "masses.M2"),
        C1=_get(cfg, "inertia.C1"), C2=_get(cfg, "inertia.C2"),
        d1=_get(cfg, "shape.d1"), d2=_get(cfg, "shape.d2"),
        q1=_get(cfg, "shape.q1"), q2=_get(cfg, "shape.q2"),
        a0=_get(cfg, "orbit.a"), e0=_get(cfg, "orbit.e"),
        name=str(cfg.get("name", path.stem)),
    )
    delta1 = float(_get(cfg, "dissipation.delta1", 0.0))
    delta2 = float(_get(cfg, "dissipation.delta2", 0.0))
    if delta1 < 0 or delta2 < 0:
        raise ParameterError("dissipation constants must be non-negative")
    return params, (delta1, delta2)
