"""Surfaces of section and orbital-element histories.

On the fixed Keplerian orbit the section is stroboscopic, ``t = 2 pi k``.
When the orbit is free to evolve the period is no longer fixed, so the
section is taken at pericenter passages, the rising zeros of ``r sin f``.
Angles are reported modulo ``pi`` (the potential is invariant under
``theta_j -> theta_j + pi``); the unreduced angles are kept alongside.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .bodies import BodyPairParams
from .dynamics import DissipationSpec, Model, orbital_elements
from .integrate import Integrator, IntegratorConfig

__all__ = [
    "SectionPoint",
    "PortraitSpec",
    "SeedResult",
    "ElementHistory",
    "pericenter_event",
    "section_keplerian",
    "section_full",
    "element_history",
    "portrait",
    "libration_center",
    "end_state",
    "write_portrait",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SectionPoint:
    k: int
    t: float
    theta1: float
    theta2: float
    p1: float
    p2: float
    a: float = math.nan
    e: float = math.nan
    theta1_raw: float = math.nan
    theta2_raw: float = math.nan


@dataclass(frozen=True)
class PortraitSpec:
    """Initial conditions ``(theta1, p1, theta2, p2)`` and section count."""

    seeds: tuple[tuple[float, float, float, float], ...]
    n_sections: int
    model: str = "keplerian"
    threads: int = 1

    def __post_init__(self):
        if self.n_sections < 1:
            raise ValueError("n_sections must be at least 1")
        if self.model not in ("keplerian", "full"):
            raise ValueError(f"unknown model {self.model!r}")
        seeds = tuple(tuple(float(v) for v in s) for s in self.seeds)
        if any(len(s) != 4 for s in seeds):
            raise ValueError("each seed is (theta1, p1, theta2, p2)")
        object.__setattr__(self, "seeds", seeds)

    @classmethod
    def uniform(cls, params: BodyPairParams, n_seeds: int, n_sections: int,
                p_range=(0.5, 1.5), **kw) -> "PortraitSpec":
        """Seeds with ``theta_j = 0`` and ``p_j / C_j`` uniform in ``p_range``."""
        w = np.linspace(p_range[0], p_range[1], n_seeds)
        seeds = tuple((0.0, params.C1 * x, 0.0, params.C2 * x) for x in w)
        return cls(seeds, n_sections, **kw)


@dataclass
class ElementHistory:
    t: np.ndarray
    a: np.ndarray
    e: np.ndarray


@dataclass
class SeedResult:
    seed: tuple[float, float, float, float]
    points: list[SectionPoint] = field(default_factory=list)
    history: ElementHistory | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def as_array(self) -> np.ndarray:
        """``(n, 8)`` array: k, t, theta1, theta2, p1, p2, a, e."""
        return np.array([[q.k, q.t, q.theta1, q.theta2, q.p1, q.p2, q.a, q.e]
                         for q in self.points]).reshape(-1, 8)


@njit(cache=True)
def pericenter_event(t, y, P):
    """``r sin f``; rises through zero at every pericenter passage."""
    return y[0] * math.sin(y[1])


def _reduce(theta: float) -> float:
    x = math.fmod(theta, math.pi)
    if x < 0.0:
        x += math.pi
    return 0.0 if x >= math.pi else x


def _point(k, t, th1, th2, p1, p2, a=math.nan, e=math.nan) -> SectionPoint:
    return SectionPoint(k, float(t), _reduce(th1), _reduce(th2), float(p1), float(p2),
                        float(a), float(e), float(th1), float(th2))


def _rewind(it: Integrator, index: int, offsets: list, slot: int) -> None:
    """Remove whole turns from an angle so long runs keep full precision."""
    turns = math.floor(it.y[index] / _TWO_PI)
    if turns:
        it.shift(index, -turns * _TWO_PI)
        offsets[slot] += turns * _TWO_PI


def _keplerian_seed(params, chi, diss, seed, n_sections, cfg) -> SeedResult:
    model = Model("keplerian", params, chi, diss)
    th1, p1, th2, p2 = seed
    y0 = model.initial_state(th1, p1, th2, p2)
    res = SeedResult(seed, [_point(0, 0.0, th1, th2, p1, p2)])
    it = Integrator(model.rhs, y0, 0.0, cfg, model.args, span=_TWO_PI * n_sections)
    off = [0.0, 0.0]
    for k in range(1, n_sections + 1):
        it.advance_to(_TWO_PI * k)
        y = it.y
        res.points.append(_point(k, it.t, y[0] + off[0], y[1] + off[1], y[2], y[3]))
        _rewind(it, 0, off, 0)
        _rewind(it, 1, off, 1)
    return res


def _full_seed(params, chi, diss, seed, n_sections, cfg, cadence) -> SeedResult:
    model = Model("full", params, chi, diss)
    th1, p1, th2, p2 = seed
    y0 = model.initial_state(th1, p1, th2, p2)
    a0, e0 = orbital_elements(params, y0)
    res = SeedResult(seed, [_point(0, 0.0, th1, th2, p1, p2, a0, e0)])
    # generous horizon: the osculating period differs from 2 pi by O(V_per)
    t_max = _TWO_PI * (n_sections + 1) * 1.5
    it = Integrator(model.rhs, y0, 0.0, cfg, model.args, event=pericenter_event, span=t_max)
    hist_t, hist_y = [0.0], [y0]
    grid = None
    if cadence is not None:
        if not cadence > 0:
            raise ValueError("cadence must be positive")
        grid = np.arange(1, int(t_max / cadence) + 1) * cadence
    off = [0.0, 0.0, 0.0]
    k = 0
    while k < n_sections and it.t < t_max:
        pending = None if grid is None else grid[grid > it.t]
        ev, out = it.next_event(t_max, pending)
        if out.shape[0]:
            hist_t.extend(pending[: out.shape[0]])
            hist_y.extend(out)
        if ev is None:
            break
        k += 1
        y = ev.state
        a, e = orbital_elements(params, y)
        res.points.append(_point(k, ev.t, y[4] + off[1], y[5] + off[2], y[6], y[7], a, e))
        # the potential is 2 pi periodic in f and in each theta
        _rewind(it, 1, off, 0)
        _rewind(it, 4, off, 1)
        _rewind(it, 5, off, 2)
    if k < n_sections:
        res.error = f"only {k} of {n_sections} pericenter passages before t = {t_max:.6g}"
    if cadence is not None:
        Y = np.asarray(hist_y)
        T = np.asarray(hist_t)
        keep = T <= res.points[-1].t if res.points else slice(None)
        a, e = orbital_elements(params, Y[keep])
        res.history = ElementHistory(T[keep], np.atleast_1d(a), np.atleast_1d(e))
    return res


def _run_seeds(fn, seeds, threads):
    def guarded(seed):
        try:
            return fn(seed)
        except Exception as exc:  # reported per seed, the portrait goes on
            return SeedResult(seed, error=f"{type(exc).__name__}: {exc}")

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(guarded, seeds))
    return [guarded(s) for s in seeds]


def section_keplerian(params: BodyPairParams, chi: int, diss: DissipationSpec | None,
                      spec: PortraitSpec, cfg: IntegratorConfig | None = None) -> list[SeedResult]:
    """Stroboscopic section ``t = 2 pi k``, ``k = 0 .. n_sections``, per seed."""
    diss = diss or DissipationSpec.none()
    return _run_seeds(lambda s: _keplerian_seed(params, chi, diss, s, spec.n_sections, cfg),
                      spec.seeds, spec.threads)


def section_full(params: BodyPairParams, chi: int, diss: DissipationSpec | None,
                 spec: PortraitSpec, cfg: IntegratorConfig | None = None,
                 element_cadence: float | None = None) -> list[SeedResult]:
    """Pericenter section of the full problem, annotated with osculating ``(a, e)``.

    Each seed starts at Keplerian pericenter. With ``element_cadence`` the
    osculating elements are also sampled every ``element_cadence`` time units
    from the same integration.
    """
    diss = diss or DissipationSpec.none()
    return _run_seeds(
        lambda s: _full_seed(params, chi, diss, s, spec.n_sections, cfg, element_cadence),
        spec.seeds, spec.threads)


def portrait(params, chi, diss, spec: PortraitSpec, cfg=None, element_cadence=None):
    """Dispatch on ``spec.model``."""
    if spec.model == "keplerian":
        return section_keplerian(params, chi, diss, spec, cfg)
    return section_full(params, chi, diss, spec, cfg, element_cadence)


def element_history(params: BodyPairParams, chi: int, diss: DissipationSpec | None,
                    initial, t_max: float, cadence: float,
                    cfg: IntegratorConfig | None = None) -> ElementHistory:
    """Osculating ``(a, e)`` every ``cadence`` time units up to ``t_max``.

    ``initial`` is either a spin seed ``(theta1, p1, theta2, p2)`` started at
    pericenter or a full 8-component state.
    """
    if not cadence > 0 or not t_max > 0:
        raise ValueError("t_max and cadence must be positive")
    model = Model("full", params, chi, diss or DissipationSpec.none())
    initial = np.asarray(initial, dtype=float)
    y0 = model.initial_state(*initial) if initial.size == 4 else initial
    grid = np.arange(0, int(math.floor(t_max / cadence + 1e-9)) + 1) * cadence
    it = Integrator(model.rhs, y0, 0.0, cfg, model.args, span=t_max)
    out = it.advance_to(t_max, grid[grid > 0])
    Y = np.vstack([y0[None, :], out])
    a, e = orbital_elements(params, Y)
    return ElementHistory(grid[: Y.shape[0]], a, e)


def libration_center(points, body: int) -> tuple[float, float]:
    """Center ``(theta, p)`` of a set of section points for body 1 or 2.

    ``theta`` is the circular mean on the circle of length ``pi``, ``p`` the
    arithmetic mean.
    """
    if body not in (1, 2):
        raise ValueError("body must be 1 or 2")
    pts = points.points if isinstance(points, SeedResult) else points
    th = np.array([getattr(q, f"theta{body}") for q in pts])
    p = np.array([getattr(q, f"p{body}") for q in pts])
    ang = math.atan2(np.mean(np.sin(2 * th)), np.mean(np.cos(2 * th))) / 2
    return _reduce(ang), float(np.mean(p))


def end_state(result: SeedResult, n_last: int = 100):
    """End-state marker: mean over the last ``n_last`` points, per body.

    Returns ``((theta1, p1), (theta2, p2))``.
    """
    pts = result.points[-n_last:]
    if not pts:
        raise ValueError("no section points")
    return libration_center(pts, 1), libration_center(pts, 2)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_portrait(results: list[SeedResult], outdir, params: BodyPairParams,
                   meta: dict | None = None) -> list[Path]:
    """One CSV per seed plus ``manifest.json``; returns the written paths."""
    outdir = Path(outdir)
    written = []
    entries = []
    for i, res in enumerate(results):
        full = any(not math.isnan(q.a) for q in res.points)
        cols = ["k", "t", "theta1", "theta2", "p1", "p2"] + (["a", "e"] if full else [])
        cols += ["theta1_raw", "theta2_raw"]
        lines = [",".join(cols)]
        for q in res.points:
            vals = [str(q.k), _fmt(q.t), _fmt(q.theta1), _fmt(q.theta2), _fmt(q.p1), _fmt(q.p2)]
            if full:
                vals += [_fmt(q.a), _fmt(q.e)]
            vals += [_fmt(q.theta1_raw), _fmt(q.theta2_raw)]
            lines.append(",".join(vals))
        path = outdir / f"seed_{i:03d}.csv"
        _atomic_write(path, "\n".join(lines) + "\n")
        written.append(path)
        entries.append({"index": i, "file": path.name, "seed": list(res.seed),
                        "n_points": len(res.points), "error": res.error})
    manifest = {"params": params.as_dict(), "seeds": entries, **(meta or {})}
    mpath = outdir / "manifest.json"
    _atomic_write(mpath, json.dumps(manifest, indent=2, default=_json_default) + "\n")
    written.append(mpath)
    return written


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if hasattr(obj, "__dataclass_fields__"):
        return asdict(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")
