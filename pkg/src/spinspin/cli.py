"""Command-line front end.

Subcommands: ``integrate``, ``poincare``, ``stability-map``, ``equilibria``,
``coeffs``, ``check`` and ``dump-potential``. Times are given in orbital
periods. CSV goes to ``--out`` (or stdout) with a JSON manifest next to it.

Exit codes: 0 success, 1 invalid input, 2 numerical failure (including a
failed ``check``).
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bodies import BodyPairParams, ParameterError, load_config
from .dynamics import (DissipationSpec, Model, UnboundOrbitError, angular_momentum,
                       hamiltonian_full, orbital_elements)
from .integrate import IntegratorConfig, StepUnderflowError, propagate
from .poincare import PortraitSpec, _atomic_write, portrait, write_portrait
from .series import TERM_COLUMNS, TERMS
from .stability import (NoEquilibriumError, ResonanceSpec, coefficients, find_equilibria,
                        linearize, stability_map)

__all__ = ["main", "run", "RunManifest"]

_TWO_PI = 2.0 * math.pi


class UsageError(Exception):
    """Bad command line or configuration (exit code 1)."""


class NumericalFailure(Exception):
    """Integration, root finding or a conservation check failed (exit code 2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunManifest:
    command: str
    argv: list[str]
    params: dict
    integrator: dict | None = None
    extra: dict = field(default_factory=dict)
    version: str = __version__
    wall_time: float = 0.0


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else _fmt(v) for v in row) + "\n")
    return buf.getvalue()


# ----------------------------------------------------------------------------
# argument groups

def _add_common(p):
    p.add_argument("--config", default="patroclus-menoetius",
                   help="TOML/JSON config file or preset name (default: %(default)s)")
    p.add_argument("--a", type=float, help="override the semimajor axis")
    p.add_argument("--e", type=float, help="override the eccentricity")
    p.add_argument("--out", help="output CSV path (default: stdout)")


def _add_physics(p):
    p.add_argument("--chi", type=int, choices=(0, 1), default=1,
                   help="1 adds the spin-spin coupling term (default: 1)")
    p.add_argument("--delta1", type=float, help="tidal constant of body 1 (overrides config)")
    p.add_argument("--delta2", type=float, help="tidal constant of body 2 (overrides config)")
    p.add_argument("--gammabar1", type=float, help="averaged tidal coefficient of body 1")
    p.add_argument("--gammabar2", type=float, help="averaged tidal coefficient of body 2")
    p.add_argument("--dissipation", choices=("none", "direct", "averaged"),
                   help="torque model (default: averaged for keplerian, direct for full, "
                        "none when all constants vanish)")


def _add_integrator(p):
    p.add_argument("--method", choices=("adaptive", "rk4"), default="adaptive")
    p.add_argument("--rtol", type=float, default=IntegratorConfig.rtol)
    p.add_argument("--atol", type=float, default=IntegratorConfig.atol)
    p.add_argument("--h0", type=float, default=IntegratorConfig.h0,
                   help="initial (adaptive) or fixed (rk4) step")
    p.add_argument("--tmax", type=float, default=100.0, help="duration in orbital periods")


def _add_spin(p):
    p.add_argument("--theta1", type=float, default=0.0)
    p.add_argument("--theta2", type=float, default=0.0)
    p.add_argument("--p1", type=float, help="default: C1 (synchronous)")
    p.add_argument("--p2", type=float, help="default: C2 (synchronous)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="spinspin", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("integrate", help="integrate one trajectory and sample it")
    _add_common(p); _add_physics(p); _add_integrator(p); _add_spin(p)
    p.add_argument("--model", choices=("keplerian", "full"), default="full")
    p.add_argument("--samples-per-period", type=int, default=1)

    p = sub.add_parser("poincare", help="surfaces of section for a set of seeds")
    _add_common(p); _add_physics(p); _add_integrator(p)
    p.add_argument("--model", choices=("keplerian", "full"), default="keplerian")
    p.add_argument("--seeds", help="'theta1,p1,theta2,p2;...' (default: uniform grid)")
    p.add_argument("--n-seeds", type=int, default=8)
    p.add_argument("--outdir", default="poincare_out")
    p.add_argument("--element-cadence", type=float,
                   help="also record (a, e) every this many periods (full model)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("stability-map", help="max real eigenvalue part over an (a, e) grid")
    _add_common(p); _add_physics(p)
    p.add_argument("--resonance", default="1:1,1:1")
    p.add_argument("--equilibrium", default="0,0")
    p.add_argument("--a-min", type=float, default=15.0)
    p.add_argument("--a-max", type=float, default=30.0)
    p.add_argument("--e-min", type=float, default=0.0)
    p.add_argument("--e-max", type=float, default=0.3)
    p.add_argument("--na", type=int, default=16)
    p.add_argument("--ne", type=int, default=16)
    p.add_argument("--hold-gravity", action="store_true",
                   help="keep G of the config instead of G = a**3 at every grid point")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("equilibria", help="equilibria of the averaged model and their stability")
    _add_common(p); _add_physics(p)
    p.add_argument("--resonance", default="1:1,1:1")
    p.add_argument("--seeds", help="extra Newton seeds 'phi1,phi2;...'")

    p = sub.add_parser("coeffs", help="averaged resonant coefficients")
    _add_common(p); _add_physics(p)
    p.add_argument("action", nargs="?", choices=("dump-potential",),
                   help="dump the eccentricity series of the potential instead")
    p.add_argument("--resonance", default="1:1,1:1")

    p = sub.add_parser("check", help="conservation check of the full conservative problem")
    _add_common(p); _add_integrator(p)
    p.add_argument("--conservation", action="store_true", default=True)
    p.add_argument("--model", choices=("full",), default="full")
    p.add_argument("--chi", type=int, choices=(0, 1), default=1)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--theta1", type=float, default=0.1)
    p.add_argument("--theta2", type=float, default=0.2)
    p.add_argument("--p1", type=float)
    p.add_argument("--p2", type=float)

    p = sub.add_parser("dump-potential", help="eccentricity series of V2 and V4 as CSV")
    p.add_argument("--out")
    return ap


# ----------------------------------------------------------------------------
# helpers

def _params(args) -> tuple[BodyPairParams, tuple[float, float]]:
    params, delta = load_config(args.config)
    if args.a is not None or args.e is not None:
        params = params.with_orbit(args.a, args.e)
    return params, delta


def _dissipation(args, params, delta, model: str) -> DissipationSpec:
    d1 = args.delta1 if args.delta1 is not None else delta[0]
    d2 = args.delta2 if args.delta2 is not None else delta[1]
    mode = args.dissipation or ("averaged" if model == "keplerian" else "direct")
    if args.gammabar1 is not None or args.gammabar2 is not None:
        if args.delta1 is not None or args.delta2 is not None:
            raise UsageError("give either --delta* or --gammabar*, not both")
        g1 = args.gammabar1 or 0.0
        g2 = args.gammabar2 or 0.0
        if g1 < 0 or g2 < 0:
            raise UsageError("gammabar must be non-negative")
        if mode == "none" or (g1 == 0 and g2 == 0):
            return DissipationSpec.none()
        return DissipationSpec.from_gammabar(params, g1, g2, mode)
    if d1 < 0 or d2 < 0:
        raise UsageError("delta must be non-negative")
    if mode == "none" or (d1 == 0 and d2 == 0):
        return DissipationSpec.none()
    return getattr(DissipationSpec, mode)(params, d1, d2)


def _cfg(args) -> IntegratorConfig:
    return IntegratorConfig(method=args.method, h0=args.h0, rtol=args.rtol, atol=args.atol)


def _spin(args, params):
    p1 = params.C1 if args.p1 is None else args.p1
    p2 = params.C2 if args.p2 is None else args.p2
    return args.theta1, p1, args.theta2, p2


def _emit(args, text: str, manifest: RunManifest | None) -> None:
    if args.out:
        path = Path(args.out)
        _atomic_write(path, text)
        if manifest is not None:
            mpath = path.with_name(path.name + ".manifest.json")
            _atomic_write(mpath, json.dumps(asdict(manifest), indent=2) + "\n")
    else:
        sys.stdout.write(text)


def _manifest(args, argv, params, cfg=None, **extra) -> RunManifest:
    return RunManifest(args.command, list(argv), params.as_dict(),
                       asdict(cfg) if cfg is not None else None, extra)


# ----------------------------------------------------------------------------
# subcommands

def _cmd_integrate(args, argv):
    params, delta = _params(args)
    diss = _dissipation(args, params, delta, args.model)
    cfg = _cfg(args)
    model = Model(args.model, params, args.chi, diss)
    y0 = model.initial_state(*_spin(args, params))
    if not args.tmax > 0 or args.samples_per_period < 1:
        raise UsageError("--tmax and --samples-per-period must be positive")
    t1 = _TWO_PI * args.tmax
    n = int(round(args.tmax * args.samples_per_period))
    t_eval = np.linspace(0.0, t1, n + 1)
    tr = propagate(model.rhs, y0, 0.0, t1, cfg, model.args, t_eval=t_eval)
    if args.model == "full":
        H = hamiltonian_full(params, args.chi, tr.y)
        Pf = angular_momentum(tr.y)
        a, e = orbital_elements(params, tr.y)
        header = ["t", "r", "f", "pr", "pf", "theta1", "theta2", "p1", "p2", "H", "Pf", "a", "e"]
        rows = (np.r_[t, y, h, pf, aa, ee] for t, y, h, pf, aa, ee in zip(tr.t, tr.y, H, Pf, a, e))
    else:
        header = ["t", "theta1", "theta2", "p1", "p2"]
        rows = (np.r_[t, y] for t, y in zip(tr.t, tr.y))
    man = _manifest(args, argv, params, cfg, model=args.model, chi=args.chi,
                    dissipation=asdict(diss), n_accepted=tr.n_accepted, n_rejected=tr.n_rejected)
    return _csv(header, rows), man


def _parse_seeds(text: str, width: int):
    seeds = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        vals = []
        for tok in chunk.split(","):
            tok = tok.strip().lower()
            vals.append(math.pi if tok == "pi" else float(tok))
        if len(vals) != width:
            raise UsageError(f"seed {chunk!r} needs {width} values")
        seeds.append(tuple(vals))
    if not seeds:
        raise UsageError("no seeds given")
    return tuple(seeds)


def _cmd_poincare(args, argv):
    params, delta = _params(args)
    diss = _dissipation(args, params, delta, args.model)
    cfg = _cfg(args)
    n_sections = int(round(args.tmax))
    if n_sections < 1:
        raise UsageError("--tmax must be at least one period")
    if args.seeds:
        spec = PortraitSpec(_parse_seeds(args.seeds, 4), n_sections, args.model, args.threads)
    else:
        spec = PortraitSpec.uniform(params, args.n_seeds, n_sections, model=args.model,
                                    threads=args.threads)
    cadence = None if args.element_cadence is None else args.element_cadence * _TWO_PI
    t0 = time.perf_counter()
    results = portrait(params, args.chi, diss, spec, cfg, cadence)
    meta = {"command": "poincare", "argv": list(argv), "version": __version__,
            "model": args.model, "chi": args.chi, "dissipation": asdict(diss),
            "integrator": asdict(cfg), "n_sections": n_sections,
            "wall_time": time.perf_counter() - t0}
    paths = write_portrait(results, args.outdir, params, meta)
    for res in results:
        if res.history is not None:
            idx = results.index(res)
            text = _csv(["t", "a", "e"], zip(res.history.t, res.history.a, res.history.e))
            _atomic_write(Path(args.outdir) / f"elements_{idx:03d}.csv", text)
    failed = [r for r in results if not r.ok]
    summary = f"wrote {len(paths)} files to {args.outdir}\n"
    for r in failed:
        summary += f"seed {r.seed}: {r.error}\n"
    if failed and len(failed) == len(results):
        raise NumericalFailure(summary.strip())
    return summary, None


def _cmd_stability_map(args, argv):
    params, delta = _params(args)
    d1 = args.delta1 if args.delta1 is not None else delta[0]
    d2 = args.delta2 if args.delta2 is not None else delta[1]
    if args.gammabar1 is not None or args.gammabar2 is not None:
        raise UsageError("stability-map takes --delta1/--delta2 (gammabar depends on e)")
    if args.dissipation == "none":
        d1 = d2 = 0.0
    spec = ResonanceSpec.parse(args.resonance)
    m = stability_map(params, spec, args.chi, (d1, d2), (args.a_min, args.a_max),
                      (args.e_min, args.e_max), (args.na, args.ne), args.equilibrium,
                      threads=max(1, args.threads), hold_gravity=args.hold_gravity)
    header = ["a", "e", "status", "max_real"] + [f"re{i}" for i in range(1, 5)] + \
        [f"im{i}" for i in range(1, 5)]
    rows = ([a, e, s, mr, *ev.real, *ev.imag] for a, e, s, mr, ev in m.records())
    man = _manifest(args, argv, params, resonance=str(spec), chi=args.chi, delta=[d1, d2],
                    equilibrium=args.equilibrium, hold_gravity=args.hold_gravity)
    return _csv(header, rows), man


def _cmd_equilibria(args, argv):
    params, delta = _params(args)
    diss = _dissipation(args, params, delta, "keplerian")
    spec = ResonanceSpec.parse(args.resonance)
    seeds = None
    if args.seeds:
        seeds = ((0.0, 0.0), (0.0, math.pi), (math.pi, 0.0), (math.pi, math.pi)) + \
            _parse_seeds(args.seeds, 2)
    res = find_equilibria(params, spec, args.chi, diss, seeds)
    if not res.found:
        raise NoEquilibriumError("no equilibrium: tidal torque exceeds the restoring torque")
    rows = []
    for eq in res.found:
        rep = linearize(params, spec, args.chi, diss, eq)
        rows.append([eq.phi1, eq.phi2, eq.residual, rep.max_real, *rep.eigenvalues.real,
                     *rep.eigenvalues.imag])
    header = ["phi1", "phi2", "residual", "max_real"] + [f"re{i}" for i in range(1, 5)] + \
        [f"im{i}" for i in range(1, 5)]
    text = _csv(header, rows)
    for seed in res.failed_seeds:
        sys.stderr.write(f"seed {seed} did not converge\n")
    man = _manifest(args, argv, params, resonance=str(spec), chi=args.chi,
                    dissipation=asdict(diss), failed_seeds=res.failed_seeds)
    return text, man


def _dump_potential():
    rows = ([t.block, str(t.num), str(t.den), str(t.pe), str(t.pd1), str(t.pd2), str(t.pq1),
             str(t.pq2), str(t.pm1), str(t.pm2), str(t.pa), str(t.kt), str(t.k1), str(t.k2)]
            for t in TERMS)
    return _csv(TERM_COLUMNS, rows)


def _cmd_coeffs(args, argv):
    if args.action == "dump-potential":
        return _dump_potential(), None
    params, delta = _params(args)
    spec = ResonanceSpec.parse(args.resonance)
    c = coefficients(params, spec)
    d1 = args.delta1 if args.delta1 is not None else delta[0]
    d2 = args.delta2 if args.delta2 is not None else delta[1]
    if args.gammabar1 is not None or args.gammabar2 is not None:
        diss = DissipationSpec.from_gammabar(params, args.gammabar1 or 0.0, args.gammabar2 or 0.0)
    else:
        diss = DissipationSpec.averaged(params, d1, d2)
    rows = [[k, v] for k, v in c.as_dict().items()]
    rows += [["gammabar1", diss.gammabar1], ["gammabar2", diss.gammabar2],
             ["mubar1", diss.mubar1], ["mubar2", diss.mubar2]]
    man = _manifest(args, argv, params, resonance=str(spec))
    return _csv(["name", "value"], rows), man


def _cmd_check(args, argv):
    params, _ = _params(args)
    cfg = _cfg(args)
    model = Model("full", params, args.chi)
    p1 = params.C1 if args.p1 is None else args.p1
    p2 = params.C2 if args.p2 is None else args.p2
    y0 = model.initial_state(args.theta1, p1, args.theta2, p2)
    t1 = _TWO_PI * args.tmax
    n = max(int(round(args.tmax)) * 4, 1)
    tr = propagate(model.rhs, y0, 0.0, t1, cfg, model.args, t_eval=np.linspace(0, t1, n + 1))
    H = hamiltonian_full(params, args.chi, tr.y)
    L = angular_momentum(tr.y)
    dH = float(np.max(np.abs(H - H[0])))
    dL = float(np.max(np.abs(L - L[0])))
    ok = dH <= args.tolerance and dL <= args.tolerance
    text = _csv(["quantity", "max_abs_change", "tolerance", "pass"],
                [["H", dH, args.tolerance, str(dH <= args.tolerance).lower()],
                 ["Pf", dL, args.tolerance, str(dL <= args.tolerance).lower()]])
    man = _manifest(args, argv, params, cfg, chi=args.chi, tmax_periods=args.tmax)
    if not ok:
        _emit(args, text, man)
        raise NumericalFailure(f"conservation check failed: max|dH| = {dH:.3e}, "
                               f"max|dPf| = {dL:.3e}")
    return text, man


_COMMANDS = {
    "integrate": _cmd_integrate,
    "poincare": _cmd_poincare,
    "stability-map": _cmd_stability_map,
    "equilibria": _cmd_equilibria,
    "coeffs": _cmd_coeffs,
    "check": _cmd_check,
    "dump-potential": lambda args, argv: (_dump_potential(), None),
}


def run(argv=None) -> int:
    """Parse ``argv``, run the subcommand, return the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    t0 = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        text, man = _COMMANDS[args.command](args, argv)
        if man is not None:
            man.wall_time = time.perf_counter() - t0
        if args.command == "poincare":
            sys.stdout.write(text)
        else:
            _emit(args, text, man)
        return 0
    except UnboundOrbitError as exc:
        sys.stderr.write(f"spinspin: numerical failure: {exc}\n")
        return 2
    except (UsageError, ParameterError, ValueError, FileNotFoundError) as exc:
        sys.stderr.write(f"spinspin: error: {exc}\n")
        return 1
    except (NumericalFailure, NoEquilibriumError, StepUnderflowError,
            ZeroDivisionError, ArithmeticError, RuntimeError) as exc:
        sys.stderr.write(f"spinspin: numerical failure: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())
