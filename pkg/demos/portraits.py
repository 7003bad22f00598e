"""Keplerian and full-problem sections side by side.

A handful of seeds near the synchronous state are followed for a few
hundred orbits twice: once with the orbit frozen on its ellipse
(stroboscopic section at t = 2 pi k) and once with orbit and spins coupled
(section at each pericenter passage). The libration centers of the two
portraits are compared and both portraits are written as CSV.

    python3 demos/portraits.py --sections 300 --outdir portraits
"""

import argparse
from pathlib import Path

from spinspin import patroclus_menoetius
from spinspin.poincare import (
    PortraitSpec, libration_center, section_full, section_keplerian, write_portrait,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--sections", type=int, default=300)
    ap.add_argument("--outdir", default="portraits")
    args = ap.parse_args()
    p = patroclus_menoetius()
    seeds = ((0.2, p.C1, 0.2, p.C2), (0.0, 1.05 * p.C1, 0.0, 1.05 * p.C2), (0.5, p.C1, 0.3, p.C2))

    kep = section_keplerian(p, 1, None, PortraitSpec(seeds, args.sections))
    full = section_full(p, 1, None, PortraitSpec(seeds, args.sections, "full"))

    print("angles are defined modulo pi, so centers near 0 and near pi coincide")
    print(f"{'seed':>4} {'body':>4} {'keplerian (theta, p)':>24} {'full (theta, p)':>24}")
    for i, (k, f) in enumerate(zip(kep, full)):
        for body in (1, 2):
            tk, pk = libration_center(k, body)
            tf, pf = libration_center(f, body)
            print(f"{i:4d} {body:4d} {tk:11.4f} {pk:11.4f}  {tf:11.4f} {pf:11.4f}")
        arr = f.as_array()
        print(f"          full problem: a in [{arr[:, 6].min():.4f}, {arr[:, 6].max():.4f}], "
              f"e in [{arr[:, 7].min():.4f}, {arr[:, 7].max():.4f}]")

    out = Path(args.outdir)
    write_portrait(kep, out / "keplerian", p, {"model": "keplerian"})
    write_portrait(full, out / "full", p, {"model": "full"})
    print(f"wrote {out}/keplerian and {out}/full")


if __name__ == "__main__":
    main()
