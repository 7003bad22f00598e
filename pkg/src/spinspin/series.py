"""Trigonometric series of the quadrupole (V2) and coupling (V4) potentials.

Both series are truncated at second order in the eccentricity and written in
the mean anomaly ``t`` of the Keplerian orbit. Every term has the form::

    (num/den) * G * e**pe * d1**pd1 * d2**pd2 * q1**pq1 * q2**pq2
              * M1**pm1 * M2**pm2 / a**pa * cos(kt*t + k1*theta1 + k2*theta2)

The table is plain data so that resonant averaging, CSV export and the
expanded evaluator all read the same rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = ["Term", "TERMS", "terms", "term_array", "TERM_COLUMNS"]


@dataclass(frozen=True)
class Term:
    block: str
    num: int
    den: int
    pe: int
    pd1: int
    pd2: int
    pq1: int
    pq2: int
    pm1: int
    pm2: int
    pa: int
    kt: int
    k1: int
    k2: int

    @property
    def amplitude(self) -> Fraction:
        return Fraction(self.num, self.den)

    def coefficient(self, G, M1, M2, d1, d2, q1, q2, a, e):
        """Amplitude in front of the cosine (``e**0`` taken as 1 even at e=0)."""
        return (
            self.num / self.den * G
            * e**self.pe * d1**self.pd1 * d2**self.pd2
            * q1**self.pq1 * q2**self.pq2
            * M1**self.pm1 * M2**self.pm2 / a**self.pa
        )


# block, num, den, e, d1, d2, q1, q2, M1, M2, a, kt, k1, k2
_ROWS = [
    # ---- V2 -------------------------------------------------------------
    ("V2", -1, 4, 0, 0, 0, 1, 0, 0, 1, 3, 0, 0, 0),
    ("V2", -3, 8, 2, 0, 0, 1, 0, 0, 1, 3, 0, 0, 0),
    ("V2", -1, 4, 0, 0, 0, 0, 1, 1, 0, 3, 0, 0, 0),
    ("V2", -3, 8, 2, 0, 0, 0, 1, 1, 0, 3, 0, 0, 0),
    ("V2", -3, 4, 1, 0, 0, 1, 0, 0, 1, 3, 1, 0, 0),
    ("V2", -3, 4, 1, 0, 0, 0, 1, 1, 0, 3, 1, 0, 0),
    ("V2", -9, 8, 2, 0, 0, 1, 0, 0, 1, 3, 2, 0, 0),
    ("V2", -9, 8, 2, 0, 0, 0, 1, 1, 0, 3, 2, 0, 0),
    ("V2", 3, 8, 1, 1, 0, 0, 0, 0, 1, 3, 1, -2, 0),
    ("V2", -3, 4, 0, 1, 0, 0, 0, 0, 1, 3, 2, -2, 0),
    ("V2", 15, 8, 2, 1, 0, 0, 0, 0, 1, 3, 2, -2, 0),
    ("V2", -21, 8, 1, 1, 0, 0, 0, 0, 1, 3, 3, -2, 0),
    ("V2", -51, 8, 2, 1, 0, 0, 0, 0, 1, 3, 4, -2, 0),
    ("V2", 3, 8, 1, 0, 1, 0, 0, 1, 0, 3, 1, 0, -2),
    ("V2", -3, 4, 0, 0, 1, 0, 0, 1, 0, 3, 2, 0, -2),
    ("V2", 15, 8, 2, 0, 1, 0, 0, 1, 0, 3, 2, 0, -2),
    ("V2", -21, 8, 1, 0, 1, 0, 0, 1, 0, 3, 3, 0, -2),
    ("V2", -51, 8, 2, 0, 1, 0, 0, 1, 0, 3, 4, 0, -2),
    # ---- V4: secular part -------------------------------------------------
    ("V4", -45, 448, 0, 0, 2, 0, 0, 1, -1, 5, 0, 0, 0),
    ("V4", -225, 448, 2, 0, 2, 0, 0, 1, -1, 5, 0, 0, 0),
    ("V4", -45, 448, 0, 2, 0, 0, 0, -1, 1, 5, 0, 0, 0),
    ("V4", -225, 448, 2, 2, 0, 0, 0, -1, 1, 5, 0, 0, 0),
    ("V4", -45, 224, 0, 0, 0, 2, 0, -1, 1, 5, 0, 0, 0),
    ("V4", -225, 224, 2, 0, 0, 2, 0, -1, 1, 5, 0, 0, 0),
    ("V4", -9, 16, 0, 0, 0, 1, 1, 0, 0, 5, 0, 0, 0),
    ("V4", -45, 16, 2, 0, 0, 1, 1, 0, 0, 5, 0, 0, 0),
    ("V4", -45, 224, 0, 0, 0, 0, 2, 1, -1, 5, 0, 0, 0),
    ("V4", -225, 224, 2, 0, 0, 0, 2, 1, -1, 5, 0, 0, 0),
    # ---- V4: purely orbital harmonics --------------------------------------
    ("V4", -225, 448, 1, 0, 2, 0, 0, 1, -1, 5, 1, 0, 0),
    ("V4", -225, 448, 1, 2, 0, 0, 0, -1, 1, 5, 1, 0, 0),
    ("V4", -225, 224, 1, 0, 0, 2, 0, -1, 1, 5, 1, 0, 0),
    ("V4", -45, 16, 1, 0, 0, 1, 1, 0, 0, 5, 1, 0, 0),
    ("V4", -225, 224, 1, 0, 0, 0, 2, 1, -1, 5, 1, 0, 0),
    ("V4", -225, 224, 2, 0, 2, 0, 0, 1, -1, 5, 2, 0, 0),
    ("V4", -225, 224, 2, 2, 0, 0, 0, -1, 1, 5, 2, 0, 0),
    ("V4", -225, 112, 2, 0, 0, 2, 0, -1, 1, 5, 2, 0, 0),
    ("V4", -45, 8, 2, 0, 0, 1, 1, 0, 0, 5, 2, 0, 0),
    ("V4", -225, 112, 2, 0, 0, 0, 2, 1, -1, 5, 2, 0, 0),
    # ---- V4: body 1, 4*theta1 ---------------------------------------------
    ("V4", -75, 128, 2, 2, 0, 0, 0, -1, 1, 5, 2, -4, 0),
    ("V4", 225, 128, 1, 2, 0, 0, 0, -1, 1, 5, 3, -4, 0),
    ("V4", -75, 64, 0, 2, 0, 0, 0, -1, 1, 5, 4, -4, 0),
    ("V4", 825, 64, 2, 2, 0, 0, 0, -1, 1, 5, 4, -4, 0),
    ("V4", -975, 128, 1, 2, 0, 0, 0, -1, 1, 5, 5, -4, 0),
    ("V4", -3825, 128, 2, 2, 0, 0, 0, -1, 1, 5, 6, -4, 0),
    # ---- V4: body 1, 2*theta1 ---------------------------------------------
    ("V4", -75, 224, 1, 1, 0, 1, 0, -1, 1, 5, 1, -2, 0),
    ("V4", -15, 32, 1, 1, 0, 0, 1, 0, 0, 5, 1, -2, 0),
    ("V4", -75, 112, 0, 1, 0, 1, 0, -1, 1, 5, 2, -2, 0),
    ("V4", -75, 112, 2, 1, 0, 1, 0, -1, 1, 5, 2, -2, 0),
    ("V4", -15, 16, 0, 1, 0, 0, 1, 0, 0, 5, 2, -2, 0),
    ("V4", -15, 16, 2, 1, 0, 0, 1, 0, 0, 5, 2, -2, 0),
    ("V4", -675, 224, 1, 1, 0, 1, 0, -1, 1, 5, 3, -2, 0),
    ("V4", -135, 32, 1, 1, 0, 0, 1, 0, 0, 5, 3, -2, 0),
    ("V4", -3975, 448, 2, 1, 0, 1, 0, -1, 1, 5, 4, -2, 0),
    ("V4", -795, 64, 2, 1, 0, 0, 1, 0, 0, 5, 4, -2, 0),
    ("V4", -225, 448, 2, 1, 0, 1, 0, -1, 1, 5, 0, 2, 0),
    ("V4", -45, 64, 2, 1, 0, 0, 1, 0, 0, 5, 0, 2, 0),
    # ---- V4: body 2, 4*theta2 ---------------------------------------------
    ("V4", -75, 128, 2, 0, 2, 0, 0, 1, -1, 5, 2, 0, -4),
    ("V4", 225, 128, 1, 0, 2, 0, 0, 1, -1, 5, 3, 0, -4),
    ("V4", -75, 64, 0, 0, 2, 0, 0, 1, -1, 5, 4, 0, -4),
    ("V4", 825, 64, 2, 0, 2, 0, 0, 1, -1, 5, 4, 0, -4),
    ("V4", -975, 128, 1, 0, 2, 0, 0, 1, -1, 5, 5, 0, -4),
    ("V4", -3825, 128, 2, 0, 2, 0, 0, 1, -1, 5, 6, 0, -4),
    # ---- V4: body 2, 2*theta2 ---------------------------------------------
    ("V4", -15, 32, 1, 0, 1, 1, 0, 0, 0, 5, 1, 0, -2),
    ("V4", -75, 224, 1, 0, 1, 0, 1, 1, -1, 5, 1, 0, -2),
    ("V4", -15, 16, 0, 0, 1, 1, 0, 0, 0, 5, 2, 0, -2),
    ("V4", -15, 16, 2, 0, 1, 1, 0, 0, 0, 5, 2, 0, -2),
    ("V4", -75, 112, 0, 0, 1, 0, 1, 1, -1, 5, 2, 0, -2),
    ("V4", -75, 112, 2, 0, 1, 0, 1, 1, -1, 5, 2, 0, -2),
    ("V4", -135, 32, 1, 0, 1, 1, 0, 0, 0, 5, 3, 0, -2),
    ("V4", -675, 224, 1, 0, 1, 0, 1, 1, -1, 5, 3, 0, -2),
    ("V4", -795, 64, 2, 0, 1, 1, 0, 0, 0, 5, 4, 0, -2),
    ("V4", -3975, 448, 2, 0, 1, 0, 1, 1, -1, 5, 4, 0, -2),
    ("V4", -45, 64, 2, 0, 1, 1, 0, 0, 0, 5, 0, 0, 2),
    ("V4", -225, 448, 2, 0, 1, 0, 1, 1, -1, 5, 0, 0, 2),
    # ---- V4: mutual terms -------------------------------------------------
    ("V4", -105, 64, 2, 1, 1, 0, 0, 0, 0, 5, 2, -2, -2),
    ("V4", 315, 64, 1, 1, 1, 0, 0, 0, 0, 5, 3, -2, -2),
    ("V4", -105, 32, 0, 1, 1, 0, 0, 0, 0, 5, 4, -2, -2),
    ("V4", 1155, 32, 2, 1, 1, 0, 0, 0, 0, 5, 4, -2, -2),
    ("V4", -1365, 64, 1, 1, 1, 0, 0, 0, 0, 5, 5, -2, -2),
    ("V4", -5355, 64, 2, 1, 1, 0, 0, 0, 0, 5, 6, -2, -2),
    ("V4", -9, 32, 0, 1, 1, 0, 0, 0, 0, 5, 0, 2, -2),
    ("V4", -45, 32, 2, 1, 1, 0, 0, 0, 0, 5, 0, 2, -2),
    ("V4", -45, 64, 1, 1, 1, 0, 0, 0, 0, 5, 1, 2, -2),
    ("V4", -45, 32, 2, 1, 1, 0, 0, 0, 0, 5, 2, 2, -2),
    ("V4", -45, 64, 1, 1, 1, 0, 0, 0, 0, 5, 1, -2, 2),
    ("V4", -45, 32, 2, 1, 1, 0, 0, 0, 0, 5, 2, -2, 2),
]

TERMS: tuple[Term, ...] = tuple(Term(*row) for row in _ROWS)

TERM_COLUMNS = (
    "block", "amplitude_num", "amplitude_den",
    "pow_e", "pow_d1", "pow_d2", "pow_q1", "pow_q2", "pow_M1", "pow_M2", "pow_inv_a",
    "mult_t", "mult_theta1", "mult_theta2",
)


def terms(block: str | None = None) -> tuple[Term, ...]:
    """Rows of the table, optionally restricted to ``"V2"`` or ``"V4"``."""
    if block is None:
        return TERMS
    if block not in ("V2", "V4"):
        raise ValueError(f"unknown block {block!r}")
    return tuple(tm for tm in TERMS if tm.block == block)


def term_array(block, G, M1, M2, d1, d2, q1, q2, a, e):
    """Numeric amplitudes and integer multipliers for one block.

    Returns ``(amp, kt, k1, k2)`` as numpy arrays, ready for vectorised
    evaluation of ``sum(amp * cos(kt*t + k1*theta1 + k2*theta2))``.
    """
    rows = terms(block)
    amp = np.array([tm.coefficient(G, M1, M2, d1, d2, q1, q2, a, e) for tm in rows])
    kt = np.array([tm.kt for tm in rows], dtype=np.int64)
    k1 = np.array([tm.k1 for tm in rows], dtype=np.int64)
    k2 = np.array([tm.k2 for tm in rows], dtype=np.int64)
    return amp, kt, k1, k2


def _check_table() -> None:
    # every term of V2/V4 is even in the rotation angles
    for tm in TERMS:
        assert tm.k1 % 2 == 0 and tm.k2 % 2 == 0, tm
        assert tm.pa == (3 if tm.block == "V2" else 5), tm
        assert math.gcd(tm.num, tm.den) == 1, tm


_check_table()
