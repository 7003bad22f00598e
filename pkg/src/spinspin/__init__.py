"""Rotational dynamics of two gravitationally bound triaxial ellipsoids.

Spin-orbit and spin-spin coupling in planar motion: the mutual potential to
fourth order in the inverse separation, the full and Keplerian equations of
motion with optional tidal torques, averaged resonant models with their
linear stability, and surfaces of section.
"""

__version__ = "0.1.0"

from .bodies import BodyPairParams, ParameterError, derive, load_config, patroclus_menoetius
from .dynamics import DissipationSpec, Model, orbital_elements
from .integrate import IntegratorConfig, propagate, propagate_with_events
from .stability import ResonanceSpec, coefficients, equilibria, linearize, stability_map

__all__ = [
    "BodyPairParams",
    "ParameterError",
    "derive",
    "load_config",
    "patroclus_menoetius",
    "DissipationSpec",
    "Model",
    "orbital_elements",
    "IntegratorConfig",
    "propagate",
    "propagate_with_events",
    "ResonanceSpec",
    "coefficients",
    "equilibria",
    "linearize",
    "stability_map",
]
