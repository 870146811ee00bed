"""Reduced dynamics of two coupled qubits, each centrally coupled to its own spin bath.

The baths are treated as truncated Holstein-Primakoff bosons.  For each system
basis state and bath occupation pair the joint evolution closes on three
amplitudes, solved in closed form and averaged over a thermal bath ensemble to
give the two-qubit dynamical map.
"""

from .model import DomainError, InvariantViolation, ModelParams, Sector, sector_coefficients
from .dynmap import MapCoefficients, evolve, evolve_trajectory, map_coefficients
from .choikraus import apply_kraus, choi, kraus_from_choi
from .states import bell_state, basis_state, named_state

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "InvariantViolation",
    "ModelParams",
    "Sector",
    "sector_coefficients",
    "MapCoefficients",
    "evolve",
    "evolve_trajectory",
    "map_coefficients",
    "apply_kraus",
    "choi",
    "kraus_from_choi",
    "bell_state",
    "basis_state",
    "named_state",
]
