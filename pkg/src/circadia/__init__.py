"""Compile quantum circuits into gap-preserving adiabatic schedules and audit them."""

from .circuit import Circuit, Gate, apply_circuit, circuit_unitary, load_circuit, parse_circuit
from .direct_map import Schedule, assemble_schedule, gap_profile, locality_growth
from .evolution import adiabatic_error, evolve, propagate
from .operators import BranchAmbiguityError, ValidationError
from .pauli import PauliSum, pauli_decompose

__version__ = "0.1.0"

__all__ = [
    "BranchAmbiguityError", "Circuit", "Gate", "PauliSum", "Schedule", "ValidationError",
    "adiabatic_error", "apply_circuit", "assemble_schedule", "circuit_unitary", "evolve",
    "gap_profile", "load_circuit", "locality_growth", "parse_circuit", "pauli_decompose", "propagate",
]
