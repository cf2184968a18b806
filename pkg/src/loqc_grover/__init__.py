"""Exact simulation of polarization-encoded linear-optics gates and Grover search."""

from .circuit import Circuit, Detector, run_circuit
from .gates import (
    build_coincidence_cnot,
    build_coincidence_csign,
    build_scalable_cnot,
    build_scalable_csign,
    gate_action_matrix,
)
from .grover import GroverVariant, build_optical_grover, cross_check, run_grover
from .metrics import distribution_fidelity, oracle_distinguishability

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "Detector",
    "GroverVariant",
    "build_coincidence_cnot",
    "build_coincidence_csign",
    "build_optical_grover",
    "build_scalable_cnot",
    "build_scalable_csign",
    "cross_check",
    "distribution_fidelity",
    "gate_action_matrix",
    "oracle_distinguishability",
    "run_circuit",
    "run_grover",
]
