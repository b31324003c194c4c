"""Simulation and verification of two-way and chain teleportation by crossed
space-time nonlocal measurements with Z4 pointer devices."""

__version__ = "0.1.0"

from .errors import ConfigError, NoPauliCorrection, SizeLimitError, ValidationFailure
from .hilbert import PureState, RegisterLayout, fidelity
from .protocol import (
    ProtocolSpec,
    build_schedule,
    cyclic_permutation_unitary,
    enumerate_protocol_branches,
    run_trial,
    target_state,
)
from .corrections import CorrectionTable, derive_table, validate_table

__all__ = [
    "ConfigError",
    "NoPauliCorrection",
    "SizeLimitError",
    "ValidationFailure",
    "PureState",
    "RegisterLayout",
    "fidelity",
    "ProtocolSpec",
    "build_schedule",
    "cyclic_permutation_unitary",
    "enumerate_protocol_branches",
    "run_trial",
    "target_state",
    "CorrectionTable",
    "derive_table",
    "validate_table",
]
