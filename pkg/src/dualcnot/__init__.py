"""Bidirectional non-local CNOT over one Bell pair, simulated exactly."""

from __future__ import annotations

from .closed_form import (
    MixtureMatrices,
    ClosedFormValue,
    PiPair,
    mixture_matrices,
    closed_form_infidelity,
    closed_form_output,
    pi_values,
    resolve_direction,
)
from .errors import (
    ConfigError,
    CPTPError,
    DomainError,
    LabelError,
    NotPSDError,
    NumericalValidityError,
    ShapeError,
    SizeError,
    UnitarityError,
    UnsupportedError,
)
from .linalg import eig_hermitian, kron, partial_trace, psd_sqrt
from .metrics import concurrence, fidelity, infidelity
from .noise import GadmParams, KrausChannel, evolved_bell, gadm_kraus, noisy_bell, verify_cptp
from .protocol import (
    Direction,
    ProtocolConfig,
    ProtocolResult,
    ProtocolTrace,
    ideal_target,
    run_protocol,
    run_reverse_convention_check,
)
from .states import QubitParams, Register, apply_channel, apply_gate, bell_phi_plus, gate, measure, prepare_qubit

__version__ = "0.1.0"

__all__ = [
    "MixtureMatrices",
    "ClosedFormValue",
    "ConfigError",
    "CPTPError",
    "Direction",
    "DomainError",
    "GadmParams",
    "KrausChannel",
    "LabelError",
    "NotPSDError",
    "NumericalValidityError",
    "PiPair",
    "ProtocolConfig",
    "ProtocolResult",
    "ProtocolTrace",
    "QubitParams",
    "Register",
    "ShapeError",
    "SizeError",
    "UnitarityError",
    "UnsupportedError",
    "mixture_matrices",
    "apply_channel",
    "apply_gate",
    "bell_phi_plus",
    "closed_form_infidelity",
    "closed_form_output",
    "concurrence",
    "eig_hermitian",
    "evolved_bell",
    "fidelity",
    "gadm_kraus",
    "gate",
    "ideal_target",
    "infidelity",
    "kron",
    "measure",
    "noisy_bell",
    "partial_trace",
    "pi_values",
    "prepare_qubit",
    "psd_sqrt",
    "resolve_direction",
    "run_protocol",
    "run_reverse_convention_check",
    "verify_cptp",
]
