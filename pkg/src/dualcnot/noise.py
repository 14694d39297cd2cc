"""Generalized amplitude damping (GAD) noise on the shared Bell channel."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CPTPError, DomainError
from .linalg import as_matrix, dagger
from .states import Register, apply_channel, bell_phi_plus

BELL_LABELS = ("BellA", "BellB")
NOISE_TARGETS = ("bell_a", "bell_b", "both")


@dataclass(frozen=True)
class GadmParams:
    """Damping strength ``eta`` and thermal mixing ``p``, both in [0, 1].

    ``p = 1`` is plain amplitude damping (decay towards ``|0>``); ``p = 0`` pumps
    towards ``|1>``.
    """

    eta: float
    p: float

    def __post_init__(self):
        for name in ("eta", "p"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise DomainError(f"{name}={v} outside [0, 1]")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class KrausChannel:
    operators: tuple

    def __post_init__(self):
        ops = tuple(as_matrix(o, square=True) for o in self.operators)
        if not ops:
            raise CPTPError("a Kraus channel needs at least one operator")
        if len({o.shape for o in ops}) != 1:
            raise CPTPError("Kraus operators must share one dimension")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def __call__(self, rho) -> np.ndarray:
        rho = as_matrix(rho, square=True)
        return sum(k @ rho @ dagger(k) for k in self.operators)


def verify_cptp(ch: KrausChannel | Sequence) -> float:
    """Max-entry deviation of ``sum_i K_i^dagger K_i`` from the identity."""
    ops = getattr(ch, "operators", ch)
    ops = [as_matrix(o, square=True) for o in ops]
    if not ops:
        raise CPTPError("empty Kraus set")
    total = sum(dagger(o) @ o for o in ops)
    return float(np.max(np.abs(total - np.eye(ops[0].shape[0]))))


def gadm_kraus(params: GadmParams) -> KrausChannel:
    eta, p = params.eta, params.p
    sp, sq = math.sqrt(p), math.sqrt(1.0 - p)
    se, sd = math.sqrt(eta), math.sqrt(1.0 - eta)
    return KrausChannel(
        (
            sp * np.array([[1, 0], [0, sd]], dtype=np.complex128),
            sp * np.array([[0, se], [0, 0]], dtype=np.complex128),
            sq * np.array([[sd, 0], [0, 1]], dtype=np.complex128),
            sq * np.array([[0, 0], [se, 0]], dtype=np.complex128),
        )
    )


def amplitude_damping_kraus(eta: float) -> KrausChannel:
    """Zero-temperature amplitude damping with decay probability ``eta``."""
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"eta={eta} outside [0, 1]")
    return KrausChannel(
        (
            np.array([[1, 0], [0, math.sqrt(1 - eta)]], dtype=np.complex128),
            np.array([[0, math.sqrt(eta)], [0, 0]], dtype=np.complex128),
        )
    )


def noisy_bell(params: GadmParams) -> np.ndarray:
    """Closed-form density matrix of the Bell channel after GAD noise.

    Basis order ``|00>, |01>, |10>, |11>`` on (BellA, BellB).
    """
    eta, p = params.eta, params.p
    c = math.sqrt(1.0 - eta)
    return 0.5 * np.array(
        [
            [1 - eta * (1 - p), 0, 0, c],
            [0, eta * (1 - p), 0, 0],
            [0, 0, eta * p, 0],
            [c, 0, 0, 1 - eta * p],
        ],
        dtype=np.complex128,
    )


def evolved_bell(params: GadmParams, target: str = "bell_b") -> np.ndarray:
    """Bell pair density matrix after applying the GAD Kraus set to some of its qubits.

    ``target`` picks the damped qubit(s): ``"bell_a"``, ``"bell_b"`` or ``"both"``.
    Damping only ``"bell_b"`` reproduces :func:`noisy_bell` exactly.
    """
    if target not in NOISE_TARGETS:
        raise DomainError(f"noise target must be one of {NOISE_TARGETS}")
    reg = Register(BELL_LABELS, bell_phi_plus())
    ch = gadm_kraus(params)
    qubits = {"bell_a": ["BellA"], "bell_b": ["BellB"], "both": ["BellA", "BellB"]}[target]
    for q in qubits:
        reg = apply_channel(reg, ch, [q])
    return reg.state


def channel_provenance(grid: int = 21) -> dict:
    """Largest entrywise gap between :func:`noisy_bell` and each Kraus-evolved variant."""
    gaps = {t: 0.0 for t in NOISE_TARGETS}
    for eta in np.linspace(0.0, 1.0, grid):
        for p in np.linspace(0.0, 1.0, grid):
            params = GadmParams(eta, p)
            ref = noisy_bell(params)
            for t in NOISE_TARGETS:
                gaps[t] = max(gaps[t], float(np.max(np.abs(evolved_bell(params, t) - ref))))
    return {"max_abs_gap": gaps, "reproduces": [t for t, g in gaps.items() if g <= 1e-12]}
