"""Dual non-local CNOT over one shared Bell pair.

Register layout (most significant first)::

    Qaux, RA, Psi_A, BellA | BellB, Psi_B, RB
    '---- Alice's lab ----'  '--- Bob's lab ---'

``Qaux`` selects the direction: ``|1>`` makes Alice's qubit the control
(A->B), ``|0>`` makes Bob's the control (B->A).  Both directions are laid out
step by step in one schedule; every gate of the B->A half fires on
``Qaux = |0>`` instead of ``|1>``.  Measurement outcomes travel as classical
bits and trigger Pauli corrections on the other side.

Two interchangeable engines execute the schedule:

``"branches"``
    state-vector evolution that forks at every measurement and mixes the
    branches with their Born weights.  A mixed Bell channel is first split
    into its spectral ensemble.
``"channel"``
    density-matrix evolution in which each measurement plus its conditional
    correction is one Kraus map ``rho -> sum_k C_k P_k rho P_k C_k^+``.

They share only the gate list, which is what makes them useful as a check
on each other.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import ConfigError, NumericalValidityError, UnitarityError
from .linalg import as_matrix, is_unitary, kron, psd_factor
from .metrics import check_density, infidelity, pure_infidelity
from .noise import NOISE_TARGETS, GadmParams, evolved_bell
from .states import (
    QubitParams,
    Register,
    apply_channel,
    apply_gate,
    bell_phi_plus,
    controlled,
    gate,
    prepare_qubit,
    project,
    projector,
)

REGISTER_ORDER = ("Qaux", "RA", "Psi_A", "BellA", "BellB", "Psi_B", "RB")
OUTPUT_QUBITS = ("Psi_A", "Psi_B")
PARTY = {
    "Qaux": "selector",
    "RA": "alice",
    "Psi_A": "alice",
    "BellA": "alice",
    "BellB": "bob",
    "Psi_B": "bob",
    "RB": "bob",
}
BRANCH_CUTOFF = 1e-14
TRACE_TOL = 1e-10


class Direction(str, Enum):
    A_TO_B = "a2b"
    B_TO_A = "b2a"
    AUTO = "auto"


@dataclass(frozen=True, eq=False)
class ProtocolConfig:
    alice: QubitParams = field(default_factory=QubitParams)
    bob: QubitParams = field(default_factory=QubitParams)
    aux: QubitParams = field(default_factory=QubitParams)
    noise: Optional[GadmParams] = None
    noise_target: str = "bell_b"
    channel_override: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("alice", "bob", "aux"):
            if not isinstance(getattr(self, name), QubitParams):
                raise ConfigError(f"{name} must be QubitParams")
        if self.noise is not None and self.channel_override is not None:
            raise ConfigError("set at most one of noise / channel_override")
        if self.noise is not None and not isinstance(self.noise, GadmParams):
            raise ConfigError("noise must be GadmParams")
        if self.noise_target not in NOISE_TARGETS:
            raise ConfigError(f"noise_target must be one of {NOISE_TARGETS}")
        if self.channel_override is not None:
            rho = as_matrix(self.channel_override, square=True)
            if rho.shape != (4, 4):
                raise ConfigError("channel_override must be a 4x4 density matrix")
            try:
                rho = check_density(rho, name="channel_override")
                psd_factor(rho)
            except NumericalValidityError as exc:
                raise ConfigError(str(exc)) from exc
            object.__setattr__(self, "channel_override", rho)

    @property
    def is_noiseless(self) -> bool:
        return self.noise is None and self.channel_override is None

    def channel_state(self) -> np.ndarray:
        """Initial (BellA, BellB) state: a ket when noiseless, else a density matrix."""
        if self.channel_override is not None:
            return self.channel_override
        if self.noise is not None:
            return evolved_bell(self.noise, self.noise_target)
        return bell_phi_plus()


@dataclass(frozen=True)
class GateApplied:
    step: int
    gate: str
    qubits: tuple
    party: str
    kind: str = "gate-applied"


@dataclass(frozen=True)
class Measured:
    step: int
    qubit: str
    party: str
    probabilities: tuple
    outcome: Optional[int] = None
    kind: str = "measurement"


@dataclass(frozen=True)
class ClassicalBitSent:
    step: int
    sender: str
    receiver: str
    carries: str
    value: Optional[int] = None
    kind: str = "classical-bit-sent"


@dataclass(frozen=True)
class CorrectionApplied:
    step: int
    pauli: str
    qubit: str
    weight: float
    kind: str = "correction-applied"


@dataclass
class ProtocolTrace:
    events: list = field(default_factory=list)
    cbits_sent: int = 0
    ebits_consumed: int = 0

    def add(self, event) -> None:
        self.events.append(event)
        if isinstance(event, ClassicalBitSent):
            self.cbits_sent += 1

    def to_dict(self) -> dict:
        return {
            "cbits_sent": self.cbits_sent,
            "ebits_consumed": self.ebits_consumed,
            "events": [asdict(e) for e in self.events],
        }


@dataclass(frozen=True, eq=False)
class ProtocolResult:
    final_ab: np.ndarray
    infidelity_vs_ideal: float
    trace: ProtocolTrace


# -- circuit schedule ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _Gate:
    step: int
    name: str
    matrix: np.ndarray
    qubits: tuple


@dataclass(frozen=True, eq=False)
class _Measure:
    step: int
    qubit: str
    receiver: str
    correction: str
    # applied to ``qubits`` when the outcome is 1
    matrix: np.ndarray
    qubits: tuple


def _schedule() -> tuple:
    x, z, h = gate("X"), gate("Z"), gate("H")
    ccx = controlled(x, (1, 1))
    # B->A half: same gates, triggered by Qaux = |0>
    ccx_aux0_first = controlled(x, (0, 1))
    ccx_aux0_second = controlled(x, (1, 0))
    cz_aux1 = controlled(z, (1,))
    cz_aux0 = controlled(z, (0,))
    return (
        # step 1: copy the control onto the local Bell half
        _Gate(1, "TOFFOLI", ccx, ("Qaux", "Psi_A", "BellA")),
        _Gate(1, "TOFFOLI[aux=0]", ccx_aux0_first, ("Qaux", "Psi_B", "BellB")),
        # step 2: store the Bell half's parity in the storage qubit
        _Gate(2, "TOFFOLI", ccx, ("BellA", "Qaux", "RA")),
        _Gate(2, "TOFFOLI[aux=0]", ccx_aux0_second, ("BellB", "Qaux", "RB")),
        # step 3: measure storage, flip the remote Bell half on outcome 1
        _Measure(3, "RA", "bob", "X", x, ("BellB",)),
        _Measure(3, "RB", "alice", "X", x, ("BellA",)),
        # step 4: remote Bell half now carries the control; use it on the target
        _Gate(4, "TOFFOLI", ccx, ("Qaux", "BellB", "Psi_B")),
        _Gate(4, "TOFFOLI[aux=0]", ccx_aux0_first, ("Qaux", "BellA", "Psi_A")),
        # step 5: erase the remote Bell half in the X basis, fix the phase at home
        _Gate(5, "H", h, ("BellB",)),
        _Measure(5, "BellB", "alice", "Z[aux=1]", cz_aux1, ("Qaux", "Psi_A")),
        _Gate(5, "H", h, ("BellA",)),
        _Measure(5, "BellA", "bob", "Z[aux=0]", cz_aux0, ("Qaux", "Psi_B")),
    )


SCHEDULE = _schedule()
for _op in SCHEDULE:
    if not is_unitary(_op.matrix, 1e-12):  # pragma: no cover
        raise UnitarityError(f"schedule gate {_op} is not unitary")


def initial_register(cfg: ProtocolConfig, channel=None) -> Register:
    channel = cfg.channel_state() if channel is None else channel
    zero = prepare_qubit(QubitParams.zero())
    return Register.product(
        [
            ("Qaux", prepare_qubit(cfg.aux)),
            ("RA", zero),
            ("Psi_A", prepare_qubit(cfg.alice)),
            (("BellA", "BellB"), channel),
            ("Psi_B", prepare_qubit(cfg.bob)),
            ("RB", zero),
        ]
    )


def _channel_ensemble(channel: np.ndarray) -> list[tuple[float, np.ndarray]]:
    if channel.ndim == 1:
        return [(1.0, channel)]
    f = psd_factor(channel)
    out = []
    for col in f.T:
        w = float(np.vdot(col, col).real)
        if w > BRANCH_CUTOFF:
            out.append((w, col / math.sqrt(w)))
    return out


def _run_branches(cfg: ProtocolConfig, trace: ProtocolTrace) -> np.ndarray:
    branches = initial_ensemble(cfg)
    for op in SCHEDULE:
        if isinstance(op, _Gate):
            branches = [(w, apply_gate(r, op.matrix, op.qubits, check=False)) for w, r in branches]
            trace.add(GateApplied(op.step, op.name, op.qubits, PARTY[op.qubits[-1]]))
            continue
        forked = []
        p = [0.0, 0.0]
        for w, r in branches:
            for result in (0, 1):
                prob, post = project(r, op.qubit, result)
                p[result] += w * prob
                if post is None or w * prob < BRANCH_CUTOFF:
                    continue
                if result == 1:
                    post = apply_gate(post, op.matrix, op.qubits, check=False)
                forked.append((w * prob, post))
        branches = forked
        _record_measurement(trace, op, tuple(p))
    total = sum(w for w, _ in branches)
    return sum(w * r.reduced(OUTPUT_QUBITS) for w, r in branches) / total


def _measurement_kraus(op: _Measure) -> tuple[list[np.ndarray], list[str]]:
    qubits = [op.qubit, *op.qubits]
    p0 = projector([1, 0])
    p1 = projector([0, 1])
    k0 = kron(p0, np.eye(op.matrix.shape[0]))
    k1 = kron(p1, op.matrix)
    return [k0, k1], qubits


def _run_channel(cfg: ProtocolConfig, trace: ProtocolTrace) -> np.ndarray:
    reg = initial_register(cfg).as_mixed()
    for op in SCHEDULE:
        if isinstance(op, _Gate):
            reg = apply_gate(reg, op.matrix, op.qubits, check=False)
            trace.add(GateApplied(op.step, op.name, op.qubits, PARTY[op.qubits[-1]]))
            continue
        p1, _ = project(reg, op.qubit, 1)
        ops, qubits = _measurement_kraus(op)
        reg = apply_channel(reg, ops, qubits)
        _record_measurement(trace, op, (1.0 - p1, p1))
    return reg.reduced(OUTPUT_QUBITS)


def _record_measurement(trace: ProtocolTrace, op: _Measure, probs: tuple, outcome=None) -> None:
    sender = PARTY[op.qubit]
    trace.add(Measured(op.step, op.qubit, sender, tuple(float(x) for x in probs), outcome))
    trace.add(ClassicalBitSent(op.step, sender, op.receiver, op.qubit, outcome))
    fired = probs[1] if outcome is None else float(outcome)
    if fired > 0:
        trace.add(CorrectionApplied(op.step, op.correction, op.qubits[-1], float(fired)))


def _check_output(rho: np.ndarray) -> np.ndarray:
    rho = 0.5 * (rho + rho.conj().T)
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > TRACE_TOL:
        raise NumericalValidityError(f"protocol output has trace {tr:.12g}")
    return rho


def run_protocol(cfg: ProtocolConfig, *, method: str = "branches") -> ProtocolResult:
    """Run the full two-way schedule and return the reduced state of (Psi_A, Psi_B)."""
    if not isinstance(cfg, ProtocolConfig):
        raise ConfigError("run_protocol expects a ProtocolConfig")
    trace = ProtocolTrace(ebits_consumed=1)
    if method == "branches":
        rho = _run_branches(cfg, trace)
    elif method == "channel":
        rho = _run_channel(cfg, trace)
    else:
        raise ConfigError(f"unknown method {method!r}")
    rho = _check_output(rho)
    return ProtocolResult(rho, infidelity(ideal_target(cfg), rho), trace)


def initial_ensemble(cfg: ProtocolConfig) -> list[tuple[float, Register]]:
    """Pure initial registers with weights, one per spectral member of the Bell channel."""
    return [(w, initial_register(cfg, ket)) for w, ket in _channel_ensemble(np.asarray(cfg.channel_state()))]


def run_sampled(
    cfg: ProtocolConfig, rng: np.random.Generator, ensemble: Optional[list] = None
) -> tuple[np.ndarray, dict, ProtocolTrace]:
    """One shot with measurement outcomes drawn from ``rng``.

    A mixed Bell channel is unravelled by drawing one member of its spectral
    ensemble first.  Pass ``ensemble`` from :func:`initial_ensemble` to reuse
    it across shots.  Returns the reduced output state, the outcome bits keyed
    by measured qubit, and the shot's trace.
    """
    ensemble = initial_ensemble(cfg) if ensemble is None else ensemble
    if len(ensemble) == 1:
        reg = ensemble[0][1]
    else:
        weights = np.array([w for w, _ in ensemble])
        reg = ensemble[int(rng.choice(len(ensemble), p=weights / weights.sum()))][1]
    trace = ProtocolTrace(ebits_consumed=1)
    outcomes = {}
    for op in SCHEDULE:
        if isinstance(op, _Gate):
            reg = apply_gate(reg, op.matrix, op.qubits, check=False)
            trace.add(GateApplied(op.step, op.name, op.qubits, PARTY[op.qubits[-1]]))
            continue
        p1, post1 = project(reg, op.qubit, 1)
        if post1 is not None and rng.random() < p1:
            result, reg = 1, apply_gate(post1, op.matrix, op.qubits, check=False)
        else:
            _, post0 = project(reg, op.qubit, 0)
            result, reg = 0, post0
        outcomes[op.qubit] = result
        _record_measurement(trace, op, (1.0 - p1, p1), result)
    return _check_output(reg.reduced(OUTPUT_QUBITS)), outcomes, trace


# -- targets ------------------------------------------------------------------


def ideal_ket(direction: Direction | str, alice: QubitParams, bob: QubitParams) -> np.ndarray:
    """``CNOT |Psi_A Psi_B>`` with the control on Alice's (a2b) or Bob's (b2a) qubit."""
    direction = Direction(direction)
    ket = kron(prepare_qubit(alice), prepare_qubit(bob))
    cnot = gate("CNOT")
    if direction is Direction.A_TO_B:
        return cnot @ ket
    if direction is Direction.B_TO_A:
        reg = apply_gate(Register(OUTPUT_QUBITS, ket), cnot, ("Psi_B", "Psi_A"))
        return reg.state
    raise ValueError("ideal_ket needs an explicit direction")


def direction_weights(aux: QubitParams) -> tuple[float, float]:
    """Weights ``(w_a2b, w_b2a) = (sin^2, cos^2)`` of the aux half-angle."""
    return math.sin(aux.theta / 2) ** 2, math.cos(aux.theta / 2) ** 2


def ideal_target(cfg: ProtocolConfig) -> np.ndarray:
    """Reference output: the CNOT picked by the aux qubit.

    A superposed aux gives the convex mixture of both directional targets,
    weighted by the aux populations.
    """
    w_ab, w_ba = direction_weights(cfg.aux)
    if cfg.aux.theta == math.pi or w_ba == 0.0:
        return projector(ideal_ket(Direction.A_TO_B, cfg.alice, cfg.bob))
    if cfg.aux.theta == 0.0 or w_ab == 0.0:
        return projector(ideal_ket(Direction.B_TO_A, cfg.alice, cfg.bob))
    return w_ab * projector(ideal_ket(Direction.A_TO_B, cfg.alice, cfg.bob)) + w_ba * projector(
        ideal_ket(Direction.B_TO_A, cfg.alice, cfg.bob)
    )


def target_for(cfg: ProtocolConfig, direction: Direction | str = Direction.AUTO) -> np.ndarray:
    direction = Direction(direction)
    if direction is Direction.AUTO:
        return ideal_target(cfg)
    return projector(ideal_ket(direction, cfg.alice, cfg.bob))


def target_ket(cfg: ProtocolConfig, direction: Direction | str = Direction.AUTO) -> Optional[np.ndarray]:
    """Pure target ket, or ``None`` when the target for ``direction`` is mixed."""
    direction = Direction(direction)
    if direction is Direction.AUTO:
        if cfg.aux.theta == math.pi:
            direction = Direction.A_TO_B
        elif cfg.aux.theta == 0.0:
            direction = Direction.B_TO_A
        else:
            return None
    return ideal_ket(direction, cfg.alice, cfg.bob)


def infidelity_for(cfg: ProtocolConfig, rho: np.ndarray, direction: Direction | str = Direction.AUTO) -> float:
    ket = target_ket(cfg, direction)
    if ket is not None:
        return pure_infidelity(ket, rho)
    return infidelity(target_for(cfg, direction), rho)


def run_reverse_convention_check(grid: int = 5) -> dict:
    """Max infidelity over a (Theta_A, Theta_B) grid for each classical aux value."""
    thetas = np.linspace(0.0, math.pi, grid)
    report = {}
    for label, aux, direction in (
        ("aux=1 vs a2b", QubitParams.one(), Direction.A_TO_B),
        ("aux=0 vs b2a", QubitParams.zero(), Direction.B_TO_A),
    ):
        worst = 0.0
        for ta in thetas:
            for tb in thetas:
                cfg = ProtocolConfig(QubitParams(ta), QubitParams(tb), aux)
                res = run_protocol(cfg)
                worst = max(worst, infidelity(target_for(cfg, direction), res.final_ab))
        report[label] = worst
    report["max_infidelity"] = max(report.values())
    return report
