"""Qubit preparation, named gates, registers, measurement and channels."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import CPTPError, DomainError, LabelError, ShapeError, UnitarityError
from .linalg import HERMITIAN_TOL, as_matrix, dagger, is_unitary, kron, num_qubits_of, partial_trace

ANGLE_SLACK = 1e-12
IMPOSSIBLE_PROB = 1e-14


@dataclass(frozen=True)
class QubitParams:
    """Bloch-sphere angles of a pure qubit: polar ``theta`` and azimuth ``phi``."""

    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        theta, phi = float(self.theta), float(self.phi)
        if not (math.isfinite(theta) and math.isfinite(phi)):
            raise DomainError("qubit angles must be finite")
        if not -ANGLE_SLACK <= theta <= math.pi + ANGLE_SLACK:
            raise DomainError(f"theta={theta} outside [0, pi]")
        if not -ANGLE_SLACK <= phi <= 2 * math.pi + ANGLE_SLACK:
            raise DomainError(f"phi={phi} outside [0, 2pi]")
        object.__setattr__(self, "theta", min(max(theta, 0.0), math.pi))
        object.__setattr__(self, "phi", min(max(phi, 0.0), 2 * math.pi))

    @classmethod
    def zero(cls) -> "QubitParams":
        return cls(0.0, 0.0)

    @classmethod
    def one(cls) -> "QubitParams":
        return cls(math.pi, 0.0)

    @property
    def is_classical(self) -> bool:
        return self.theta in (0.0, math.pi)


def prepare_qubit(p: QubitParams) -> np.ndarray:
    """``cos(theta/2)|0> + exp(i phi) sin(theta/2)|1>``; no global phase is removed."""
    return np.array(
        [math.cos(p.theta / 2), np.exp(1j * p.phi) * math.sin(p.theta / 2)],
        dtype=np.complex128,
    )


def basis_ket(bits: str) -> np.ndarray:
    """Computational basis ket from a bit string, e.g. ``basis_ket("10")``."""
    v = np.zeros(2 ** len(bits), dtype=np.complex128)
    v[int(bits, 2)] = 1.0
    return v


def bell_phi_plus() -> np.ndarray:
    return np.array([1, 0, 0, 1], dtype=np.complex128) / math.sqrt(2)


def projector(ket) -> np.ndarray:
    ket = np.asarray(ket, dtype=np.complex128)
    return np.outer(ket, ket.conj())


def controlled(u, control_values: Sequence[int]) -> np.ndarray:
    """Multi-controlled ``u``; controls lead, and fire on the given bit values."""
    u = as_matrix(u, square=True)
    k = len(control_values)
    d = u.shape[0]
    out = np.eye(d * 2**k, dtype=np.complex128)
    trigger = int("".join(str(int(b)) for b in control_values), 2) if k else 0
    sl = slice(trigger * d, (trigger + 1) * d)
    out[sl, sl] = u
    return out


_SQRT1_2 = 1 / math.sqrt(2)
_GATES = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    "H": np.array([[1, 1], [1, -1]], dtype=np.complex128) * _SQRT1_2,
}
_GATES["CNOT"] = controlled(_GATES["X"], (1,))
_GATES["CZ"] = controlled(_GATES["Z"], (1,))
_GATES["TOFFOLI"] = controlled(_GATES["X"], (1, 1))


def gate(name: str) -> np.ndarray:
    """Matrix of a named gate (``I, X, Y, Z, H, CNOT, CZ, TOFFOLI``).

    Control qubits of ``CNOT``/``CZ``/``TOFFOLI`` are the leading inputs.
    Returns a fresh copy.
    """
    try:
        return _GATES[name.upper()].copy()
    except KeyError:
        raise LabelError(f"unknown gate {name!r}") from None


@dataclass(frozen=True)
class Register:
    """Named qubits plus their joint state.

    ``state`` is a ket (1-D) for pure registers or a density matrix (2-D).
    Label order fixes the tensor order: ``labels[0]`` is the most significant
    qubit.
    """

    labels: tuple
    state: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(set(labels)) != len(labels):
            raise LabelError(f"duplicate labels in {labels}")
        state = np.asarray(self.state, dtype=np.complex128)
        d = 2 ** len(labels)
        if state.ndim == 1:
            if state.shape != (d,):
                raise ShapeError(f"ket of length {state.shape[0]} for {len(labels)} qubits")
        elif state.ndim == 2:
            if state.shape != (d, d):
                raise ShapeError(f"density matrix of shape {state.shape} for {len(labels)} qubits")
        else:
            raise ShapeError("state must be a ket or a density matrix")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "state", state)

    @classmethod
    def product(cls, parts: Iterable[tuple]) -> "Register":
        """Build a register from ``(label, ket_or_density)`` pieces, in order.

        A piece may span several qubits (e.g. a Bell pair) when its label is a
        tuple of names.  The result is pure iff every piece is a ket.
        """
        labels: list = []
        pieces = []
        for label, st in parts:
            names = (label,) if isinstance(label, str) else tuple(label)
            labels.extend(names)
            pieces.append(np.asarray(st, dtype=np.complex128))
        if all(p.ndim == 1 for p in pieces):
            state = pieces[0]
            for p in pieces[1:]:
                state = kron(state, p)
        else:
            state = _as_density(pieces[0])
            for p in pieces[1:]:
                state = kron(state, _as_density(p))
        return cls(tuple(labels), state)

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    @property
    def is_pure(self) -> bool:
        return self.state.ndim == 1

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LabelError(f"no qubit named {label!r} in {self.labels}") from None

    def density_matrix(self) -> np.ndarray:
        return _as_density(self.state)

    def as_mixed(self) -> "Register":
        return self if not self.is_pure else Register(self.labels, self.density_matrix())

    def norm_error(self) -> float:
        """Deviation of the norm (pure) or trace (mixed) from one."""
        if self.is_pure:
            return abs(float(np.vdot(self.state, self.state).real) - 1.0)
        return abs(complex(np.trace(self.state)) - 1.0)

    def reduced(self, keep: Sequence[str]) -> np.ndarray:
        """Density matrix of the ``keep`` qubits, in register order."""
        idx = [self.index(k) for k in keep]
        if self.is_pure:
            n = self.num_qubits
            rest = [q for q in range(n) if q not in idx]
            t = self.state.reshape((2,) * n).transpose(sorted(idx) + rest)
            t = t.reshape(2 ** len(idx), -1)
            return t @ dagger(t)
        return partial_trace(self.state, idx, self.num_qubits)


def _as_density(state: np.ndarray) -> np.ndarray:
    return projector(state) if state.ndim == 1 else state


def _apply_on_axes(t: np.ndarray, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    k = len(axes)
    op_t = op.reshape((2,) * (2 * k))
    out = np.tensordot(op_t, t, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _apply_operator(state: np.ndarray, op: np.ndarray, axes: Sequence[int], n: int) -> np.ndarray:
    """``op`` on the qubits ``axes`` of a ket, or ``op rho op^dagger`` for a density matrix."""
    if state.ndim == 1:
        return _apply_on_axes(state.reshape((2,) * n), op, axes).reshape(-1)
    t = state.reshape((2,) * (2 * n))
    t = _apply_on_axes(t, op, axes)
    t = _apply_on_axes(t, np.conj(op), [n + a for a in axes])
    return t.reshape(2**n, 2**n)


def _target_axes(reg: Register, targets: Sequence[str], k: int) -> list[int]:
    targets = list(targets)
    if len(targets) != k:
        raise LabelError(f"operator acts on {k} qubits but {len(targets)} targets given")
    if len(set(targets)) != len(targets):
        raise LabelError(f"targets must be distinct: {targets}")
    return [reg.index(t) for t in targets]


def apply_gate(reg: Register, g, targets: Sequence[str], *, check: bool = True) -> Register:
    """Apply unitary ``g`` to the named qubits, in the order given.

    ``check=False`` skips the unitarity test, for callers that validated ``g``
    once up front.
    """
    g = as_matrix(g, square=True)
    if check and not is_unitary(g, HERMITIAN_TOL):
        raise UnitarityError("gate matrix is not unitary within 1e-10")
    axes = _target_axes(reg, targets, num_qubits_of(g.shape[0]))
    return Register(reg.labels, _apply_operator(reg.state, g, axes, reg.num_qubits))


@dataclass(frozen=True)
class MeasurementOutcome:
    qubit: str
    result: int
    probability: float
    collapsed: Optional[Register]

    @property
    def impossible(self) -> bool:
        return self.collapsed is None


def project(reg: Register, qubit: str, result: int) -> tuple[float, Optional[Register]]:
    """Born probability of ``result`` on ``qubit`` and the renormalized post-state.

    The post-state is ``None`` when the probability is below ``IMPOSSIBLE_PROB``.
    """
    q = reg.index(qubit)
    n = reg.num_qubits
    if reg.is_pure:
        t = reg.state.reshape((2,) * n).copy()
        sl = [slice(None)] * n
        sl[q] = 1 - result
        t[tuple(sl)] = 0.0
        v = t.reshape(-1)
        prob = float(np.vdot(v, v).real)
        if prob < IMPOSSIBLE_PROB:
            return max(prob, 0.0), None
        return prob, Register(reg.labels, v / math.sqrt(prob))
    t = reg.state.reshape((2,) * (2 * n)).copy()
    for axis in (q, n + q):
        sl = [slice(None)] * (2 * n)
        sl[axis] = 1 - result
        t[tuple(sl)] = 0.0
    rho = t.reshape(2**n, 2**n)
    prob = float(np.trace(rho).real)
    if prob < IMPOSSIBLE_PROB:
        return max(prob, 0.0), None
    return prob, Register(reg.labels, rho / prob)


def measure(reg: Register, qubit: str) -> tuple[MeasurementOutcome, MeasurementOutcome]:
    """Computational-basis measurement of one qubit, both branches returned.

    Nothing is sampled here; callers pick or mix branches themselves.
    """
    out = []
    for result in (0, 1):
        prob, post = project(reg, qubit, result)
        out.append(MeasurementOutcome(qubit, result, prob, post))
    return out[0], out[1]


def kraus_completeness_error(operators: Sequence[np.ndarray]) -> float:
    ops = [as_matrix(o, square=True) for o in operators]
    total = sum(dagger(o) @ o for o in ops)
    return float(np.max(np.abs(total - np.eye(ops[0].shape[0]))))


def apply_channel(reg: Register, ch, targets: Sequence[str]) -> Register:
    """Apply a Kraus channel to the named qubits; the result is always mixed.

    ``ch`` is a ``KrausChannel`` or any sequence of Kraus matrices.
    """
    operators = [as_matrix(o, square=True) for o in getattr(ch, "operators", ch)]
    if not operators:
        raise CPTPError("empty Kraus set")
    if kraus_completeness_error(operators) > HERMITIAN_TOL:
        raise CPTPError("Kraus operators do not satisfy sum K^dagger K = I within 1e-10")
    axes = _target_axes(reg, targets, num_qubits_of(operators[0].shape[0]))
    rho = reg.density_matrix()
    n = reg.num_qubits
    out = sum(_apply_operator(rho, k, axes, n) for k in operators)
    return Register(reg.labels, out)
