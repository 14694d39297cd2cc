"""Analytic overlap, output-mixture and infidelity expressions for the protocol.

Nothing here is corrected against the circuit simulation.  Where the
expressions disagree with :func:`dualcnot.protocol.run_protocol`, the
comparison report in :mod:`dualcnot.sweeps` shows the gap.

``pi_*_bar`` is read as the complement ``1 - pi_*``; that is the only reading
that keeps the output mixtures convex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import UnsupportedError
from .protocol import Direction, ProtocolConfig
from .states import QubitParams

OUT_OF_RANGE_SLACK = 1e-9


@dataclass(frozen=True)
class PiPair:
    pi_a: float
    pi_b: float

    @property
    def pi_a_bar(self) -> float:
        return 1.0 - self.pi_a

    @property
    def pi_b_bar(self) -> float:
        return 1.0 - self.pi_b


@dataclass(frozen=True, eq=False)
class MixtureMatrices:
    omega: np.ndarray
    tau: np.ndarray
    omega_prime: np.ndarray
    tau_prime: np.ndarray


class ClosedFormValue(NamedTuple):
    value: float
    raw: float
    out_of_range: bool


def _overlap(q: QubitParams, aux: QubitParams) -> float:
    v = 0.5 + 0.5 * math.cos(q.theta) * math.cos(aux.theta) + 0.5 * math.sin(q.theta) * math.sin(
        aux.theta
    ) * math.cos(aux.phi - q.phi)
    return min(max(v, 0.0), 1.0)


def pi_values(alice: QubitParams, bob: QubitParams, aux: QubitParams) -> PiPair:
    """Overlaps ``Tr(rho_aux rho_a)`` and ``Tr(rho_aux rho_b)`` with the single aux qubit."""
    return PiPair(_overlap(alice, aux), _overlap(bob, aux))


def _hermitian_from_upper(upper: dict) -> np.ndarray:
    m = np.zeros((4, 4), dtype=np.complex128)
    for (i, j), v in upper.items():
        m[i - 1, j - 1] = v
        if i != j:
            m[j - 1, i - 1] = np.conj(v)
    return m


def _omega(ta: float, pa: float, tb: float, pb: float) -> np.ndarray:
    ca, sa = math.cos(ta / 2), math.sin(ta / 2)
    cb, sb = math.cos(tb / 2), math.sin(tb / 2)
    e = np.exp
    return _hermitian_from_upper(
        {
            (1, 1): ca**2 * cb**2,
            (1, 2): e(1j * pb) * ca**2 * cb * sb,
            (1, 3): e(1j * (pa + pb)) * ca * sb * cb * sa,
            (1, 4): e(1j * pa) * ca * cb**2 * sa,
            (2, 2): ca**2 * sb**2,
            (2, 3): e(1j * pa) * ca * sb**2 * sa,
            (2, 4): e(-1j * (pb - pa)) * ca * sb * cb * sa,
            (3, 3): sb**2 * sa**2,
            (3, 4): e(-1j * pb) * sa**2 * sb * cb,
            (4, 4): sa**2 * cb**2,
        }
    )


def _tau(ta: float, pa: float, tb: float, pb: float) -> np.ndarray:
    ca, sa = math.cos(ta / 2), math.sin(ta / 2)
    cb, sb = math.cos(tb / 2), math.sin(tb / 2)
    e = np.exp
    return _hermitian_from_upper(
        {
            (1, 1): ca**2 * cb**2,
            (1, 2): e(1j * pb) * ca**2 * cb * sb,
            (1, 3): e(1j * pa) * cb**2 * ca * sa,
            (1, 4): ca * cb * sa * sb * e(1j * (pa + pb)),
            (2, 2): ca**2 * sb**2,
            (2, 3): e(-1j * (pb - pa)) * ca * sb * cb * sa,
            (2, 4): e(1j * pa) * ca * sa * sb**2,
            (3, 3): cb**2 * sa**2,
            (3, 4): e(1j * pb) * sa**2 * sb * cb,
            (4, 4): sa**2 * sb**2,
        }
    )


def mixture_matrices(alice: QubitParams, bob: QubitParams) -> MixtureMatrices:
    """The four 4x4 output components; primed ones swap Alice's and Bob's angles."""
    a = (alice.theta, alice.phi)
    b = (bob.theta, bob.phi)
    return MixtureMatrices(
        omega=_omega(*a, *b),
        tau=_tau(*a, *b),
        omega_prime=_omega(*b, *a),
        tau_prime=_tau(*b, *a),
    )


def resolve_direction(direction: Direction | str, aux: QubitParams) -> Direction:
    """``auto`` picks a2b when the aux weight on ``|1>`` is at least one half."""
    direction = Direction(direction)
    if direction is not Direction.AUTO:
        return direction
    # sin^2(theta/2) >= 1/2 exactly when theta >= pi/2
    return Direction.A_TO_B if aux.theta >= math.pi / 2 else Direction.B_TO_A


def mixing_weight(direction: Direction | str, alice: QubitParams, bob: QubitParams, aux: QubitParams) -> float:
    """Weight of the CNOT component: ``pi_a * pi_b_bar`` (a2b) or ``pi_b * pi_a_bar`` (b2a)."""
    pi = pi_values(alice, bob, aux)
    if resolve_direction(direction, aux) is Direction.A_TO_B:
        return pi.pi_a * pi.pi_b_bar
    return pi.pi_b * pi.pi_a_bar


def closed_form_output(cfg: ProtocolConfig, direction: Direction | str = Direction.A_TO_B) -> np.ndarray:
    if not cfg.is_noiseless:
        raise UnsupportedError("closed-form outputs exist only for the noiseless protocol")
    d = resolve_direction(direction, cfg.aux)
    m = mixture_matrices(cfg.alice, cfg.bob)
    w = mixing_weight(d, cfg.alice, cfg.bob, cfg.aux)
    if d is Direction.A_TO_B:
        return w * m.omega + (1.0 - w) * m.tau
    return w * m.omega_prime + (1.0 - w) * m.tau_prime


def _infidelity_expr(w: float, t_ctrl: float, t_tgt: float) -> float:
    first = 0.25 * (1 + math.cos(t_tgt) ** 2) * (1 + math.cos(t_ctrl) ** 2)
    second = math.cos(t_ctrl / 2) ** 4 - 0.5 * math.sin(t_tgt) ** 2 * math.cos(t_ctrl)
    return 1.0 - w * first - (1.0 - w) * second


def closed_form_infidelity(
    direction: Direction | str, alice: QubitParams, bob: QubitParams, aux: QubitParams
) -> ClosedFormValue:
    """Closed-form infidelity for one direction, clamped to [0, 1].

    ``raw`` keeps the unclamped value; ``out_of_range`` flags raw values
    outside ``[-1e-9, 1 + 1e-9]``.
    """
    d = resolve_direction(direction, aux)
    w = mixing_weight(d, alice, bob, aux)
    if d is Direction.A_TO_B:
        raw = _infidelity_expr(w, alice.theta, bob.theta)
    else:
        raw = _infidelity_expr(w, bob.theta, alice.theta)
    flag = not (-OUT_OF_RANGE_SLACK <= raw <= 1.0 + OUT_OF_RANGE_SLACK)
    return ClosedFormValue(min(max(raw, 0.0), 1.0), raw, flag)
