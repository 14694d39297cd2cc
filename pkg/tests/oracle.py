"""Brute-force reference simulation, independent of the package internals.

Every operator is a full 128x128 matrix built from bit rules over the basis
index; partial traces are explicit index sums.  Only numpy is used.
"""

from __future__ import annotations

import math

import numpy as np

QUBITS = ("Qaux", "RA", "Psi_A", "BellA", "BellB", "Psi_B", "RB")
N = len(QUBITS)
DIM = 2**N
POS = {q: i for i, q in enumerate(QUBITS)}


def bit(index: int, q: str) -> int:
    return (index >> (N - 1 - POS[q])) & 1


def flip(index: int, q: str) -> int:
    return index ^ (1 << (N - 1 - POS[q]))


def ket1(theta: float, phi: float) -> np.ndarray:
    return np.array([math.cos(theta / 2), complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2)])


def controlled_x(controls: dict, target: str) -> np.ndarray:
    m = np.zeros((DIM, DIM))
    for i in range(DIM):
        fire = all(bit(i, q) == v for q, v in controls.items())
        m[flip(i, target) if fire else i, i] = 1.0
    return m


def controlled_z(controls: dict, target: str) -> np.ndarray:
    d = np.ones(DIM)
    for i in range(DIM):
        if all(bit(i, q) == v for q, v in controls.items()) and bit(i, target) == 1:
            d[i] = -1.0
    return np.diag(d)


def hadamard(q: str) -> np.ndarray:
    m = np.zeros((DIM, DIM))
    for i in range(DIM):
        for b in (0, 1):
            j = i if bit(i, q) == b else flip(i, q)
            m[j, i] += (-1.0) ** (bit(i, q) * b) / math.sqrt(2)
    return m


def proj(q: str, v: int) -> np.ndarray:
    return np.diag([1.0 if bit(i, q) == v else 0.0 for i in range(DIM)])


def initial_density(alice, bob, aux, bell: np.ndarray) -> np.ndarray:
    """Full initial density matrix; ``bell`` is the 4x4 state of (BellA, BellB)."""
    singles = {
        "Qaux": ket1(*aux),
        "RA": np.array([1.0, 0.0]),
        "Psi_A": ket1(*alice),
        "Psi_B": ket1(*bob),
        "RB": np.array([1.0, 0.0]),
    }
    rho = np.zeros((DIM, DIM), dtype=complex)
    for i in range(DIM):
        for j in range(DIM):
            v = bell[2 * bit(i, "BellA") + bit(i, "BellB"), 2 * bit(j, "BellA") + bit(j, "BellB")]
            if v == 0:
                continue
            for q, k in singles.items():
                v *= k[bit(i, q)] * np.conj(k[bit(j, q)])
            rho[i, j] = v
    return rho


def _measure(rho, q, correction):
    p0, p1 = proj(q, 0), proj(q, 1)
    return p0 @ rho @ p0 + correction @ p1 @ rho @ p1 @ correction.conj().T


def simulate(alice, bob, aux, bell=None) -> np.ndarray:
    """Final 4x4 state of (Psi_A, Psi_B); angles are ``(theta, phi)`` pairs."""
    if bell is None:
        b = np.array([1, 0, 0, 1]) / math.sqrt(2)
        bell = np.outer(b, b)
    rho = initial_density(alice, bob, aux, bell)

    def u(m):
        nonlocal rho
        rho = m @ rho @ m.conj().T

    u(controlled_x({"Qaux": 1, "Psi_A": 1}, "BellA"))
    u(controlled_x({"Qaux": 0, "Psi_B": 1}, "BellB"))
    u(controlled_x({"BellA": 1, "Qaux": 1}, "RA"))
    u(controlled_x({"BellB": 1, "Qaux": 0}, "RB"))
    rho = _measure(rho, "RA", controlled_x({}, "BellB"))
    rho = _measure(rho, "RB", controlled_x({}, "BellA"))
    u(controlled_x({"Qaux": 1, "BellB": 1}, "Psi_B"))
    u(controlled_x({"Qaux": 0, "BellA": 1}, "Psi_A"))
    u(hadamard("BellB"))
    rho = _measure(rho, "BellB", controlled_z({"Qaux": 1}, "Psi_A"))
    u(hadamard("BellA"))
    rho = _measure(rho, "BellA", controlled_z({"Qaux": 0}, "Psi_B"))
    return reduce_to_outputs(rho)


def reduce_to_outputs(rho: np.ndarray) -> np.ndarray:
    out = np.zeros((4, 4), dtype=complex)
    for i in range(DIM):
        for j in range(DIM):
            if any(bit(i, q) != bit(j, q) for q in QUBITS if q not in ("Psi_A", "Psi_B")):
                continue
            out[2 * bit(i, "Psi_A") + bit(i, "Psi_B"), 2 * bit(j, "Psi_A") + bit(j, "Psi_B")] += rho[i, j]
    return out


def cnot_ket(alice, bob, control: str) -> np.ndarray:
    a, b = ket1(*alice), ket1(*bob)
    out = np.zeros(4, dtype=complex)
    for x in (0, 1):
        for y in (0, 1):
            if control == "a":
                out[2 * x + (y ^ x)] += a[x] * b[y]
            else:
                out[2 * (x ^ y) + y] += a[x] * b[y]
    return out


NULL_EIG = 1e-13


def sqrtm_psd(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    # null-space round-off would otherwise surface as sqrt(eps) noise
    w = np.where(w < NULL_EIG * max(1.0, w.max()), 0.0, w)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    s = sqrtm_psd(a) @ sqrtm_psd(b)
    return float(np.sum(np.linalg.svd(s, compute_uv=False)) ** 2)


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence from the non-Hermitian product, using numpy's general solver."""
    yy = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]])
    r = rho @ yy @ rho.conj() @ yy
    ev = np.linalg.eigvals(r).real
    lam = np.sort(np.sqrt(np.where(ev < NULL_EIG, 0.0, ev)))[::-1]
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])
