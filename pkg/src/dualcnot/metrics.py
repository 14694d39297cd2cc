"""Fidelity, infidelity and two-qubit concurrence."""

from __future__ import annotations

import numpy as np

from .errors import NumericalValidityError, ShapeError
from .linalg import as_matrix, dagger, is_hermitian, psd_factor, singular_values, trace_norm
from .states import gate

TRACE_TOL = 1e-10
FIDELITY_SLACK = 1e-9

_YY = np.kron(gate("Y"), gate("Y")).real


def check_density(rho, *, name: str = "rho") -> np.ndarray:
    rho = as_matrix(rho, square=True)
    if not is_hermitian(rho):
        raise NumericalValidityError(f"{name} is not Hermitian")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > TRACE_TOL:
        raise NumericalValidityError(f"{name} has trace {tr:.12g}")
    return 0.5 * (rho + dagger(rho))


def fidelity(a, b) -> float:
    """Uhlmann fidelity ``||sqrt(a) sqrt(b)||_1 ** 2``.

    Both states are factored over their supports, ``a = F_a F_a^+``, so the
    trace norm becomes that of the small matrix ``F_a^+ F_b``.  For a pure ``a``
    this is exactly ``<psi|b|psi>``.
    """
    a = check_density(a, name="a")
    b = check_density(b, name="b")
    if a.shape != b.shape:
        raise ShapeError(f"fidelity of {a.shape} and {b.shape} states")
    fa, fb = psd_factor(a), psd_factor(b)
    f = trace_norm(dagger(fa) @ fb) ** 2
    if f > 1.0 + FIDELITY_SLACK:
        raise NumericalValidityError(f"fidelity {f:.12g} exceeds 1")
    return float(min(max(f, 0.0), 1.0))


def infidelity(target, actual) -> float:
    """``1 - F``: zero for a perfect match, one for orthogonal states."""
    return float(min(max(1.0 - fidelity(target, actual), 0.0), 1.0))


def pure_infidelity(ket, rho) -> float:
    """``1 - <psi|rho|psi>`` without any eigen-decomposition."""
    ket = np.asarray(ket, dtype=np.complex128)
    f = float(np.vdot(ket, np.asarray(rho) @ ket).real)
    return float(min(max(1.0 - f, 0.0), 1.0))


def spin_flip(rho) -> np.ndarray:
    """``(Y x Y) rho* (Y x Y)``."""
    return _YY @ np.conj(rho) @ _YY


def concurrence_roots(rho) -> np.ndarray:
    """Square roots of the eigenvalues of ``rho (Y x Y) rho* (Y x Y)``, descending.

    They equal the singular values of the symmetric matrix ``F^T (Y x Y) F``
    with ``rho = F F^+``, which are obtained from a Hermitian dilation so that
    vanishing roots stay at round-off level instead of ``sqrt(eps)``.
    """
    rho = check_density(rho)
    if rho.shape != (4, 4):
        raise ShapeError("concurrence needs a two-qubit (4x4) density matrix")
    f = psd_factor(rho)
    tau = f.T @ _YY @ f
    roots = np.zeros(4)
    sv = singular_values(tau)
    roots[: sv.size] = sv[:4]
    return roots


def concurrence(rho) -> float:
    r = concurrence_roots(rho)
    return float(min(max(0.0, r[0] - r[1] - r[2] - r[3]), 1.0))
