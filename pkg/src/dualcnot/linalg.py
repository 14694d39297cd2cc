"""Dense complex linear algebra for small qubit registers.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.  Qubit 0
is the most significant bit of a basis index, so ``kron(a, b)`` puts ``a`` on
the leading qubits and a basis label reads left to right like a ket.

The Hermitian eigensolver is a cyclic complex Jacobi iteration.  It is slow
compared to LAPACK but keeps high relative accuracy for the tiny eigenvalues
that show up in rank-deficient density matrices, which is what the fidelity
and concurrence routines depend on.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .errors import NotPSDError, NumericalValidityError, ShapeError, SizeError

MAX_ENTRIES = 2**20
HERMITIAN_TOL = 1e-10
CLAMP_TOL = 1e-10
NOT_PSD_TOL = 1e-8

_EPS = np.finfo(float).eps


def as_matrix(a, *, square: bool = False) -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"expected a 2-D matrix, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericalValidityError("matrix has non-finite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and bool(np.max(np.abs(a - dagger(a))) <= tol)


def is_unitary(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(dagger(a) @ a - np.eye(a.shape[0]))) <= tol)


def num_qubits_of(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise ShapeError(f"dimension {dim} is not a power of two")
    return n


def kron(a, b) -> np.ndarray:
    """Kronecker product; ``a`` occupies the more significant qubits.

    One-dimensional inputs are treated as kets and give a 1-D result.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim not in (1, 2) or b.ndim not in (1, 2):
        raise ShapeError("kron expects vectors or matrices")
    if a.size * b.size > MAX_ENTRIES:
        raise SizeError(f"kron result would have {a.size * b.size} entries (limit {MAX_ENTRIES})")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise NumericalValidityError("kron operands must be finite")
    return np.kron(a, b)


def kron_all(*factors) -> np.ndarray:
    out = np.asarray(factors[0], dtype=np.complex128)
    for f in factors[1:]:
        out = kron(out, f)
    return out


def partial_trace(rho, keep: Iterable[int], num_qubits: int) -> np.ndarray:
    """Reduced density operator on the qubits in ``keep``.

    Kept qubits stay in their original relative order regardless of the order
    in which they are listed.
    """
    rho = as_matrix(rho, square=True)
    n = int(num_qubits)
    if rho.shape[0] != 2**n:
        raise ShapeError(f"matrix of dimension {rho.shape[0]} is not a {n}-qubit operator")
    keep = sorted(set(int(k) for k in keep))
    for k in keep:
        if not 0 <= k < n:
            raise IndexError(f"qubit index {k} out of range for {n} qubits")
    traced = [q for q in range(n) if q not in keep]
    dk, dt = 2 ** len(keep), 2 ** len(traced)
    t = rho.reshape((2,) * (2 * n))
    order = keep + traced + [n + q for q in keep] + [n + q for q in traced]
    t = t.transpose(order).reshape(dk, dt, dk, dt)
    return np.einsum("ijkj->ik", t)


def _jacobi_rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    apq = a[p, q]
    r = abs(apq)
    phase = apq / r
    alpha, beta = a[p, p].real, a[q, q].real
    theta = (beta - alpha) / (2.0 * r)
    if abs(theta) > 1e150:
        t = 1.0 / (2.0 * theta)
    else:
        t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
        if theta == 0.0:
            t = 1.0
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    pc = np.conj(phase)

    # A <- A J with J = [[c, s], [-s conj(e), c conj(e)]]
    col_p, col_q = a[:, p].copy(), a[:, q].copy()
    a[:, p] = c * col_p - s * pc * col_q
    a[:, q] = s * col_p + c * pc * col_q
    row_p, row_q = a[p, :].copy(), a[q, :].copy()
    a[p, :] = c * row_p - s * phase * row_q
    a[q, :] = s * row_p + c * phase * row_q
    a[p, q] = a[q, p] = 0.0
    a[p, p] = alpha - t * r
    a[q, q] = beta + t * r

    vp, vq = v[:, p].copy(), v[:, q].copy()
    v[:, p] = c * vp - s * pc * vq
    v[:, q] = s * vp + c * pc * vq


def eig_hermitian(h, *, tol: float = 1e-11, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    h : array_like
        Square matrix, Hermitian within ``HERMITIAN_TOL``.  It is symmetrized
        before iterating.
    tol : float
        Off-diagonal Frobenius norm (relative to ``max(1, ||h||_F)``) at which
        the sweep loop is allowed to stop.  The loop keeps going while
        rotations still change anything, so the final residual is usually far
        below ``tol``.

    Returns
    -------
    eigenvalues : ndarray of float, sorted descending
    eigenvectors : ndarray of complex, column ``k`` pairs with eigenvalue ``k``
    """
    a = as_matrix(h, square=True)
    if not is_hermitian(a):
        raise NumericalValidityError("eig_hermitian requires a Hermitian matrix")
    a = 0.5 * (a + dagger(a))
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = max(1.0, float(np.linalg.norm(a)))

    offdiag = ~np.eye(n, dtype=bool)

    def off_norm() -> float:
        return float(np.linalg.norm(a[offdiag]))

    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = abs(a[p, q])
                # below round-off of both diagonal entries: rotating changes nothing
                if apq <= _EPS * np.sqrt(abs(a[p, p].real * a[q, q].real)) or apq < 1e-300:
                    a[p, q] = a[q, p] = 0.0
                    continue
                _jacobi_rotate(a, v, p, q)
                rotated = True
        if not rotated or off_norm() <= _EPS * 1e-3 * scale:
            break
    else:
        off = off_norm()
        if off > tol * scale:
            raise NumericalValidityError(f"Jacobi iteration did not converge (off-diagonal norm {off:.3e})")

    w = np.real(np.diag(a)).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def _checked_spectrum(rho) -> tuple[np.ndarray, np.ndarray]:
    w, v = eig_hermitian(rho)
    if w.size and w[-1] < -NOT_PSD_TOL:
        raise NotPSDError(f"matrix has eigenvalue {w[-1]:.3e} < {-NOT_PSD_TOL:g}")
    return np.clip(w, 0.0, None), v


def psd_sqrt(rho) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues down to ``-NOT_PSD_TOL`` are treated as round-off and clamped
    to zero; anything more negative raises ``NotPSDError``.
    """
    w, v = _checked_spectrum(rho)
    s = (v * np.sqrt(w)) @ dagger(v)
    return 0.5 * (s + dagger(s))


def psd_factor(rho, *, cutoff: float = 1e-13) -> np.ndarray:
    """Return ``F`` (n x r) with ``rho = F F^dagger`` restricted to the support.

    Columns are eigenvectors scaled by the square roots of their eigenvalues;
    eigenvalues at or below ``cutoff * max(1, lambda_max)`` are dropped.  At
    least one column is always returned.
    """
    w, v = _checked_spectrum(rho)
    thresh = cutoff * max(1.0, float(w[0]) if w.size else 0.0)
    keep = w > thresh
    if not np.any(keep):
        return np.zeros((v.shape[0], 1), dtype=np.complex128)
    return v[:, keep] * np.sqrt(w[keep])


def singular_values(m) -> np.ndarray:
    """Singular values (descending) from the Hermitian dilation ``[[0, M], [M^+, 0]]``.

    Working on the dilation instead of ``M^+ M`` keeps small singular values
    at absolute accuracy ~eps rather than ~sqrt(eps).
    """
    m = as_matrix(m)
    r, c = m.shape
    dil = np.zeros((r + c, r + c), dtype=np.complex128)
    dil[:r, r:] = m
    dil[r:, :r] = dagger(m)
    w, _ = eig_hermitian(dil)
    return np.clip(w[: min(r, c)], 0.0, None)


def trace_norm(m) -> float:
    return float(np.sum(singular_values(m)))
