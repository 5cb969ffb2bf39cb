"""Small dense complex linear algebra (dimensions up to 8).

Matrices and vectors are plain ``numpy`` complex arrays.  The eigensolver is a
cyclic Jacobi sweep for Hermitian input, which is exact enough and fully
deterministic at these sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotHermitian, NotUnitary

DEFAULT_TOL = 1e-9
MAX_SWEEPS = 100
OFFDIAG_THRESHOLD = 1e-12
MAX_DIM = 8


def as_matrix(M) -> np.ndarray:
    """Return ``M`` as a finite 2-D complex array (copy)."""
    A = np.array(M, dtype=complex)
    if A.ndim != 2 or A.size == 0:
        raise DimensionMismatch(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def as_vector(v) -> np.ndarray:
    x = np.array(v, dtype=complex)
    if x.ndim != 1 or x.size == 0:
        raise DimensionMismatch(f"expected a non-empty 1-D vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("vector has non-finite entries")
    return x


def dagger(M) -> np.ndarray:
    return np.conj(np.asarray(M)).T


def max_abs(M) -> float:
    """Elementwise max norm, the ``||.||_inf`` used for all tolerance checks."""
    M = np.asarray(M)
    return float(np.max(np.abs(M))) if M.size else 0.0


def tensor_product(A, B) -> np.ndarray:
    """Kronecker product with ``A``'s index major."""
    A = as_matrix(A)
    B = as_matrix(B)
    ra, ca = A.shape
    rb, cb = B.shape
    out = np.empty((ra * rb, ca * cb), dtype=complex)
    for i in range(ra):
        for j in range(ca):
            out[i * rb:(i + 1) * rb, j * cb:(j + 1) * cb] = A[i, j] * B
    return out


def is_hermitian(M, tol: float = DEFAULT_TOL) -> bool:
    M = as_matrix(M)
    return M.shape[0] == M.shape[1] and max_abs(M - dagger(M)) <= tol


def is_unitary(M, tol: float = DEFAULT_TOL) -> bool:
    M = as_matrix(M)
    n, m = M.shape
    if n != m:
        raise DimensionMismatch(f"unitarity needs a square matrix, got {M.shape}")
    return max_abs(dagger(M) @ M - np.eye(n)) <= tol


def conjugate(A, W, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Return ``W^dagger A W``."""
    A = as_matrix(A)
    W = as_matrix(W)
    if A.shape[0] != A.shape[1] or W.shape[0] != W.shape[1] or A.shape != W.shape:
        raise DimensionMismatch(f"cannot conjugate {A.shape} by {W.shape}")
    if not is_unitary(W, tol):
        raise NotUnitary("conjugating matrix is not unitary within tolerance")
    return dagger(W) @ A @ W


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with the matching eigenvectors as columns of ``vectors``."""

    values: np.ndarray
    vectors: np.ndarray
    sweeps: int = 0

    @property
    def eigenvectors(self) -> list[np.ndarray]:
        return [self.vectors[:, k].copy() for k in range(self.vectors.shape[1])]

    def reconstruct(self) -> np.ndarray:
        return self.vectors @ np.diag(self.values) @ dagger(self.vectors)

    def multiplicities(self, tol: float = DEFAULT_TOL) -> list[tuple[float, int]]:
        """Distinct eigenvalues (cluster means) with their multiplicities."""
        return [(float(np.mean(self.values[g])), len(g)) for g in _clusters(self.values, tol)]


def _offdiag_norm(A: np.ndarray) -> float:
    off = A - np.diag(np.diag(A))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def _jacobi_rotate(A: np.ndarray, V: np.ndarray, p: int, q: int) -> None:
    apq = A[p, q]
    mag = abs(apq)
    if mag == 0.0:
        return
    phase = apq / mag
    # phase-rotate column q so A[p, q] becomes real, then a real Jacobi rotation
    tau = (A[q, q].real - A[p, p].real) / (2.0 * mag)
    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    ph = np.conj(phase)
    J = np.array([[c, s], [-s * ph, c * ph]], dtype=complex)
    idx = [p, q]
    A[:, idx] = A[:, idx] @ J
    A[idx, :] = dagger(J) @ A[idx, :]
    A[p, q] = 0.0
    A[q, p] = 0.0
    A[p, p] = A[p, p].real
    A[q, q] = A[q, q].real
    V[:, idx] = V[:, idx] @ J


def _clusters(values: np.ndarray, tol: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for k in range(len(values)):
        if groups and abs(values[k] - values[groups[-1][-1]]) <= tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    return groups


def _gram_schmidt(cols: np.ndarray) -> np.ndarray:
    out = np.array(cols, dtype=complex)
    for k in range(out.shape[1]):
        v = out[:, k]
        for j in range(k):
            v = v - np.vdot(out[:, j], v) * out[:, j]
        out[:, k] = v / np.linalg.norm(v)
    return out


def _fix_phase(v: np.ndarray) -> np.ndarray:
    mags = np.abs(v)
    # first component within rounding of the largest magnitude
    k = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
    return v * (np.conj(v[k]) / mags[k])


def hermitian_eigen(M, tol: float = DEFAULT_TOL) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.

    Eigenvalues are returned ascending.  Within a degenerate cluster the
    eigenvectors are re-orthonormalized by Gram-Schmidt in column order, and
    every eigenvector is rotated so its leading largest-magnitude component is
    real and positive.  Raises :class:`NotHermitian` when
    ``max|M - M^dagger| > tol`` and :class:`NoConvergence` after
    ``MAX_SWEEPS`` sweeps.
    """
    A = as_matrix(M)
    n, m = A.shape
    if n != m:
        raise DimensionMismatch(f"eigendecomposition needs a square matrix, got {A.shape}")
    if n > MAX_DIM:
        raise DimensionMismatch(f"dimension {n} exceeds the supported maximum {MAX_DIM}")
    err = max_abs(A - dagger(A))
    if err > tol:
        raise NotHermitian(f"max|M - M^dagger| = {err:.3e} exceeds tol {tol:.1e}")
    A = 0.5 * (A + dagger(A))
    V = np.eye(n, dtype=complex)
    threshold = OFFDIAG_THRESHOLD * max(1.0, float(np.linalg.norm(A)))

    sweeps = 0
    while _offdiag_norm(A) > threshold:
        if sweeps >= MAX_SWEEPS:
            raise NoConvergence(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")
        for p in range(n - 1):
            for q in range(p + 1, n):
                _jacobi_rotate(A, V, p, q)
        sweeps += 1

    values = np.diag(A).real.copy()
    order = np.argsort(values, kind="stable")
    values = values[order]
    V = V[:, order]
    for group in _clusters(values, tol):
        if len(group) > 1:
            V[:, group] = _gram_schmidt(V[:, group])
    for k in range(n):
        V[:, k] = _fix_phase(V[:, k])
    return Spectrum(values=values, vectors=V, sweeps=sweeps)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    Z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (Z + dagger(Z))
