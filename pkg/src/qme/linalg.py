"""Dense complex linear algebra on small square matrices.

Matrices are plain ``numpy`` arrays of dtype ``complex128`` and shape
``(n, n)``.  Functions never mutate their inputs.

Kronecker convention: in ``kron(a, b)`` the left factor indexes the outer
blocks and the right factor indexes entries inside a block.  ``partial_trace``
uses the same convention, so ``partial_trace(kron(a, b), da, db, over="K")``
is ``trace(b) * a``.
"""

from __future__ import annotations

from typing import Literal, NamedTuple

import numpy as np

from .config import tolerances
from .errors import DimensionError, NotHermitianError, NotPositiveError, NumericalError

Matrix = np.ndarray


class EigenDecomposition(NamedTuple):
    """Ascending eigenvalues and the unitary whose columns are eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: Matrix

    def reconstruct(self) -> Matrix:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def as_matrix(m, name: str = "matrix") -> Matrix:
    """Coerce ``m`` to a finite square complex128 array."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} has non-finite entries")
    return arr


def identity(n: int) -> Matrix:
    return np.eye(n, dtype=np.complex128)


def max_norm(m: Matrix) -> float:
    return float(np.abs(m).max()) if m.size else 0.0


def _same_dim(a: Matrix, b: Matrix, what: str) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{what}: dimension mismatch {a.shape} vs {b.shape}")


def matmul(a: Matrix, b: Matrix) -> Matrix:
    a, b = as_matrix(a), as_matrix(b)
    _same_dim(a, b, "matmul")
    return a @ b


def adjoint(a: Matrix) -> Matrix:
    return as_matrix(a).conj().T.copy()


def trace(a: Matrix) -> complex:
    return complex(np.trace(as_matrix(a)))


def hermiticity_defect(m: Matrix) -> float:
    return max_norm(m - m.conj().T)


def hermitian_eig(m: Matrix) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    The input is symmetrized as ``(m + m^dagger)/2`` before LAPACK ``heevd``
    is called, so tiny asymmetries from rounding do not leak into the result.
    """
    m = as_matrix(m)
    tol = tolerances()
    defect = hermiticity_defect(m)
    if defect > tol.herm:
        raise NotHermitianError(f"matrix is not Hermitian (defect {defect:.3e} > {tol.herm:.1e})")
    h = (m + m.conj().T) / 2
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"eigendecomposition did not converge: {exc}") from exc
    return EigenDecomposition(w, v)


def hermitian_eigvals(m: Matrix) -> np.ndarray:
    """Ascending eigenvalues only; same Hermiticity check as ``hermitian_eig``."""
    m = as_matrix(m)
    mh = m.conj().T
    defect = float(np.abs(m - mh).max())
    herm = tolerances().herm
    if defect > herm:
        raise NotHermitianError(f"matrix is not Hermitian (defect {defect:.3e} > {herm:.1e})")
    try:
        return np.linalg.eigvalsh((m + mh) / 2)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"eigendecomposition did not converge: {exc}") from exc


def clipped_spectrum(m: Matrix, what: str = "matrix") -> EigenDecomposition:
    """Eigendecomposition with eigenvalues in ``[-psd, 0)`` clipped to zero.

    Raises NotPositiveError if any eigenvalue is below ``-psd``.
    """
    eig = hermitian_eig(m)
    tol = tolerances().psd
    lo = float(eig.eigenvalues[0])
    if lo < -tol:
        raise NotPositiveError(f"{what} has eigenvalue {lo:.3e} < -{tol:.1e}")
    return EigenDecomposition(np.clip(eig.eigenvalues, 0.0, None), eig.eigenvectors)


def psd_sqrt(m: Matrix) -> Matrix:
    """Principal square root of a positive semidefinite matrix."""
    eig = clipped_spectrum(m)
    u = eig.eigenvectors
    r = (u * np.sqrt(eig.eigenvalues)) @ u.conj().T
    return (r + r.conj().T) / 2


def psd_inv_sqrt(m: Matrix, floor: float = 1e-12) -> Matrix:
    """Inverse square root of a positive definite matrix.

    Raises NumericalError when the smallest eigenvalue (relative to the
    largest) is below ``floor``.
    """
    eig = hermitian_eig(m)
    w = eig.eigenvalues
    if w[0] <= floor * max(1.0, abs(w[-1])):
        raise NumericalError(f"matrix is singular to working precision (min eigenvalue {w[0]:.3e})")
    u = eig.eigenvectors
    return (u / np.sqrt(w)) @ u.conj().T


def kron(a: Matrix, b: Matrix) -> Matrix:
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(m: Matrix, dim_h: int, dim_k: int, over: Literal["H", "K"] = "K") -> Matrix:
    """Trace out one factor of an operator on ``H (x) K``.

    ``over="K"`` keeps the left (outer-block) factor, ``over="H"`` keeps the
    right one.
    """
    m = as_matrix(m)
    if dim_h < 1 or dim_k < 1 or m.shape[0] != dim_h * dim_k:
        raise DimensionError(f"cannot factor dimension {m.shape[0]} as {dim_h} x {dim_k}")
    t = m.reshape(dim_h, dim_k, dim_h, dim_k)
    if over == "K":
        return np.einsum("ikjk->ij", t)
    if over == "H":
        return np.einsum("kikj->ij", t)
    raise ValueError(f"over must be 'H' or 'K', got {over!r}")


def ginibre(rng: np.random.Generator, rows: int, cols: int) -> Matrix:
    """Matrix of i.i.d. standard complex normal entries (unit variance)."""
    z = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    return z / np.sqrt(2.0)


def random_unitary(rng: np.random.Generator, n: int) -> Matrix:
    """Haar unitary via QR with the phase fix on the diagonal of R."""
    q, r = np.linalg.qr(ginibre(rng, n, n))
    d = np.diagonal(r)
    return q * (d / np.abs(d))
