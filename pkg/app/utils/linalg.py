"""Dense complex linear algebra for small (dim <= 16) matrices.

Every matrix is a 2-D ``numpy.ndarray`` of dtype complex128. Functions are
pure: inputs are never mutated and results are fresh arrays.
"""

import logging
from dataclasses import dataclass
from typing import TypeAlias

import numpy as np
import numpy.typing as npt

from app.core.config import settings
from app.core.errors import ConfigError, NumericalError

logger = logging.getLogger(__name__)

ComplexMatrix: TypeAlias = npt.NDArray[np.complex128]


@dataclass(frozen=True)
class EigenSystem:
    """Spectral decomposition of a Hermitian matrix.

    Eigenvalues ascend; eigenvector columns are orthonormal.
    """

    eigenvalues: npt.NDArray[np.float64]
    eigenvectors: ComplexMatrix

    def reconstruct(self) -> ComplexMatrix:
        """Return V diag(lambda) V^dagger."""
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T

    def sqrt(self, cutoff: float = 0.0) -> ComplexMatrix:
        """Principal square root V diag(sqrt(lambda)) V^dagger of a PSD decomposition.

        Eigenvalues in [-1e-10, 0) are clamped to 0, as are eigenvalues whose
        magnitude does not exceed ``cutoff``.

        Raises:
            NumericalError: If an eigenvalue lies below -1e-10
        """
        lam = self.eigenvalues.copy()
        if lam[0] < -settings.hermitian_tolerance:
            raise NumericalError(
                f"Matrix is not positive semidefinite (min eigenvalue {lam[0]:.3e})"
            )
        lam[lam <= cutoff] = 0.0
        lam = np.sqrt(np.clip(lam, 0.0, None))
        return (self.eigenvectors * lam) @ self.eigenvectors.conj().T


SIGMA_X: ComplexMatrix = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y: ComplexMatrix = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z: ComplexMatrix = np.array([[1, 0], [0, -1]], dtype=np.complex128)
IDENTITY_2: ComplexMatrix = np.eye(2, dtype=np.complex128)


def as_matrix(a: npt.ArrayLike) -> ComplexMatrix:
    """Coerce input to a finite 2-D complex128 array.

    Raises:
        ConfigError: If the input is not 2-D or has non-finite entries
    """
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ConfigError(f"Expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ConfigError("Matrix has non-finite entries")
    return m


# Standard suite

def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Kronecker product with block ordering a[i, j] * b."""
    return np.kron(as_matrix(a), as_matrix(b))


def matmul(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Matrix product.

    Raises:
        ConfigError: On inner dimension mismatch
    """
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ConfigError(f"Cannot multiply {a.shape} by {b.shape}")
    return a @ b


def dagger(a: ComplexMatrix) -> ComplexMatrix:
    """Conjugate transpose."""
    return as_matrix(a).conj().T


def trace(a: ComplexMatrix) -> complex:
    """Trace of a square matrix (complex)."""
    a = as_matrix(a)
    _require_square(a)
    return complex(np.trace(a))


def scale(a: ComplexMatrix, factor: complex) -> ComplexMatrix:
    """Scalar multiple."""
    return complex(factor) * as_matrix(a)


def add(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Entrywise sum.

    Raises:
        ConfigError: On shape mismatch
    """
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ConfigError(f"Cannot add {a.shape} and {b.shape}")
    return a + b


def is_unitary(u: ComplexMatrix, tol: float = 1e-10) -> bool:
    """Check u^dagger u = I within tol in max-norm."""
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))) <= tol)


def hermiticity_defect(h: ComplexMatrix) -> float:
    """Max-norm of h - h^dagger."""
    h = as_matrix(h)
    return float(np.max(np.abs(h - h.conj().T)))


# Eigensolvers

def hermitian_eigensystem(h: ComplexMatrix, method: str | None = None) -> EigenSystem:
    """Diagonalize a Hermitian matrix.

    Inputs within ``settings.hermitian_tolerance`` of Hermitian are
    symmetrized as (H + H^dagger)/2 before decomposition.

    Args:
        h: Square Hermitian matrix
        method: "jacobi" or "lapack"; defaults to ``settings.eigensolver``

    Returns:
        EigenSystem with ascending eigenvalues and orthonormal eigenvector columns

    Raises:
        ConfigError: If h is not square or the method is unknown
        NumericalError: If h is not Hermitian or Jacobi fails to converge
    """
    h = as_matrix(h)
    _require_square(h)
    defect = hermiticity_defect(h)
    if defect > settings.hermitian_tolerance:
        raise NumericalError(f"Matrix is not Hermitian (max |H - H^dagger| = {defect:.3e})")
    h = 0.5 * (h + h.conj().T)

    method = method or settings.eigensolver
    if method == "lapack":
        eigenvalues, eigenvectors = np.linalg.eigh(h)
    elif method == "jacobi":
        eigenvalues, eigenvectors = jacobi_eigh(h)
    else:
        raise ConfigError(f"Unknown eigensolver: {method}")

    order = np.argsort(eigenvalues, kind="stable")
    return EigenSystem(
        eigenvalues=np.asarray(eigenvalues, dtype=np.float64)[order],
        eigenvectors=np.asarray(eigenvectors, dtype=np.complex128)[:, order],
    )


def jacobi_eigh(
    h: ComplexMatrix,
    tol: float | None = None,
    max_sweeps: int | None = None,
) -> tuple[npt.NDArray[np.float64], ComplexMatrix]:
    """Cyclic Jacobi diagonalization of a complex Hermitian matrix.

    Each rotation first removes the phase of a[p, q] with a diagonal unitary,
    then applies a real Givens rotation to the resulting real symmetric 2x2
    block. Sweeps stop when the off-diagonal Frobenius norm drops below tol.

    Returns:
        (eigenvalues, eigenvectors) in the order produced by the sweeps (unsorted)

    Raises:
        NumericalError: If convergence is not reached within max_sweeps
    """
    tol = settings.jacobi_tolerance if tol is None else tol
    max_sweeps = settings.jacobi_max_sweeps if max_sweeps is None else max_sweeps

    a = np.array(h, dtype=np.complex128)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)

    for sweep in range(max_sweeps + 1):
        off = _off_diagonal_norm(a)
        if off < tol:
            logger.debug(f"Jacobi converged after {sweep} sweeps (off={off:.2e})")
            return np.real(np.diag(a)).copy(), v
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                theta = 0.5 * np.arctan2(2.0 * r, a[q, q].real - a[p, p].real)
                c, s = np.cos(theta), np.sin(theta)
                rot = np.array(
                    [[c, s], [-s * np.conj(phase), c * np.conj(phase)]],
                    dtype=np.complex128,
                )
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.conj().T @ a[idx, :]
                v[:, idx] = v[:, idx] @ rot
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real

    raise NumericalError(
        f"Jacobi eigensolver did not converge in {max_sweeps} sweeps "
        f"(off-diagonal norm {_off_diagonal_norm(a):.3e})"
    )


def matrix_sqrt_psd(a: ComplexMatrix, cutoff: float = 0.0) -> ComplexMatrix:
    """Principal square root of a Hermitian positive semidefinite matrix; see EigenSystem.sqrt."""
    return hermitian_eigensystem(a).sqrt(cutoff)


def _require_square(a: ComplexMatrix) -> None:
    if a.shape[0] != a.shape[1]:
        raise ConfigError(f"Expected a square matrix, got shape {a.shape}")


def _off_diagonal_norm(a: ComplexMatrix) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))
