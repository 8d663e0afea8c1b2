"""Immutable quantum value types.

Arrays held by these types are copied on construction and marked read-only,
so instances can be shared freely between threads.
"""

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import numpy.typing as npt

from app.core.config import settings
from app.core.errors import ConfigError, NumericalError
from app.utils.linalg import (
    ComplexMatrix,
    EigenSystem,
    as_matrix,
    hermitian_eigensystem,
    hermiticity_defect,
    is_unitary,
)

Axis = Literal["x", "y", "z"]
Qubit = Literal["A", "B"]

NORM_TOLERANCE = 1e-10
TRACE_TOLERANCE = 1e-10
POSITIVITY_TOLERANCE = 1e-9
PROBABILITY_TOLERANCE = 1e-10
UNITARY_TOLERANCE = 1e-10


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class PureState:
    """Normalized state vector over a tensor product of subsystems."""

    amplitudes: npt.NDArray[np.complex128]
    dims: tuple[int, ...] = (2, 2)

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        dims = tuple(int(d) for d in self.dims)
        if any(d < 1 for d in dims) or math.prod(dims) != amps.size:
            raise ConfigError(f"Amplitude count {amps.size} does not match dims {list(dims)}")
        if not np.all(np.isfinite(amps)):
            raise ConfigError("State has non-finite amplitudes")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ConfigError(f"State is not normalized (sum |a|^2 = {norm:.12f})")
        object.__setattr__(self, "amplitudes", _frozen(amps))
        object.__setattr__(self, "dims", dims)

    @classmethod
    def normalized(cls, amplitudes: npt.ArrayLike, dims: tuple[int, ...] = (2, 2)) -> "PureState":
        """Build a state from unnormalized amplitudes."""
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0.0:
            raise ConfigError("Cannot normalize the zero vector")
        return cls(amps / norm, dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def overlap(self, other: "PureState") -> complex:
        """Inner product <self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityOperator:
    """Trace-one positive semidefinite operator with subsystem dimensions.

    Validated at construction: Hermitian within 1e-10, unit trace within
    1e-10 and no eigenvalue below -1e-9. The eigensystem found by the
    positivity check is kept for later spectral work.
    """

    matrix: ComplexMatrix
    dims: tuple[int, ...] = (2, 2)
    eigensystem: EigenSystem = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        m = as_matrix(self.matrix)
        dims = tuple(int(d) for d in self.dims)
        if m.shape[0] != m.shape[1] or math.prod(dims) != m.shape[0]:
            raise ConfigError(f"Matrix shape {m.shape} does not match dims {list(dims)}")
        defect = hermiticity_defect(m)
        if defect > settings.hermitian_tolerance:
            raise NumericalError(f"Density operator is not Hermitian (defect {defect:.3e})")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOLERANCE:
            raise NumericalError(f"Density operator trace is {tr.real:.12f}, expected 1")
        m = 0.5 * (m + m.conj().T)
        es = hermitian_eigensystem(m)
        smallest = float(es.eigenvalues[0])
        if smallest < -POSITIVITY_TOLERANCE:
            raise NumericalError(f"Density operator has negative eigenvalue {smallest:.3e}")
        object.__setattr__(self, "matrix", _frozen(m))
        object.__setattr__(self, "dims", dims)
        es.eigenvalues.setflags(write=False)
        es.eigenvectors.setflags(write=False)
        object.__setattr__(self, "eigensystem", es)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def spectrum(self) -> npt.NDArray[np.float64]:
        """Ascending eigenvalues."""
        return self.eigensystem.eigenvalues

    def conjugated(self, u: ComplexMatrix) -> "DensityOperator":
        """u rho u^dagger for a unitary u.

        The spectrum is unchanged and the eigenvectors are u V, so no new
        eigendecomposition is needed.

        Raises:
            ConfigError: If u is not a unitary of matching size
        """
        u = as_matrix(u)
        if u.shape != self.matrix.shape or not is_unitary(u, tol=UNITARY_TOLERANCE):
            raise ConfigError(f"Expected a {self.dim}x{self.dim} unitary, got shape {u.shape}")
        m = u @ self.matrix @ u.conj().T
        rotated = EigenSystem(self.eigensystem.eigenvalues, u @ self.eigensystem.eigenvectors)
        return self._validated(0.5 * (m + m.conj().T), self.dims, rotated)

    def regrouped(self, dims: tuple[int, ...]) -> "DensityOperator":
        """Same operator with its dimension split into different tensor factors.

        Raises:
            ConfigError: If the product of dims differs from the matrix size
        """
        dims = tuple(int(d) for d in dims)
        if math.prod(dims) != self.dim:
            raise ConfigError(f"Cannot regroup dimension {self.dim} as {list(dims)}")
        return self._validated(self.matrix, dims, self.eigensystem)

    @classmethod
    def _validated(
        cls, matrix: ComplexMatrix, dims: tuple[int, ...], eigensystem: EigenSystem
    ) -> "DensityOperator":
        # callers guarantee every construction check already holds
        eigensystem.eigenvalues.setflags(write=False)
        eigensystem.eigenvectors.setflags(write=False)
        rho = object.__new__(cls)
        object.__setattr__(rho, "matrix", _frozen(matrix))
        object.__setattr__(rho, "dims", dims)
        object.__setattr__(rho, "eigensystem", eigensystem)
        return rho


@dataclass(frozen=True)
class Branch:
    """One ensemble branch: a probability and a local unitary generator.

    Axis branches apply exp(-i sigma_axis omega t / 2) at time t; branches
    with an explicit unitary apply that fixed unitary at every t.
    """

    probability: float
    axis: Axis | None = "x"
    unitary: ComplexMatrix | None = None
    target: Qubit = "A"
    omega: float = field(default_factory=lambda: settings.default_omega)

    def __post_init__(self) -> None:
        p = float(self.probability)
        if not (0.0 <= p <= 1.0):
            raise ConfigError(f"Branch probability {p} outside [0, 1]")
        if self.target not in ("A", "B"):
            raise ConfigError(f"Unknown target qubit: {self.target}")
        if self.unitary is not None:
            u = as_matrix(self.unitary)
            if u.shape != (2, 2) or not is_unitary(u, tol=UNITARY_TOLERANCE):
                raise ConfigError("Explicit branch unitary must be a 2x2 unitary")
            object.__setattr__(self, "unitary", _frozen(u))
            object.__setattr__(self, "axis", None)
        elif self.axis not in ("x", "y", "z"):
            raise ConfigError(f"Unknown rotation axis: {self.axis}")
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ConfigError(f"Angular frequency must be positive, got {self.omega}")
        object.__setattr__(self, "probability", p)


@dataclass(frozen=True)
class Ensemble:
    """Weighted branches acting on a common two-qubit initial state."""

    branches: tuple[Branch, ...]
    initial_state: DensityOperator

    def __post_init__(self) -> None:
        branches = tuple(self.branches)
        if not branches:
            raise ConfigError("Ensemble needs at least one branch")
        total = sum(b.probability for b in branches)
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise ConfigError(f"Branch probabilities sum to {total:.12f}, expected 1")
        if self.initial_state.dims != (2, 2):
            raise ConfigError(f"Initial state must be two-qubit, got dims {list(self.initial_state.dims)}")
        object.__setattr__(self, "branches", branches)

    @property
    def probabilities(self) -> npt.NDArray[np.float64]:
        return np.array([b.probability for b in self.branches])


@dataclass(frozen=True)
class SystemEnvironmentState:
    """Block-diagonal state of a pointer-basis environment and the two-qubit system.

    The environment is the left tensor factor: dims are (env_dim, 4).
    """

    state: DensityOperator
    env_dim: int
    sys_dims: tuple[int, int] = (2, 2)

    def __post_init__(self) -> None:
        if self.state.dims != (self.env_dim, math.prod(self.sys_dims)):
            raise ConfigError(
                f"Composite dims {list(self.state.dims)} do not match environment {self.env_dim} "
                f"and system {list(self.sys_dims)}"
            )

    def block(self, i: int) -> ComplexMatrix:
        """Unnormalized system block p_i rho_i for pointer state i."""
        d = math.prod(self.sys_dims)
        return self.state.matrix[i * d:(i + 1) * d, i * d:(i + 1) * d]
