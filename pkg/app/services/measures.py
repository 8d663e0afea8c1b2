"""Entropies and two-qubit entanglement measures.

All logarithms are base 2. Concurrence and entanglement of formation are
normalized so that Bell states score exactly 1.
"""

import logging
import math
from typing import TypeAlias

import numpy as np
import numpy.typing as npt

from app.core.config import settings
from app.core.errors import ConfigError, NumericalError
from app.models.quantum import DensityOperator, PureState
from app.services.states import density_from_pure, partial_trace, partial_transpose
from app.utils.linalg import SIGMA_Y, hermitian_eigensystem

logger = logging.getLogger(__name__)

MeasureValue: TypeAlias = float

SPIN_FLIP = np.kron(SIGMA_Y, SIGMA_Y)
NEGATIVE_PROBABILITY_TOLERANCE = 1e-12
PROBABILITY_SUM_TOLERANCE = 1e-9
SPECTRUM_NEGATIVITY_TOLERANCE = 1e-9


def shannon_entropy(p: npt.ArrayLike) -> MeasureValue:
    """Shannon entropy H(p) = -sum p log2 p in bits, with 0 log 0 = 0.

    Raises:
        ConfigError: If p is empty, has entries outside [0, 1] beyond 1e-12,
            or does not sum to 1 within 1e-9
    """
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    if p.size == 0:
        raise ConfigError("Empty probability array")
    if np.any(p < -NEGATIVE_PROBABILITY_TOLERANCE) or np.any(p > 1.0 + NEGATIVE_PROBABILITY_TOLERANCE):
        raise ConfigError(f"Probabilities must lie in [0, 1], got {p.tolist()}")
    if abs(float(p.sum()) - 1.0) > PROBABILITY_SUM_TOLERANCE:
        raise ConfigError(f"Probabilities sum to {p.sum():.12f}, expected 1")
    return _entropy_bits(np.clip(p, 0.0, None))


def binary_entropy(x: float) -> MeasureValue:
    """h(x) = H((x, 1 - x))."""
    return shannon_entropy([x, 1.0 - x])


def von_neumann_entropy(rho: DensityOperator) -> MeasureValue:
    """S(rho) in bits; eigenvalues below ``settings.spectrum_floor`` count as 0."""
    spectrum = _clamped_spectrum(rho.spectrum())
    return _entropy_bits(spectrum)


def entropy_of_entanglement(psi: PureState) -> MeasureValue:
    """S(Tr_B |psi><psi|) for a normalized two-qubit pure state."""
    _require_two_qubits(psi.dims)
    return von_neumann_entropy(partial_trace(density_from_pure(psi), keep=0))


def concurrence(rho: DensityOperator) -> MeasureValue:
    """Wootters concurrence C = max(0, l1 - l2 - l3 - l4).

    The l_i are the singular values of sqrt(rho) sqrt(rho~), with
    rho~ = (sy x sy) rho* (sy x sy). They are read off as the positive half of
    the spectrum of the Hermitian dilation [[0, X], [X^dagger, 0]], so only
    the Hermitian eigensolver is needed and no rounding-level eigenvalue is
    square-rooted. X X^dagger equals sqrt(rho) rho~ sqrt(rho).
    """
    _require_two_qubits(rho.dims)
    sqrt_rho = rho.eigensystem.sqrt(cutoff=settings.spectrum_floor)
    sqrt_tilde = SPIN_FLIP @ sqrt_rho.conj() @ SPIN_FLIP
    x = sqrt_rho @ sqrt_tilde
    dilation = np.zeros((8, 8), dtype=np.complex128)
    dilation[:4, 4:] = x
    dilation[4:, :4] = x.conj().T
    lam = np.clip(hermitian_eigensystem(dilation).eigenvalues[::-1][:4], 0.0, None)
    c = float(lam[0] - lam[1:].sum())
    return min(max(c, 0.0), 1.0)


def eof_from_concurrence(c: float) -> MeasureValue:
    """E_f = h((1 + sqrt(1 - C^2)) / 2), monotone in C."""
    c = min(max(float(c), 0.0), 1.0)
    if c == 0.0:
        return 0.0
    root = math.sqrt(max(1.0 - c * c, 0.0))
    # (1 - root) / 2 without cancellation
    q = c * c / (2.0 * (1.0 + root))
    value = -q * math.log2(q) - (1.0 - q) * math.log1p(-q) / math.log(2.0)
    return min(max(value, 0.0), 1.0)


def entanglement_of_formation(rho: DensityOperator) -> MeasureValue:
    """Two-qubit entanglement of formation via the concurrence."""
    return eof_from_concurrence(concurrence(rho))


def negativity_oracle(rho: DensityOperator) -> MeasureValue:
    """Sum of |negative eigenvalues| of the partial transpose over B.

    For two qubits a positive value is equivalent to entanglement; used as an
    independent separability check.
    """
    _require_two_qubits(rho.dims)
    spectrum = hermitian_eigensystem(partial_transpose(rho, subsystem=1)).eigenvalues
    return float(-spectrum[spectrum < 0.0].sum())


def purity(rho: DensityOperator) -> float:
    """tr(rho^2)."""
    return float(np.real(np.trace(rho.matrix @ rho.matrix)))


def l1_coherence(rho: DensityOperator) -> float:
    """Sum of |off-diagonal entries| in the computational basis."""
    m = np.abs(rho.matrix)
    return float(m.sum() - np.trace(m))


def _clamped_spectrum(spectrum: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    if spectrum.size and spectrum[0] < -SPECTRUM_NEGATIVITY_TOLERANCE:
        raise NumericalError(f"Spectrum has negative eigenvalue {spectrum[0]:.3e}")
    return np.where(spectrum < settings.spectrum_floor, 0.0, spectrum)


def _entropy_bits(values: npt.NDArray[np.float64]) -> MeasureValue:
    nz = values[values > 0.0]
    h = float(-np.sum(nz * np.log2(nz)))
    # avoid returning -0.0
    return max(h, 0.0)


def _require_two_qubits(dims: tuple[int, ...]) -> None:
    if tuple(dims) != (2, 2):
        raise ConfigError(f"Expected a two-qubit operator with dims [2, 2], got {list(dims)}")
