"""Quantum state service: Bell basis, density operators, mixtures and partial traces.

Computational basis ordering is |00>, |01>, |10>, |11> with qubit A as the
left (most significant) tensor factor.
"""

import logging
import math
import string
from typing import Iterable, Literal

import numpy as np

from app.core.errors import ConfigError
from app.models.quantum import PROBABILITY_TOLERANCE, DensityOperator, PureState

logger = logging.getLogger(__name__)

BellKind = Literal["phi_plus", "phi_minus", "psi_plus", "psi_minus"]

_SQRT_HALF = 1.0 / math.sqrt(2.0)

BELL_AMPLITUDES: dict[str, tuple[float, float, float, float]] = {
    "phi_plus": (_SQRT_HALF, 0.0, 0.0, _SQRT_HALF),
    "phi_minus": (_SQRT_HALF, 0.0, 0.0, -_SQRT_HALF),
    "psi_plus": (0.0, _SQRT_HALF, _SQRT_HALF, 0.0),
    "psi_minus": (0.0, _SQRT_HALF, -_SQRT_HALF, 0.0),
}


def bell_state(kind: BellKind) -> PureState:
    """Return one of the four Bell states.

    Raises:
        ConfigError: If kind is not a Bell state name
    """
    try:
        amplitudes = BELL_AMPLITUDES[kind]
    except KeyError as e:
        raise ConfigError(f"Unknown Bell state: {kind}") from e
    return PureState(np.array(amplitudes, dtype=np.complex128), (2, 2))


def basis_state(bits: str) -> PureState:
    """Computational basis state from a bit string such as "01"."""
    if not bits or any(b not in "01" for b in bits):
        raise ConfigError(f"Invalid bit string: {bits!r}")
    amps = np.zeros(2 ** len(bits), dtype=np.complex128)
    amps[int(bits, 2)] = 1.0
    return PureState(amps, (2,) * len(bits))


def density_from_pure(psi: PureState) -> DensityOperator:
    """Rank-one projector |psi><psi|."""
    return DensityOperator(np.outer(psi.amplitudes, psi.amplitudes.conj()), psi.dims)


def mix(states: Iterable[tuple[float, DensityOperator]]) -> DensityOperator:
    """Convex combination sum_i p_i rho_i.

    Raises:
        ConfigError: On negative weights, weights not summing to one, or dims mismatch
    """
    states = list(states)
    if not states:
        raise ConfigError("Cannot mix an empty list of states")
    dims = states[0][1].dims
    total = 0.0
    matrix = np.zeros_like(states[0][1].matrix)
    for p, rho in states:
        if p < 0:
            raise ConfigError(f"Negative mixing probability {p}")
        if rho.dims != dims:
            raise ConfigError(f"Cannot mix dims {list(rho.dims)} with {list(dims)}")
        total += p
        matrix = matrix + p * rho.matrix
    if abs(total - 1.0) > PROBABILITY_TOLERANCE:
        raise ConfigError(f"Mixing probabilities sum to {total:.12f}, expected 1")
    return DensityOperator(matrix, dims)


def eta_mixture(eta: float) -> DensityOperator:
    """rho_0 = eta |phi+><phi+| + (1 - eta)(|00><00| + |11><11|)/2.

    Raises:
        ConfigError: If eta is outside [0, 1]
    """
    if not (0.0 <= eta <= 1.0):
        raise ConfigError(f"eta must lie in [0, 1], got {eta}")
    classical = mix(
        [(0.5, density_from_pure(basis_state("00"))), (0.5, density_from_pure(basis_state("11")))]
    )
    return mix([(eta, density_from_pure(bell_state("phi_plus"))), (1.0 - eta, classical)])


def maximally_mixed(dims: tuple[int, ...] = (2, 2)) -> DensityOperator:
    d = math.prod(dims)
    return DensityOperator(np.eye(d, dtype=np.complex128) / d, dims)


def partial_trace(rho: DensityOperator, keep: int) -> DensityOperator:
    """Reduced operator on subsystem ``keep``, tracing out all others.

    Raises:
        ConfigError: If rho has fewer than two subsystems or keep is out of range
    """
    dims = rho.dims
    n = len(dims)
    if n < 2:
        raise ConfigError("Partial trace needs at least two subsystems")
    if not (0 <= keep < n):
        raise ConfigError(f"Invalid subsystem index {keep} for dims {list(dims)}")

    letters = string.ascii_lowercase
    rows = letters[:n]
    cols = "".join(letters[i] if i != keep else letters[n] for i in range(n))
    expr = f"{rows}{cols}->{letters[keep]}{letters[n]}"
    reduced = np.einsum(expr, rho.matrix.reshape(dims + dims))
    return DensityOperator(reduced, (dims[keep],))


def partial_transpose(rho: DensityOperator, subsystem: int = 1) -> np.ndarray:
    """Partial transpose of a bipartite operator over one subsystem.

    The result is Hermitian but generally not positive, so a bare matrix is returned.
    """
    if len(rho.dims) != 2 or subsystem not in (0, 1):
        raise ConfigError(f"Partial transpose needs a bipartite operator, got dims {list(rho.dims)}")
    da, db = rho.dims
    t = rho.matrix.reshape(da, db, da, db)
    t = t.transpose(0, 3, 2, 1) if subsystem == 1 else t.transpose(2, 1, 0, 3)
    return t.reshape(da * db, da * db)


def apply_unitary(u: np.ndarray, rho: DensityOperator) -> DensityOperator:
    """Return u rho u^dagger with the dims of rho.

    Raises:
        ConfigError: If u is not a unitary of the size of rho
    """
    return rho.conjugated(u)
