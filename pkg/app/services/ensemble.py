"""Ensemble dynamics: branch evolution, ensemble density, average and hidden entanglement.

Time is an evaluation argument, never stored state: evaluating an ensemble
at a new t is how it evolves.
"""

import logging
import math
from typing import NamedTuple

import numpy as np

from app.core.errors import ConfigError, NumericalError
from app.models.quantum import Axis, Branch, DensityOperator, Ensemble
from app.services.measures import MeasureValue, entanglement_of_formation
from app.services.states import apply_unitary, mix
from app.utils.linalg import IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z, ComplexMatrix, kron

logger = logging.getLogger(__name__)

PAULI: dict[str, ComplexMatrix] = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

# sigma_axis acting on one qubit of the pair, keyed by (target, axis)
LIFTED_PAULI: dict[tuple[str, str], ComplexMatrix] = {
    (target, axis): kron(sigma, IDENTITY_2) if target == "A" else kron(IDENTITY_2, sigma)
    for axis, sigma in PAULI.items()
    for target in ("A", "B")
}
IDENTITY_4 = np.eye(4, dtype=np.complex128)

HIDDEN_ENTANGLEMENT_TOLERANCE = 1e-10


class EntanglementBudget(NamedTuple):
    """Average, formation and hidden entanglement of an ensemble at one time."""

    average: MeasureValue
    formation: MeasureValue
    hidden: MeasureValue


def local_rotation(axis: Axis, omega: float, t: float) -> ComplexMatrix:
    """exp(-i sigma_axis omega t / 2) = cos(omega t/2) I - i sin(omega t/2) sigma_axis.

    At t = 2 pi / omega this is -I: identity up to a global phase, which
    cancels in every density operator.

    Raises:
        ConfigError: On unknown axis, negative time or non-positive omega
    """
    half_angle = _half_angle(axis, omega, t)
    return math.cos(half_angle) * IDENTITY_2 - 1j * math.sin(half_angle) * PAULI[axis]


def branch_unitary(branch: Branch, t: float) -> ComplexMatrix:
    """Two-qubit unitary of a branch at time t, acting on its target qubit."""
    if branch.unitary is not None:
        u = np.asarray(branch.unitary)
        return kron(u, IDENTITY_2) if branch.target == "A" else kron(IDENTITY_2, u)
    half_angle = _half_angle(branch.axis, branch.omega, t)
    generator = LIFTED_PAULI[(branch.target, branch.axis)]
    return math.cos(half_angle) * IDENTITY_4 - 1j * math.sin(half_angle) * generator


def branch_state(branch: Branch, rho0: DensityOperator, t: float) -> DensityOperator:
    """U_i(t) rho0 U_i(t)^dagger for a branch acting locally on its target qubit.

    Raises:
        ConfigError: If rho0 is not a two-qubit operator
    """
    if rho0.dims != (2, 2):
        raise ConfigError(f"Branch evolution needs a two-qubit state, got dims {list(rho0.dims)}")
    return apply_unitary(branch_unitary(branch, t), rho0)


def branch_states(ens: Ensemble, t: float) -> list[DensityOperator]:
    """States of every branch at time t, in branch order."""
    return [branch_state(b, ens.initial_state, t) for b in ens.branches]


def ensemble_density(ens: Ensemble, t: float) -> DensityOperator:
    """rho(t) = sum_i p_i U_i(t) rho0 U_i(t)^dagger."""
    return mix(zip(ens.probabilities, branch_states(ens, t)))


def average_entanglement(ens: Ensemble, t: float) -> MeasureValue:
    """E_av = sum_i p_i E_f(rho_i(t)).

    For pure branch states E_f coincides with the entropy of entanglement.
    """
    return _average(ens.probabilities, branch_states(ens, t))


def hidden_entanglement(ens: Ensemble, t: float) -> MeasureValue:
    """E_h = E_av - E_f(rho(t)), clamped at zero within 1e-10."""
    return entanglement_budget(ens, t).hidden


def entanglement_budget(ens: Ensemble, t: float) -> EntanglementBudget:
    """Evaluate E_av, E_f(rho(t)) and E_h together, sharing the branch states."""
    return budget_from_states(ens.probabilities, branch_states(ens, t), t)


def budget_from_states(
    probabilities: np.ndarray,
    states: list[DensityOperator],
    t: float,
    rho: DensityOperator | None = None,
) -> EntanglementBudget:
    """Entanglement budget of already evolved branch states.

    rho is their mixture when the caller has already built it.
    """
    if rho is None:
        rho = mix(zip(probabilities, states))
    e_av = _average(probabilities, states)
    e_f = entanglement_of_formation(rho)
    return EntanglementBudget(e_av, e_f, clamp_nonnegative(e_av - e_f, "hidden entanglement", t))


def recover_with_record(ens: Ensemble, t: float) -> DensityOperator:
    """State after undoing each branch unitary locally, given the record of which branch occurred.

    sum_i p_i U_i(t)^dagger rho_i(t) U_i(t); equals rho0 for a common initial state.
    """
    recovered = []
    for branch, rho in zip(ens.branches, branch_states(ens, t)):
        u = branch_unitary(branch, t)
        recovered.append(apply_unitary(u.conj().T, rho))
    return mix(zip(ens.probabilities, recovered))


def recoverable_entanglement(ens: Ensemble, t: float) -> MeasureValue:
    """Entanglement regained by local corrections once the branch record is known."""
    gained = entanglement_of_formation(recover_with_record(ens, t)) - entanglement_of_formation(
        ensemble_density(ens, t)
    )
    return clamp_nonnegative(gained, "recoverable entanglement", t)


def clamp_nonnegative(value: float, name: str, t: float) -> float:
    """Clamp rounding-level negatives to zero.

    Raises:
        NumericalError: If value is below -1e-10
    """
    if value >= 0.0:
        return value
    if value < -HIDDEN_ENTANGLEMENT_TOLERANCE:
        raise NumericalError(f"Negative {name} {value:.3e} at t={t}")
    logger.debug(f"Clamped {name} {value:.3e} to 0 at t={t}")
    return 0.0


def _average(probabilities: np.ndarray, states: list[DensityOperator]) -> MeasureValue:
    return float(sum(p * entanglement_of_formation(rho) for p, rho in zip(probabilities, states)))


def _half_angle(axis: Axis, omega: float, t: float) -> float:
    if axis not in PAULI:
        raise ConfigError(f"Unknown rotation axis: {axis}")
    if t < 0:
        raise ConfigError(f"Time must be non-negative, got {t}")
    if omega <= 0:
        raise ConfigError(f"Angular frequency must be positive, got {omega}")
    return 0.5 * omega * t
