"""Fictitious classical environment: system-environment embedding, mutual information, backflow.

The environment records which branch occurred in a fixed pointer basis
{|x_i>}; entropies are basis-invariant, so a time-independent basis is used.
"""

import enum
import logging
import math
from typing import Sequence

import numpy as np

from app.core.config import settings
from app.core.errors import ConfigError, NumericalError
from app.models.quantum import DensityOperator, Ensemble, SystemEnvironmentState
from app.schemas.scenario import BackflowInterval, BackflowReport, TimeSeriesRecord
from app.services.ensemble import branch_states, entanglement_budget
from app.services.measures import MeasureValue, shannon_entropy, von_neumann_entropy
from app.services.states import mix, partial_trace

logger = logging.getLogger(__name__)

MUTUAL_INFORMATION_TOLERANCE = 1e-9
REVIVAL_TOLERANCE = 1e-9
GRID_UNIFORMITY_TOLERANCE = 1e-9


class RevivalFlag(enum.Flag):
    """Conditions under which classical information can unlock entanglement."""

    NONE = 0
    BACKFLOW_POSSIBLE = enum.auto()
    HIDDEN_ENTANGLEMENT_POSITIVE = enum.auto()


def embed(ens: Ensemble, t: float) -> SystemEnvironmentState:
    """rho_SE(t) = sum_i p_i |x_i><x_i| (x) rho_i(t), environment as the left factor."""
    return embed_states(ens.probabilities, branch_states(ens, t))


def embed_states(
    probabilities: Sequence[float], states: Sequence[DensityOperator]
) -> SystemEnvironmentState:
    """Block-diagonal composite of branch states weighted by their probabilities."""
    env_dim = len(states)
    d = states[0].dim
    composite = np.zeros((env_dim * d, env_dim * d), dtype=np.complex128)
    for i, (p, rho) in enumerate(zip(probabilities, states)):
        composite[i * d:(i + 1) * d, i * d:(i + 1) * d] = p * rho.matrix
    return SystemEnvironmentState(
        state=DensityOperator(composite, (env_dim, d)),
        env_dim=env_dim,
        sys_dims=states[0].dims,
    )


def system_state(se: SystemEnvironmentState) -> DensityOperator:
    """Tr_E rho_SE as a two-qubit operator."""
    return partial_trace(se.state, keep=1).regrouped(se.sys_dims)


def environment_state(se: SystemEnvironmentState) -> DensityOperator:
    """Tr_S rho_SE = diag(p_i)."""
    return partial_trace(se.state, keep=0)


def mutual_information_full(se: SystemEnvironmentState) -> MeasureValue:
    """I(S:E) = S(rho_S) + S(rho_E) - S(rho_SE), every entropy by eigendecomposition.

    Raises:
        NumericalError: If the result is below -1e-9
    """
    value = (
        von_neumann_entropy(system_state(se))
        + von_neumann_entropy(environment_state(se))
        - von_neumann_entropy(se.state)
    )
    return _nonnegative_information(value)


def mutual_information_closed_form(ens: Ensemble, t: float) -> MeasureValue:
    """I(S:E) = S(rho(t)) - sum_i p_i S(rho_i(t)).

    Follows from S(sum_i p_i |x_i><x_i| (x) rho_i) = H(p) + sum_i p_i S(rho_i);
    reduces to S(rho(t)) for pure branches and to S(rho(t)) - S(rho0) for
    local-unitary branches acting on a common rho0.
    """
    return closed_form_from_states(ens.probabilities, branch_states(ens, t))


def closed_form_from_states(
    probabilities: Sequence[float],
    states: Sequence[DensityOperator],
    rho: DensityOperator | None = None,
) -> MeasureValue:
    """Closed-form I(S:E) of already evolved branch states; rho is their mixture if known."""
    p = np.asarray(probabilities, dtype=np.float64)
    if rho is None:
        rho = mix(zip(p, states))
    s_rho = von_neumann_entropy(rho)
    h_p = shannon_entropy(p)
    s_se = h_p + float(sum(pi * von_neumann_entropy(state) for pi, state in zip(p, states)))
    return _nonnegative_information(s_rho + h_p - s_se)


def backflow_intervals(series: Sequence[TimeSeriesRecord], period: float = 1.0) -> BackflowReport:
    """Intervals where dI(S:E)/dt < -settings.backflow_threshold.

    The derivative uses central differences in the interior and one-sided
    differences at the endpoints. Records are sampled in t/T, so the
    derivative is divided by the period T to give bits per unit time.
    Adjacent negative grid points are merged into one interval.

    Args:
        series: Records on a uniform, increasing t/T grid
        period: T = 2 pi / omega of the scenario the records came from

    Raises:
        ConfigError: If fewer than 3 points are given, the grid is not uniform
            or the period is not positive
    """
    if not (period > 0 and math.isfinite(period)):
        raise ConfigError(f"Period must be positive, got {period}")
    t, derivative = _information_derivative(series)
    derivative = derivative / period
    intervals = [(float(t[a]), float(t[b])) for a, b in _runs(derivative < -settings.backflow_threshold)]
    logger.debug(f"Found {len(intervals)} backflow interval(s)")
    return BackflowReport(intervals=intervals, witness_values=derivative.tolist())


def classify_backflow(
    series: Sequence[TimeSeriesRecord], report: BackflowReport
) -> list[BackflowInterval]:
    """Mark each backflow interval by whether E_f revives inside it.

    Backflow is only necessary for revivals: an ensemble of separable states
    shows backflow without any entanglement gain.
    """
    t = np.array([r.t_over_T for r in series])
    e_f = np.array([r.e_f for r in series])
    classified = []
    for start, end in report.intervals:
        lo = int(np.searchsorted(t, start - GRID_UNIFORMITY_TOLERANCE))
        hi = int(np.searchsorted(t, end + GRID_UNIFORMITY_TOLERANCE))
        window = e_f[max(lo - 1, 0):hi]
        gain = float(np.max(window - np.minimum.accumulate(window))) if window.size else 0.0
        classified.append(
            BackflowInterval(t_start=start, t_end=end, revives=gain > settings.event_threshold)
        )
    return classified


def revival_condition(ens: Ensemble, t: float) -> RevivalFlag:
    """Report which revival conditions hold at time t.

    BACKFLOW_POSSIBLE: the ensemble has non-vanishing average entanglement, so
    information flowing back from the environment can be useful.
    HIDDEN_ENTANGLEMENT_POSITIVE: E_h(t) > 0, sufficient for a later revival.
    """
    budget = entanglement_budget(ens, t)
    flags = RevivalFlag.NONE
    if budget.average > REVIVAL_TOLERANCE:
        flags |= RevivalFlag.BACKFLOW_POSSIBLE
    if budget.hidden > REVIVAL_TOLERANCE:
        flags |= RevivalFlag.HIDDEN_ENTANGLEMENT_POSITIVE
    return flags


def _information_derivative(series: Sequence[TimeSeriesRecord]) -> tuple[np.ndarray, np.ndarray]:
    if len(series) < 3:
        raise ConfigError(f"Backflow detection needs at least 3 points, got {len(series)}")
    t = np.array([r.t_over_T for r in series])
    info = np.array([r.i_se for r in series])
    steps = np.diff(t)
    if steps[0] <= 0 or np.max(np.abs(steps - steps[0])) > GRID_UNIFORMITY_TOLERANCE * max(1.0, abs(steps[0])):
        raise ConfigError("Backflow detection needs a uniform, increasing time grid")
    return t, np.gradient(info, steps[0])


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive (start, end) index pairs of consecutive True entries."""
    runs = []
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    return runs


def _nonnegative_information(value: float) -> float:
    if value < -MUTUAL_INFORMATION_TOLERANCE:
        raise NumericalError(f"Negative mutual information {value:.3e}")
    return max(value, 0.0)
