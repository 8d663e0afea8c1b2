"""Pydantic schemas for scenario configs, time-series records and witness reports."""

import math
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.config import settings
from app.core.errors import SimulationError
from app.models.quantum import PROBABILITY_TOLERANCE, Branch, DensityOperator, Ensemble
from app.services.states import bell_state, density_from_pure, eta_mixture
from app.utils.linalg import is_unitary

CSV_COLUMNS = ("t_over_T", "E_f", "E_av", "E_h", "S_rho", "I_SE")
RECORD_TOLERANCE = 1e-10


class MatrixSpec(BaseModel):
    """Complex matrix given as separate real and imaginary parts."""

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    real: list[list[float]]
    imag: Optional[list[list[float]]] = None

    @model_validator(mode="after")
    def check_shape(self) -> "MatrixSpec":
        rows = len(self.real)
        if rows == 0 or any(len(r) != rows for r in self.real):
            raise ValueError("real part must be a non-empty square matrix")
        if self.imag is not None and (
            len(self.imag) != rows or any(len(r) != rows for r in self.imag)
        ):
            raise ValueError("imag part must match the shape of the real part")
        return self

    def to_array(self) -> np.ndarray:
        real = np.asarray(self.real, dtype=np.float64)
        imag = np.asarray(self.imag, dtype=np.float64) if self.imag is not None else 0.0
        return real + 1j * imag


class BellInitialState(BaseModel):
    """Initial state |phi+>, |phi->, |psi+> or |psi->."""

    model_config = ConfigDict(extra="forbid")

    type: Literal["bell"] = "bell"
    which: Literal["phi_plus", "phi_minus", "psi_plus", "psi_minus"] = "phi_plus"

    def to_density(self) -> DensityOperator:
        return density_from_pure(bell_state(self.which))


class EtaMixtureInitialState(BaseModel):
    """eta |phi+><phi+| + (1 - eta)(|00><00| + |11><11|)/2."""

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    type: Literal["eta_mixture"] = "eta_mixture"
    eta: float = Field(..., ge=0.0, le=1.0)

    def to_density(self) -> DensityOperator:
        return eta_mixture(self.eta)


class MatrixInitialState(MatrixSpec):
    """Explicit 4x4 density matrix."""

    type: Literal["matrix"] = "matrix"

    @model_validator(mode="after")
    def check_density(self) -> "MatrixInitialState":
        if len(self.real) != 4:
            raise ValueError("explicit initial state must be 4x4")
        try:
            self.to_density()
        except SimulationError as e:
            raise ValueError(str(e)) from e
        return self

    def to_density(self) -> DensityOperator:
        return DensityOperator(self.to_array(), (2, 2))


InitialStateSpec = Annotated[
    Union[BellInitialState, EtaMixtureInitialState, MatrixInitialState],
    Field(discriminator="type"),
]


class BranchSpec(BaseModel):
    """One branch: probability, target qubit, and either an axis or a fixed unitary."""

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    p: float = Field(..., ge=0.0, le=1.0)
    qubit: Literal["A", "B"] = "A"
    axis: Optional[Literal["x", "y", "z"]] = None
    unitary: Optional[MatrixSpec] = None
    omega: Optional[float] = Field(None, gt=0.0)

    @field_validator("unitary")
    @classmethod
    def check_unitary(cls, value: Optional[MatrixSpec]) -> Optional[MatrixSpec]:
        if value is not None:
            u = value.to_array()
            if u.shape != (2, 2) or not is_unitary(u, tol=1e-10):
                raise ValueError("explicit branch unitary must be a 2x2 unitary matrix")
        return value

    @model_validator(mode="after")
    def check_generator(self) -> "BranchSpec":
        if (self.axis is None) == (self.unitary is None):
            raise ValueError("a branch needs exactly one of 'axis' or 'unitary'")
        return self

    def to_branch(self, default_omega: float) -> Branch:
        return Branch(
            probability=self.p,
            axis=self.axis,
            unitary=self.unitary.to_array() if self.unitary is not None else None,
            target=self.qubit,
            omega=self.omega if self.omega is not None else default_omega,
        )


class ScenarioConfig(BaseModel):
    """A time sweep of one ensemble over [0, t_max_over_T * T]."""

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    omega: float = Field(default_factory=lambda: settings.default_omega, gt=0.0)
    t_max_over_T: float = Field(1.0, gt=0.0)
    points: int = Field(default_factory=lambda: settings.default_points, ge=3)
    initial_state: InitialStateSpec = Field(default_factory=BellInitialState)
    branches: list[BranchSpec] = Field(..., min_length=1)

    @field_validator("branches")
    @classmethod
    def check_probabilities(cls, value: list[BranchSpec]) -> list[BranchSpec]:
        total = math.fsum(b.p for b in value)
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise ValueError(f"branch probabilities sum to {total:.12f}, expected 1")
        return value

    @property
    def period(self) -> float:
        """T = 2 pi / omega."""
        return 2.0 * math.pi / self.omega

    def to_ensemble(self) -> Ensemble:
        return Ensemble(
            branches=tuple(b.to_branch(self.omega) for b in self.branches),
            initial_state=self.initial_state.to_density(),
        )


class TimeSeriesRecord(BaseModel):
    """Quantities plotted per time point: E_f, E_av, E_h, S(rho) and I(S:E)."""

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    t_over_T: float
    e_f: float = Field(..., alias="E_f")
    e_av: float = Field(..., alias="E_av")
    e_h: float = Field(..., alias="E_h")
    s_rho: float = Field(..., alias="S_rho")
    i_se: float = Field(..., alias="I_SE")

    @model_validator(mode="after")
    def check_consistency(self) -> "TimeSeriesRecord":
        values = (self.t_over_T, self.e_f, self.e_av, self.e_h, self.s_rho, self.i_se)
        if not all(math.isfinite(v) for v in values):
            raise ValueError("record fields must be finite")
        if abs(self.e_h - (self.e_av - self.e_f)) > RECORD_TOLERANCE:
            raise ValueError("E_h must equal E_av - E_f")
        return self

    def values(self) -> tuple[float, ...]:
        """Field values in CSV column order."""
        return (self.t_over_T, self.e_f, self.e_av, self.e_h, self.s_rho, self.i_se)


class SweepRecord(TimeSeriesRecord):
    """A record tagged with the eta of its initial state."""

    eta: float


class BackflowReport(BaseModel):
    """Intervals (in t/T) where dI(S:E)/dt is negative, and the sampled derivative.

    witness_values are in bits per unit time, one per grid point.
    """

    intervals: list[tuple[float, float]] = Field(default_factory=list)
    witness_values: list[float] = Field(default_factory=list)

    @field_validator("intervals")
    @classmethod
    def check_intervals(cls, value: list[tuple[float, float]]) -> list[tuple[float, float]]:
        previous_end = -math.inf
        for start, end in value:
            if start > end or start <= previous_end:
                raise ValueError("intervals must be sorted and non-overlapping")
            previous_end = end
        return value


class BackflowInterval(BaseModel):
    """A backflow interval annotated with whether entanglement revives inside it."""

    t_start: float
    t_end: float
    revives: bool


class EventReport(BaseModel):
    """Sudden death and revival times of E_f (t/T, linearly interpolated)."""

    death_t_over_T: Optional[float] = None
    revival_t_over_T: Optional[float] = None
    coherence_at_death: Optional[float] = None
