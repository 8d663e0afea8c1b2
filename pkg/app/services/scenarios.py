"""Scenario service: the two reference experiments, config parsing and time-grid sweeps."""

import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np
from pydantic import ValidationError

from app.core.config import settings
from app.core.errors import ConfigError, FileIOError, NumericalError
from app.models.quantum import Ensemble
from app.schemas.scenario import (
    BellInitialState,
    BranchSpec,
    EtaMixtureInitialState,
    EventReport,
    ScenarioConfig,
    TimeSeriesRecord,
)
from app.services.ensemble import branch_states, budget_from_states, ensemble_density
from app.services.environment import closed_form_from_states, embed_states, mutual_information_full
from app.services.measures import l1_coherence, von_neumann_entropy
from app.services.states import mix

logger = logging.getLogger(__name__)

DEFAULT_ETAS = (1.0, 0.5, 0.0)

InformationMethod = Literal["full", "closed_form"]


def reference_branches() -> list[BranchSpec]:
    """Qubit A rotated about x or about z with equal probability."""
    return [
        BranchSpec(p=0.5, qubit="A", axis="x"),
        BranchSpec(p=0.5, qubit="A", axis="z"),
    ]


def scenario_fig1(points: int | None = None) -> ScenarioConfig:
    """|phi+> under the two-branch random local rotation."""
    return _build_config(initial_state=BellInitialState(which="phi_plus"), points=points)


def scenario_fig2(eta: float, points: int | None = None) -> ScenarioConfig:
    """The eta-mixture initial state under the same two branches.

    Raises:
        ConfigError: If eta is outside [0, 1]
    """
    if not (0.0 <= eta <= 1.0):
        raise ConfigError(f"eta must lie in [0, 1], got {eta}")
    return _build_config(initial_state=EtaMixtureInitialState(eta=eta), points=points)


def scenario_fig2_family(
    etas: Iterable[float] = DEFAULT_ETAS, points: int | None = None
) -> list[tuple[float, ScenarioConfig]]:
    """One scenario_fig2 config per eta."""
    return [(float(eta), scenario_fig2(eta, points)) for eta in etas]


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a JSON scenario document.

    Raises:
        ConfigError: On malformed JSON, unknown keys or invariant violations;
            the message names the offending key
    """
    try:
        return ScenarioConfig.model_validate_json(text)
    except ValidationError as e:
        raise ConfigError(_describe_validation_error(e)) from e


def load_config(path: str | Path) -> ScenarioConfig:
    """Read a scenario document from a file, or from stdin when path is "-".

    Raises:
        FileIOError: If the file cannot be read
        ConfigError: If its content is invalid or not UTF-8
    """
    try:
        text = sys.stdin.read() if str(path) == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FileIOError(f"Cannot read config {path}: {e}") from e
    except UnicodeDecodeError as e:
        raise ConfigError(f"Config {path} is not valid UTF-8: {e}") from e
    return parse_config(text)


def with_points(cfg: ScenarioConfig, points: int | None) -> ScenarioConfig:
    """Copy of cfg with a different grid size."""
    if points is None:
        return cfg
    if points < 3:
        raise ConfigError(f"points must be at least 3, got {points}")
    return cfg.model_copy(update={"points": points})


def time_grid(cfg: ScenarioConfig) -> np.ndarray:
    """Uniform grid of t/T values on [0, t_max_over_T], endpoints included."""
    return np.linspace(0.0, cfg.t_max_over_T, cfg.points)


def evaluate_point(
    ens: Ensemble, t_over_T: float, period: float, method: InformationMethod | None = None
) -> TimeSeriesRecord:
    """All plotted quantities of the ensemble at one time.

    method picks the I(S:E) route; defaults to ``settings.mutual_information_method``.

    Raises:
        NumericalError: If the assembled record is internally inconsistent
    """
    t = t_over_T * period
    states = branch_states(ens, t)
    p = ens.probabilities
    rho = mix(zip(p, states))
    budget = budget_from_states(p, states, t, rho)
    s_rho = von_neumann_entropy(rho)
    if (method or settings.mutual_information_method) == "closed_form":
        i_se = closed_form_from_states(p, states, rho)
    else:
        i_se = mutual_information_full(embed_states(p, states))
    try:
        return TimeSeriesRecord(
            t_over_T=float(t_over_T),
            e_f=budget.formation,
            e_av=budget.average,
            e_h=budget.hidden,
            s_rho=s_rho,
            i_se=i_se,
        )
    except ValidationError as e:
        raise NumericalError(f"Inconsistent record at t/T={t_over_T}: {e}") from e


def run_scenario(
    cfg: ScenarioConfig,
    workers: int | None = None,
    method: InformationMethod | None = None,
) -> list[TimeSeriesRecord]:
    """Evaluate the scenario on its uniform grid, records ordered by time.

    Args:
        cfg: Validated scenario config
        workers: Thread-pool size; defaults to ``settings.sweep_workers``
        method: I(S:E) route; defaults to ``settings.mutual_information_method``

    Returns:
        One record per grid point, first at t/T = 0, last at t/T = t_max_over_T
    """
    ens = cfg.to_ensemble()
    grid = time_grid(cfg)
    period = cfg.period
    workers = workers or settings.sweep_workers
    logger.info(f"Running scenario: {len(ens.branches)} branches, {cfg.points} points, {workers} worker(s)")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda x: evaluate_point(ens, x, period, method), grid))
    else:
        records = [evaluate_point(ens, x, period, method) for x in grid]

    logger.info(f"Scenario finished: {len(records)} records")
    return records


def run_sweep(
    etas: Iterable[float] = DEFAULT_ETAS,
    points: int | None = None,
    workers: int | None = None,
) -> list[tuple[float, list[TimeSeriesRecord]]]:
    """Run scenario_fig2 for each eta."""
    return [(eta, run_scenario(cfg, workers)) for eta, cfg in scenario_fig2_family(etas, points)]


def detect_events(cfg: ScenarioConfig, records: Sequence[TimeSeriesRecord]) -> EventReport:
    """Sudden death and revival of E_f.

    Death is the first t/T where E_f falls below ``settings.event_threshold``;
    revival is the first later t/T where it rises above it. Both are linearly
    interpolated between grid points. The l1 coherence of rho at the grid point
    nearest the death time is reported alongside.
    """
    threshold = settings.event_threshold
    t = np.array([r.t_over_T for r in records])
    e_f = np.array([r.e_f for r in records])
    above = e_f >= threshold

    death = revival = coherence = None
    death_index = None
    for k in range(1, len(records)):
        if above[k - 1] and not above[k]:
            death = _crossing(t[k - 1], t[k], e_f[k - 1], e_f[k], threshold)
            death_index = k
            break

    if death_index is not None:
        for j in range(death_index + 1, len(records)):
            if not above[j - 1] and e_f[j] > threshold:
                revival = _crossing(t[j - 1], t[j], e_f[j - 1], e_f[j], threshold)
                break
        nearest = float(t[int(np.argmin(np.abs(t - death)))])
        coherence = l1_coherence(ensemble_density(cfg.to_ensemble(), nearest * cfg.period))
        logger.info(f"Entanglement sudden death at t/T={death:.6f}, revival at t/T={revival}")

    return EventReport(death_t_over_T=death, revival_t_over_T=revival, coherence_at_death=coherence)


def _build_config(initial_state, points: int | None) -> ScenarioConfig:
    try:
        return ScenarioConfig(
            initial_state=initial_state,
            branches=reference_branches(),
            points=points if points is not None else settings.default_points,
        )
    except ValidationError as e:
        raise ConfigError(_describe_validation_error(e)) from e


def _crossing(t0: float, t1: float, e0: float, e1: float, level: float) -> float:
    if e1 == e0:
        return float(t1)
    return float(t0 + (level - e0) * (t1 - t0) / (e1 - e0))


def _describe_validation_error(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<document>"
        parts.append(f"{location}: {item['msg']}")
    return "Invalid scenario config: " + "; ".join(parts)
