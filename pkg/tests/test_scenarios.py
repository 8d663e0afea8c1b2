"""
Tests for the reference scenarios, config parsing and grid sweeps.
"""

import io
import json

import numpy as np
import pytest

from app.core.config import settings
from app.core.errors import ConfigError, FileIOError
from app.services import scenarios
from app.services.measures import binary_entropy
from app.services.scenarios import (
    detect_events,
    evaluate_point,
    load_config,
    parse_config,
    run_scenario,
    run_sweep,
    scenario_fig1,
    scenario_fig2,
    scenario_fig2_family,
    time_grid,
    with_points,
)
from tests.conftest import EF_HALF_ETA

REFERENCE_BRANCHES = [
    {"p": 0.5, "qubit": "A", "axis": "x"},
    {"p": 0.5, "qubit": "A", "axis": "z"},
]


def at(records, t_over_T):
    t = np.array([r.t_over_T for r in records])
    return records[int(np.argmin(np.abs(t - t_over_T)))]


# -------------------------------------------------------------------
# Bell-State Scenario
# -------------------------------------------------------------------

class TestBellScenario:

    def test_three_point_grid(self):
        start, mid, end = run_scenario(scenario_fig1(3))
        assert [start.t_over_T, mid.t_over_T, end.t_over_T] == [0.0, 0.5, 1.0]
        assert start.e_f == pytest.approx(1.0, abs=1e-9)
        assert start.e_h == pytest.approx(0.0, abs=1e-9)
        assert start.s_rho == pytest.approx(0.0, abs=1e-9)
        assert start.i_se == pytest.approx(0.0, abs=1e-9)
        assert mid.e_f == pytest.approx(0.0, abs=1e-9)
        assert mid.e_h == pytest.approx(1.0, abs=1e-9)
        assert mid.s_rho == pytest.approx(1.0, abs=1e-9)
        assert mid.i_se == pytest.approx(1.0, abs=1e-9)
        assert end.e_f == pytest.approx(1.0, abs=1e-9)
        assert end.e_h == pytest.approx(0.0, abs=1e-9)

    def test_grid_contract(self, fig1_records):
        assert len(fig1_records) == 1001
        assert fig1_records[0].t_over_T == 0.0
        assert fig1_records[-1].t_over_T == pytest.approx(1.0)

    def test_information_equals_entropy(self, fig1_records):
        assert at(fig1_records, 0.5).s_rho == pytest.approx(1.0, abs=1e-9)
        for r in fig1_records:
            assert abs(r.i_se - r.s_rho) < 1e-9
            oracle = binary_entropy(0.5 * (1 + np.cos(np.pi * r.t_over_T) ** 2))
            assert abs(r.i_se - oracle) < 1e-8

    def test_average_entanglement_is_constant(self, fig1_records):
        assert all(abs(r.e_av - 1.0) < 1e-9 for r in fig1_records)

    def test_record_consistency(self, fig1_records):
        for r in fig1_records:
            assert abs(r.e_h - (r.e_av - r.e_f)) < 1e-10
            assert r.i_se >= -1e-9


# -------------------------------------------------------------------
# Eta-Mixture Scenarios
# -------------------------------------------------------------------

class TestEtaScenarios:

    def test_eta_one_matches_bell_scenario(self):
        bell = run_scenario(scenario_fig1(101))
        eta_one = run_scenario(scenario_fig2(1.0, 101))
        for a, b in zip(bell, eta_one):
            assert np.allclose(a.values(), b.values(), atol=1e-10)

    def test_eta_out_of_range(self):
        with pytest.raises(ConfigError):
            scenario_fig2(-0.1)

    def test_separable_family(self, fig2_zero_records):
        assert all(r.e_f < 1e-9 and r.e_h < 1e-9 for r in fig2_zero_records)
        s = np.array([r.s_rho for r in fig2_zero_records])
        assert s[0] == pytest.approx(1.0, abs=1e-9)
        assert s.min() == pytest.approx(1.0, abs=1e-9)
        assert at(fig2_zero_records, 0.5).s_rho == pytest.approx(2.0, abs=1e-9)

    def test_sudden_death_and_revival(self, fig2_half_cfg, fig2_half_records):
        events = detect_events(fig2_half_cfg, fig2_half_records)
        assert 0.32 <= events.death_t_over_T <= 0.34
        assert 0.66 <= events.revival_t_over_T <= 0.68
        assert events.coherence_at_death is not None and events.coherence_at_death > 0
        assert fig2_half_records[-1].e_f == pytest.approx(EF_HALF_ETA, abs=1e-4)

    def test_hidden_entanglement_saturates_early(self, fig2_half_records):
        first_half = [r for r in fig2_half_records if r.t_over_T <= 0.5]
        top = max(r.e_h for r in first_half)
        peak = next(r for r in first_half if r.e_h >= top - 1e-9)
        assert peak.e_h == pytest.approx(EF_HALF_ETA, abs=1e-4)
        assert peak.t_over_T < 0.5

    def test_no_events_without_entanglement(self, fig2_zero_records):
        cfg = scenario_fig2(0.0, 1001)
        events = detect_events(cfg, fig2_zero_records)
        assert events.death_t_over_T is None and events.revival_t_over_T is None

    def test_family_and_sweep(self):
        family = scenario_fig2_family((1.0, 0.25), points=5)
        assert [eta for eta, _ in family] == [1.0, 0.25]
        sweep = run_sweep((0.0, 1.0), points=5)
        assert [eta for eta, _ in sweep] == [0.0, 1.0]
        assert all(len(records) == 5 for _, records in sweep)


# -------------------------------------------------------------------
# Grid Evaluation
# -------------------------------------------------------------------

class TestGridEvaluation:

    def test_time_grid(self):
        cfg = with_points(scenario_fig1(), 5)
        assert np.allclose(time_grid(cfg), [0, 0.25, 0.5, 0.75, 1.0])

    def test_with_points_rejects_small_grid(self):
        with pytest.raises(ConfigError):
            with_points(scenario_fig1(), 2)

    def test_workers_preserve_order(self):
        cfg = scenario_fig2(0.5, 41)
        serial = run_scenario(cfg, workers=1)
        threaded = run_scenario(cfg, workers=4)
        assert [r.values() for r in serial] == [r.values() for r in threaded]

    def test_closed_form_method_agrees(self, mocker):
        cfg = scenario_fig2(0.75, 21)
        full = run_scenario(cfg)
        mocker.patch.object(settings, "mutual_information_method", "closed_form")
        closed = run_scenario(cfg)
        for a, b in zip(full, closed):
            assert abs(a.i_se - b.i_se) < 1e-9

    def test_explicit_method_overrides_settings(self, mocker):
        cfg = scenario_fig2(0.25, 11)
        spy = mocker.spy(scenarios, "mutual_information_full")
        mocker.patch.object(settings, "mutual_information_method", "closed_form")
        run_scenario(cfg, method="full")
        assert spy.call_count == 11

    def test_evaluate_point_scales_time(self):
        cfg = parse_config(json.dumps({"omega": 4 * np.pi, "branches": REFERENCE_BRANCHES}))
        record = evaluate_point(cfg.to_ensemble(), 0.5, cfg.period)
        assert record.e_h == pytest.approx(1.0, abs=1e-9)


# -------------------------------------------------------------------
# Config Parsing
# -------------------------------------------------------------------

class TestParseConfig:

    def test_defaults_fill_bell_scenario(self):
        doc = {"initial_state": {"type": "bell", "which": "phi_plus"}, "branches": REFERENCE_BRANCHES}
        cfg = parse_config(json.dumps(doc))
        assert cfg.model_dump() == scenario_fig1().model_dump()
        assert cfg.points == settings.default_points

    def test_eta_mixture_document(self):
        doc = {"initial_state": {"type": "eta_mixture", "eta": 0.5}, "branches": REFERENCE_BRANCHES}
        assert parse_config(json.dumps(doc)).model_dump() == scenario_fig2(0.5).model_dump()

    def test_explicit_matrix_and_unitary(self):
        doc = {
            "initial_state": {"type": "matrix", "real": np.diag([0.5, 0, 0, 0.5]).tolist()},
            "branches": [{"p": 1.0, "qubit": "B", "unitary": {"real": [[0, 1], [1, 0]]}}],
            "points": 3,
        }
        records = run_scenario(parse_config(json.dumps(doc)))
        assert all(r.e_f == pytest.approx(0.0, abs=1e-9) for r in records)

    def test_probability_sum_names_branches(self):
        doc = {"branches": [{"p": 0.5, "axis": "x"}, {"p": 0.4, "axis": "z"}]}
        with pytest.raises(ConfigError, match="branches"):
            parse_config(json.dumps(doc))

    def test_eta_range_names_initial_state(self):
        doc = {"initial_state": {"type": "eta_mixture", "eta": 1.5}, "branches": REFERENCE_BRANCHES}
        with pytest.raises(ConfigError, match="initial_state"):
            parse_config(json.dumps(doc))

    def test_rejects_non_unitary(self):
        doc = {"branches": [{"p": 1.0, "unitary": {"real": [[1, 1], [0, 1]]}}]}
        with pytest.raises(ConfigError, match="unitary"):
            parse_config(json.dumps(doc))

    def test_rejects_axis_and_unitary_together(self):
        doc = {"branches": [{"p": 1.0, "axis": "x", "unitary": {"real": [[1, 0], [0, 1]]}}]}
        with pytest.raises(ConfigError):
            parse_config(json.dumps(doc))

    def test_rejects_unknown_keys(self):
        doc = {"branches": REFERENCE_BRANCHES, "gamma": 0.1}
        with pytest.raises(ConfigError, match="gamma"):
            parse_config(json.dumps(doc))

    def test_rejects_malformed_json(self):
        with pytest.raises(ConfigError):
            parse_config('{"branches": [')

    def test_load_config_from_file(self, tmp_path):
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps({"branches": REFERENCE_BRANCHES, "points": 11}))
        assert load_config(path).points == 11

    def test_load_config_from_stdin(self, mocker):
        mocker.patch("sys.stdin", io.StringIO(json.dumps({"branches": REFERENCE_BRANCHES})))
        assert load_config("-").branches[0].axis == "x"

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileIOError):
            load_config(tmp_path / "missing.json")

    def test_non_utf8_file(self, tmp_path):
        path = tmp_path / "scenario.json"
        path.write_bytes(b'{"branches": [], "\xff": 1}')
        with pytest.raises(ConfigError, match="UTF-8"):
            load_config(path)

    @pytest.mark.parametrize("key", ["t_max_over_T", "omega"])
    def test_rejects_non_finite_values(self, key):
        doc = '{"%s": Infinity, "branches": %s}' % (key, json.dumps(REFERENCE_BRANCHES))
        with pytest.raises(ConfigError, match=key):
            parse_config(doc)

    def test_rejects_non_finite_branch_frequency(self):
        doc = '{"branches": [{"p": 1.0, "axis": "x", "omega": NaN}]}'
        with pytest.raises(ConfigError, match="branches.0.omega"):
            parse_config(doc)
