"""
Tests for branch evolution, ensemble density and the entanglement budget.
"""

import math

import numpy as np
import pytest
from scipy.linalg import expm

from app.core.errors import ConfigError, NumericalError
from app.models.quantum import Branch, Ensemble
from app.services.ensemble import (
    PAULI,
    average_entanglement,
    branch_state,
    clamp_nonnegative,
    ensemble_density,
    entanglement_budget,
    hidden_entanglement,
    local_rotation,
    recover_with_record,
    recoverable_entanglement,
)
from app.services.measures import entanglement_of_formation
from app.services.states import basis_state, bell_state, density_from_pure, eta_mixture, mix
from app.utils.sampling import random_ensemble
from tests.conftest import EF_HALF_ETA

OMEGA = 2 * math.pi
PHI_PLUS = density_from_pure(bell_state("phi_plus"))


def reference_ensemble(rho0=PHI_PLUS) -> Ensemble:
    return Ensemble(
        branches=(Branch(0.5, axis="x", omega=OMEGA), Branch(0.5, axis="z", omega=OMEGA)),
        initial_state=rho0,
    )


# -------------------------------------------------------------------
# Local Rotations
# -------------------------------------------------------------------

class TestLocalRotation:

    def test_identity_at_zero(self):
        assert np.allclose(local_rotation("x", OMEGA, 0.0), np.eye(2))

    def test_half_period(self):
        assert np.allclose(local_rotation("x", OMEGA, 0.5), -1j * PAULI["x"])

    @pytest.mark.parametrize("axis", ["x", "z"])
    def test_full_period_is_minus_identity(self, axis):
        assert np.allclose(local_rotation(axis, OMEGA, 1.0), -np.eye(2))

    @pytest.mark.parametrize("axis", ["x", "y", "z"])
    def test_matches_matrix_exponential(self, axis):
        for t in (0.1, 0.37, 0.9):
            expected = expm(-0.5j * PAULI[axis] * OMEGA * t)
            assert np.max(np.abs(local_rotation(axis, OMEGA, t) - expected)) < 1e-12

    def test_rejects_bad_arguments(self):
        with pytest.raises(ConfigError):
            local_rotation("w", OMEGA, 0.1)
        with pytest.raises(ConfigError):
            local_rotation("x", OMEGA, -0.1)
        with pytest.raises(ConfigError):
            local_rotation("x", 0.0, 0.1)


# -------------------------------------------------------------------
# Branches & Ensemble Density
# -------------------------------------------------------------------

class TestEnsembleDensity:

    def test_branch_states_at_half_period(self):
        x_branch, z_branch = reference_ensemble().branches
        assert np.allclose(branch_state(x_branch, PHI_PLUS, 0.5).matrix, density_from_pure(bell_state("psi_plus")).matrix)
        assert np.allclose(branch_state(z_branch, PHI_PLUS, 0.5).matrix, density_from_pure(bell_state("phi_minus")).matrix)

    def test_branch_at_zero_is_initial(self):
        branch = Branch(1.0, axis="y", target="B", omega=OMEGA)
        assert np.allclose(branch_state(branch, PHI_PLUS, 0.0).matrix, PHI_PLUS.matrix)

    def test_branch_needs_two_qubits(self):
        with pytest.raises(ConfigError):
            branch_state(Branch(1.0), density_from_pure(basis_state("010")), 0.1)

    def test_explicit_unitary_is_time_independent(self):
        branch = Branch(1.0, unitary=PAULI["x"])
        assert branch.axis is None
        early = branch_state(branch, PHI_PLUS, 0.1).matrix
        late = branch_state(branch, PHI_PLUS, 7.3).matrix
        assert np.allclose(early, late)

    def test_rejects_non_unitary_branch(self):
        with pytest.raises(ConfigError):
            Branch(1.0, unitary=2 * np.eye(2))

    def test_rejects_bad_probability_sum(self):
        with pytest.raises(ConfigError):
            Ensemble(branches=(Branch(0.5), Branch(0.4)), initial_state=PHI_PLUS)

    def test_reference_midpoint(self):
        expected = mix([
            (0.5, density_from_pure(bell_state("phi_minus"))),
            (0.5, density_from_pure(bell_state("psi_plus"))),
        ])
        assert np.allclose(ensemble_density(reference_ensemble(), 0.5).matrix, expected.matrix)

    def test_reference_full_period_recovers_bell(self):
        assert np.allclose(ensemble_density(reference_ensemble(), 1.0).matrix, PHI_PLUS.matrix)

    def test_separable_midpoint_is_maximally_mixed(self):
        rho = ensemble_density(reference_ensemble(eta_mixture(0.0)), 0.5)
        assert np.allclose(rho.matrix, np.eye(4) / 4)


# -------------------------------------------------------------------
# Entanglement Budget
# -------------------------------------------------------------------

class TestEntanglementBudget:

    def test_reference_endpoints(self):
        ens = reference_ensemble()
        assert hidden_entanglement(ens, 0.5) == pytest.approx(1.0, abs=1e-9)
        assert hidden_entanglement(ens, 1.0) == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("t", [0.0, 0.13, 0.5, 0.77])
    def test_average_is_constant(self, t):
        assert average_entanglement(reference_ensemble(), t) == pytest.approx(1.0, abs=1e-9)
        half = reference_ensemble(eta_mixture(0.5))
        assert average_entanglement(half, t) == pytest.approx(EF_HALF_ETA, abs=1e-6)

    def test_product_states_have_no_average(self):
        ens = reference_ensemble(density_from_pure(basis_state("00")))
        assert average_entanglement(ens, 0.3) == pytest.approx(0.0, abs=1e-12)

    def test_separable_family_has_no_hidden_entanglement(self):
        ens = reference_ensemble(eta_mixture(0.0))
        for t in np.linspace(0, 1, 11):
            assert hidden_entanglement(ens, t) < 1e-9

    def test_budget_identity(self, rng):
        for _ in range(50):
            ens = random_ensemble(rng)
            t = float(rng.uniform(0, 2))
            budget = entanglement_budget(ens, t)
            formation = entanglement_of_formation(ensemble_density(ens, t))
            assert abs(budget.hidden + formation - budget.average) < 1e-10
            assert budget.hidden >= -1e-10

    def test_convexity_over_random_ensembles(self, rng):
        for _ in range(1000):
            ens = random_ensemble(rng)
            assert entanglement_budget(ens, float(rng.uniform(0, 2))).hidden >= -1e-10

    def test_periodicity(self):
        ens = reference_ensemble(eta_mixture(0.5))
        for t in (0.1, 0.4, 0.8):
            a, b = entanglement_budget(ens, t), entanglement_budget(ens, t + 1.0)
            assert np.allclose(a, b, atol=1e-9)

    def test_clamp(self):
        assert clamp_nonnegative(-1e-12, "x", 0.0) == 0.0
        assert clamp_nonnegative(0.25, "x", 0.0) == 0.25
        with pytest.raises(NumericalError):
            clamp_nonnegative(-1e-6, "x", 0.0)


# -------------------------------------------------------------------
# Recovery With The Branch Record
# -------------------------------------------------------------------

class TestRecovery:

    def test_record_restores_initial_state(self):
        ens = reference_ensemble(eta_mixture(0.5))
        recovered = recover_with_record(ens, 0.4)
        assert np.allclose(recovered.matrix, eta_mixture(0.5).matrix)

    def test_recoverable_equals_hidden(self):
        ens = reference_ensemble()
        assert recoverable_entanglement(ens, 0.5) == pytest.approx(hidden_entanglement(ens, 0.5), abs=1e-9)
