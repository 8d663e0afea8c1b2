"""Seeded random states, unitaries and ensembles for property checks."""

import numpy as np

from app.core.config import settings
from app.models.quantum import Branch, DensityOperator, Ensemble, PureState
from app.utils.linalg import ComplexMatrix


def make_rng(seed: int | None = None) -> np.random.Generator:
    return np.random.default_rng(settings.random_seed if seed is None else seed)


def random_hermitian(rng: np.random.Generator, n: int) -> ComplexMatrix:
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (g + g.conj().T)


def random_pure_state(rng: np.random.Generator, dims: tuple[int, ...] = (2, 2)) -> PureState:
    """Haar-distributed state from a normalized complex Gaussian vector."""
    d = int(np.prod(dims))
    return PureState.normalized(rng.normal(size=d) + 1j * rng.normal(size=d), dims)


def random_density(rng: np.random.Generator) -> DensityOperator:
    """Two-qubit mixed state: reduction of a random 4 (x) 4 pure state."""
    psi = random_pure_state(rng, (4, 4))
    # Tr_2 |psi><psi| = M M^dagger with M the 4 x 4 amplitude matrix
    m = psi.amplitudes.reshape(4, 4)
    return DensityOperator(m @ m.conj().T, (2, 2))


def random_unitary(rng: np.random.Generator, n: int = 2) -> ComplexMatrix:
    """Haar unitary via QR of a complex Gaussian matrix with the phase fix."""
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_ensemble(rng: np.random.Generator, max_branches: int = 3) -> Ensemble:
    """Random branches (fixed unitaries or axis rotations) on a random initial state."""
    n = int(rng.integers(1, max_branches + 1))
    probabilities = rng.dirichlet(np.ones(n))
    probabilities[-1] = 1.0 - probabilities[:-1].sum()
    branches = []
    for p in probabilities:
        target = "A" if rng.random() < 0.5 else "B"
        if rng.random() < 0.5:
            branches.append(
                Branch(probability=float(p), axis=None, unitary=random_unitary(rng), target=target)
            )
        else:
            axis = str(rng.choice(["x", "y", "z"]))
            omega = float(rng.uniform(0.5, 10.0))
            branches.append(Branch(probability=float(p), axis=axis, target=target, omega=omega))
    if rng.random() < 0.25:
        psi = random_pure_state(rng)
        rho0 = DensityOperator(np.outer(psi.amplitudes, psi.amplitudes.conj()), (2, 2))
    else:
        rho0 = random_density(rng)
    return Ensemble(branches=tuple(branches), initial_state=rho0)
