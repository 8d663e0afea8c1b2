"""Hidden Entanglement - two-qubit ensembles under random local unitaries."""

__version__ = "0.1.0"
