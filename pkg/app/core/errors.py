"""Exception hierarchy and CLI exit codes."""


class SimulationError(Exception):
    """Base class for all errors raised by the simulator."""

    exit_code: int = 2


class ConfigError(SimulationError, ValueError):
    """Invalid configuration, arguments or inputs violating preconditions."""

    exit_code = 1


class NumericalError(SimulationError, ArithmeticError):
    """A numerical invariant was breached."""

    exit_code = 2


class FileIOError(SimulationError, OSError):
    """A config could not be read or records could not be written."""

    exit_code = 3
