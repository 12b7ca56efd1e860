"""
DGBO Exceptions Module
Custom exceptions for the DGBO toolkit.

Every exception carries an ``exit_code`` that the command-line front end
maps to the process exit status.
"""
from typing import List, Optional


class DGBOError(Exception):
    """Base exception for all DGBO errors."""

    exit_code: int = 1


class ConfigError(DGBOError):
    """Exception raised for malformed or unknown configuration."""

    exit_code = 2

    def __init__(self, message: str, key: str = ""):
        self.key = key
        where = f" '{key}'" if key else ""
        super().__init__(f"Config Error{where}: {message}")


class InvalidGridError(DGBOError):
    """Exception raised when a grid cannot be constructed."""

    exit_code = 2

    def __init__(self, message: str, n_points: int = 0, length: float = 0.0):
        self.n_points = n_points
        self.length = length
        super().__init__(f"Invalid Grid (n={n_points}, L={length}): {message}")


class InvalidExponentError(DGBOError):
    """Exception raised for an exponent outside the supported range."""

    exit_code = 2

    def __init__(self, message: str, exponent: float = 0.0):
        self.exponent = exponent
        super().__init__(f"Invalid Exponent {exponent}: {message}")


class InvalidInputError(DGBOError):
    """Exception raised for inputs violating an operation's preconditions."""

    exit_code = 2

    def __init__(self, message: str):
        super().__init__(f"Invalid Input: {message}")


class ResourceError(DGBOError):
    """Exception raised when a transform would exceed the memory cap."""

    def __init__(self, message: str, requested: int = 0, limit: int = 0):
        self.requested = requested
        self.limit = limit
        super().__init__(f"Resource Error (requested {requested}, limit {limit}): {message}")


class UndefinedRatioError(DGBOError):
    """Exception raised when a ratio or relative residual has a zero denominator."""

    def __init__(self, message: str, quantity: str = ""):
        self.quantity = quantity
        super().__init__(f"Undefined {quantity or 'ratio'}: {message}")


class DivergenceError(DGBOError):
    """Exception raised when an iteration fails to converge."""

    def __init__(self, message: str, history: Optional[List[float]] = None):
        self.history = list(history or [])
        last = f", last residual {self.history[-1]:.3e}" if self.history else ""
        super().__init__(f"Divergence after {len(self.history)} iterations{last}: {message}")


class DegenerateIterationError(DGBOError):
    """Exception raised when an iterate collapses to zero or overflows."""

    def __init__(self, message: str, iteration: int = 0):
        self.iteration = iteration
        super().__init__(f"Degenerate Iteration at step {iteration}: {message}")


class InstabilityError(DGBOError):
    """Exception raised when time stepping produces non-finite values."""

    exit_code = 3

    def __init__(self, message: str, last_good_time: float = 0.0):
        self.last_good_time = last_good_time
        super().__init__(f"Instability after t={last_good_time:.6g}: {message}")


class NoContractionError(DGBOError):
    """Exception raised when the Picard map fails to contract."""

    exit_code = 3

    def __init__(self, message: str, history: Optional[List[float]] = None):
        self.history = list(history or [])
        super().__init__(f"No Contraction after {len(self.history)} sweeps: {message}")


class InapplicableTheoremError(DGBOError):
    """Exception raised when the threshold theorem does not apply."""

    exit_code = 4

    def __init__(self, message: str, beta: float = 0.0, k: int = 0):
        self.beta = beta
        self.k = k
        super().__init__(f"Inapplicable Theorem (beta={beta}, k={k}): {message}")


class ConsistencyError(DGBOError):
    """Exception raised when two equivalent evaluations disagree."""

    def __init__(self, message: str, time: Optional[float] = None):
        self.time = time
        at = f" at t={time:.6g}" if time is not None else ""
        super().__init__(f"Internal Consistency Error{at}: {message}")
