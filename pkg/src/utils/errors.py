# src/utils/errors.py
"""
Exception hierarchy for rgflow.

Every error carries the process exit code the CLI maps it to.
"""

from typing import Optional


class RGFlowError(Exception):
    """
    Base class for all rgflow errors.
    """

    exit_code = 3


class ConfigError(RGFlowError):
    """
    Invalid or malformed run configuration.
    """

    exit_code = 2


class InvalidParametersError(ConfigError):
    """
    Coefficient sequences that violate a structural requirement (unbounded beta, Omega <= 1, ...).
    """


class SolverError(RGFlowError):
    """
    A numerical routine could not produce a certified result.
    """

    exit_code = 3


class GZeroTooLargeError(SolverError):
    """
    The forward g recursion lost positivity.
    """

    def __init__(self, index: int, value: float) -> None:
        self.index = index
        self.value = value
        super().__init__(
            f"g0 too large: gbar_{index} = {value:.6g} is not positive"
        )


class GateError(SolverError):
    """
    Input rejected by the small-g0 / contraction gate.
    """


class ExpansivityViolatedError(SolverError):
    """
    The mu-direction is not expanding: (lambda_j - tau_j)^{-1} >= 1 somewhere.
    """

    def __init__(self, message: str, index: Optional[int] = None) -> None:
        self.index = index
        super().__init__(message)


class TailNotCertifiedError(SolverError):
    """
    The adaptive horizon could not bring the tail bound below the tolerance.
    """

    def __init__(self, message: str, bound: float) -> None:
        self.bound = bound
        super().__init__(message)


class ExtendHorizonError(SolverError):
    """
    A backward sum tail bound exceeds the tolerance at the working horizon.
    """

    def __init__(self, message: str, bound: float) -> None:
        self.bound = bound
        super().__init__(message)


class NonContractionError(SolverError):
    """
    Fixed-point iteration failed to contract.
    """

    def __init__(self, message: str, contraction: float) -> None:
        self.contraction = contraction
        super().__init__(message)


class StepSizeFloorError(SolverError):
    """
    The adaptive integrator hit its minimum step size.
    """


class ShootingDivergedError(SolverError):
    """
    Newton iteration of the shooting oracle diverged.
    """


class SweepDivergedError(SolverError):
    """
    The forward/backward sweep oracle failed to contract.
    """


class ModelViolatesA3Error(SolverError):
    """
    A perturbation model broke the containment implied by its declared envelopes.
    """

    def __init__(self, message: str, index: int) -> None:
        self.index = index
        super().__init__(message)


class DomainViolationError(SolverError):
    """
    A trajectory left the domain required by the operation.
    """

    def __init__(self, message: str, index: int, clause: str) -> None:
        self.index = index
        self.clause = clause
        super().__init__(message)


class BallExitError(RGFlowError):
    """
    The homotopy path left the existence ball x_ring + B/2.
    """

    exit_code = 4

    def __init__(self, t: float, index: int, clause: str, ratio: float) -> None:
        self.t = t
        self.index = index
        self.clause = clause
        self.ratio = ratio
        super().__init__(
            f"Homotopy left the existence ball at t={t:.6g}, j={index}, "
            f"clause {clause} (w-ratio {ratio:.6g} > 0.5)"
        )
