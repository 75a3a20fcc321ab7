# src/params/cutoff.py
"""
Omega cut-off time and the chi envelope.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from .sequences import ParamSeq, TailKind
from ..utils.errors import InvalidParametersError

# Relative slack when comparing a geometric ratio with 1/Omega
RATIO_SLACK = 1e-12

# Smallest chi value kept; deeper scales are clipped to stay strictly positive
CHI_FLOOR = np.finfo(float).tiny


@dataclass(frozen=True)
class CutoffData:
    """
    j_omega (None when infinite) together with Omega and sup |beta|.
    """

    j_omega: Optional[int]
    omega: float
    beta_sup: float

    @property
    def is_finite(self) -> bool:
        return self.j_omega is not None

    def chi(self, j: int) -> float:
        """
        chi_j = Omega^{-(j - j_omega)_+}.
        """
        if self.j_omega is None or j <= self.j_omega:
            return 1.0
        return max(self.omega ** (-(j - self.j_omega)), CHI_FLOOR)

    def chi_values(self, count: int) -> np.ndarray:
        """
        chi_j for j = 0 .. count - 1.
        """
        if self.j_omega is None:
            return np.ones(count)
        exponents = np.maximum(np.arange(count) - self.j_omega, 0)
        return np.maximum(np.power(self.omega, -exponents.astype(float)), CHI_FLOOR)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "j_omega": self.j_omega if self.j_omega is not None else "inf",
            "omega": self.omega,
            "beta_sup": self.beta_sup,
        }


def _condition_holds(
    indices: np.ndarray, magnitudes: np.ndarray, bound: float, omega: float, k: int
) -> bool:
    exponents = np.maximum(indices - k, 0).astype(float)
    return bool(np.all(magnitudes <= np.power(omega, -exponents) * bound))


def cutoff_time(params: ParamSeq) -> CutoffData:
    """
    Compute the Omega cut-off time of beta.

    The minimal k with |beta_j| <= Omega^{-(j-k)_+} sup|beta| for all j. The
    prefix is scanned directly; the tail is resolved from its rule.

    Args:
        params: Coefficient sequences

    Returns:
        CutoffData with j_omega = None when no finite k works

    Raises:
        InvalidParametersError: If beta is unbounded
    """
    beta = params.beta
    omega = params.omega
    if not beta.is_bounded:
        raise InvalidParametersError("beta is unbounded; cut-off time undefined")
    bound = beta.sup_abs()
    if bound == 0.0:
        return CutoffData(0, omega, 0.0)

    tail = beta.tail
    indices = np.arange(beta.stored_length)
    magnitudes = np.abs(beta.prefix)

    if not tail.vanishes:
        if tail.kind is TailKind.CONSTANT:
            return CutoffData(None, omega, bound)
        ratio = abs(tail.r)
        if ratio > (1.0 / omega) * (1.0 + RATIO_SLACK):
            return CutoffData(None, omega, bound)
        # Later tail entries decay at least as fast as chi, so the first one decides
        indices = np.append(indices, beta.stored_length)
        magnitudes = np.append(magnitudes, abs(tail.c))

    nonzero = magnitudes > 0.0
    if not np.any(nonzero):
        return CutoffData(0, omega, bound)

    # Closed-form candidate, then exact integer adjustment
    log_omega = math.log(omega)
    needed = indices[nonzero] - np.log(bound / magnitudes[nonzero]) / log_omega
    k = max(0, int(math.ceil(float(np.max(needed)) - 1e-9)))
    while not _condition_holds(indices, magnitudes, bound, omega, k):
        k += 1
    while k > 0 and _condition_holds(indices, magnitudes, bound, omega, k - 1):
        k -= 1
    return CutoffData(k, omega, bound)


def chi(j: int, cutoff: CutoffData) -> float:
    """
    chi_j = Omega^{-(j - j_omega)_+}; 1 for j <= j_omega or j_omega infinite.
    """
    return cutoff.chi(j)


def default_horizon(cutoff: CutoffData, tol: float, floor: int = 1000) -> int:
    """
    max(j_omega + ceil(log(1/tol)/log(Omega)), floor), so chi_J <= tol.
    """
    if not cutoff.is_finite:
        return floor
    extra = int(math.ceil(math.log(1.0 / tol) / math.log(cutoff.omega)))
    return max(cutoff.j_omega + extra, floor)
