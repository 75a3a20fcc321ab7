# src/params/weights.py
"""
Weighted l-infinity norms on trajectories.

The solution space uses the w weights, residuals the v weights:

    w_K = (a - a*) chi g^3      w_g = h g^2 |log g|     w_z = w_mu = h chi g^2 |log g|
    v_K = (a - a*) chi g^3      v_g = v_z = v_mu = h chi g^3

with g the reference sequence g_ring.
"""

import math
from typing import Dict, Literal

import numpy as np

from .cutoff import CutoffData
from ..models.flow_sequence import FlowSequence
from ..utils.errors import InvalidParametersError

Which = Literal["w", "v"]

# Column order of weight arrays
WEIGHT_COLUMNS = ("K", "g", "z", "mu")

# Residual weights are max(v, RESIDUAL_FLOOR * w); only the g column past the cut-off is affected
RESIDUAL_FLOOR = 1e-3


class WeightScheme:
    """
    The w and v weights for parameters (g_ring, a, a*, h) and a cut-off.
    """

    def __init__(
        self,
        gring: np.ndarray,
        cutoff: CutoffData,
        a: float,
        a_star: float,
        h: float,
    ) -> None:
        """
        Initialize the weights.

        Args:
            gring: Reference sequence g_ring_j, j = 0..J (positive, below 1/e at j = 0)
            cutoff: Cut-off data providing chi
            a: K-radius parameter
            a_star: Inner K-radius, 0 < a_star < a
            h: V-radius parameter

        Raises:
            InvalidParametersError: On non-positive parameters or reference values
        """
        gring = np.asarray(gring, dtype=float)
        if gring.ndim != 1 or len(gring) == 0:
            raise InvalidParametersError("gring must be a non-empty 1-D sequence")
        if not np.all(gring > 0.0):
            raise InvalidParametersError("gring must be strictly positive")
        if gring[0] >= math.exp(-1.0):
            raise InvalidParametersError(
                f"gring_0 = {gring[0]} must lie in (0, 1/e) for positive weights"
            )
        if not (a > 0.0 and h > 0.0):
            raise InvalidParametersError(f"a and h must be positive (a={a}, h={h})")
        if not (0.0 < a_star < a):
            raise InvalidParametersError(f"a_star must satisfy 0 < a_star < a (a_star={a_star}, a={a})")

        self.gring = gring
        self.cutoff = cutoff
        self.a = float(a)
        self.a_star = float(a_star)
        self.h = float(h)

        chi = cutoff.chi_values(len(gring))
        cube = gring**3
        square_log = gring**2 * np.abs(np.log(gring))
        k_weight = (self.a - self.a_star) * chi * cube

        self.chi = chi
        self._w = np.column_stack(
            [k_weight, self.h * square_log, self.h * chi * square_log, self.h * chi * square_log]
        )
        self._v = np.column_stack(
            [k_weight, self.h * chi * cube, self.h * chi * cube, self.h * chi * cube]
        )
        for arr in (self.chi, self._w, self._v):
            arr.setflags(write=False)

    @property
    def horizon(self) -> int:
        return len(self.gring) - 1

    def weights(self, which: Which = "w") -> np.ndarray:
        """
        Array (J+1, 4) with columns K, g, z, mu.
        """
        if which == "w":
            return self._w
        if which == "v":
            return self._v
        raise ValueError(f"Unknown weight family: {which!r}")

    def weight(self, which: Which, alpha: str, j: int) -> float:
        return float(self.weights(which)[j, WEIGHT_COLUMNS.index(alpha)])

    def residual_weights(self) -> np.ndarray:
        return np.maximum(self._v, RESIDUAL_FLOOR * self._w)

    def with_parameters(self, **changes: float) -> "WeightScheme":
        """
        Same reference sequence with some of (a, a_star, h) replaced.
        """
        params: Dict[str, float] = {"a": self.a, "a_star": self.a_star, "h": self.h}
        params.update(changes)
        return WeightScheme(self.gring, self.cutoff, **params)

    def to_dict(self) -> Dict[str, float]:
        return {
            "a": self.a,
            "a_star": self.a_star,
            "h": self.h,
            "gring0": float(self.gring[0]),
            "horizon": self.horizon,
        }


def componentwise_ratios(x: FlowSequence, weights: np.ndarray) -> np.ndarray:
    """
    Array (J+1, 4): |x_alpha,j| / weight_alpha,j with the K block in sup norm.
    """
    if weights.shape[0] != x.horizon + 1:
        raise ValueError(
            f"Horizon mismatch: sequence has {x.horizon + 1} entries, weights {weights.shape[0]}"
        )
    k_sup = np.max(np.abs(x.K), axis=1) if x.k_dim else np.zeros(x.horizon + 1)
    magnitudes = np.column_stack([k_sup, np.abs(x.V)])
    return magnitudes / weights


def weighted_norm(x: FlowSequence, scheme: WeightScheme, which: Which = "w") -> float:
    """
    sup over j and alpha of |x_alpha,j| / weight_alpha,j.

    Args:
        x: Trajectory with entries j = 0..J
        scheme: Weight scheme of the same horizon
        which: "w" (solution space) or "v" (residual space)

    Returns:
        The weighted sup norm

    Raises:
        ValueError: On empty input or horizon mismatch
    """
    if x.horizon < 0:
        raise ValueError("weighted_norm of an empty sequence")
    return float(np.max(componentwise_ratios(x, scheme.weights(which))))


def residual_norm(e: FlowSequence, scheme: WeightScheme, skip_first: bool = True) -> float:
    """
    Residual norm: v weights floored at RESIDUAL_FLOOR * w; entry 0 skipped by default.
    """
    ratios = componentwise_ratios(e, scheme.residual_weights())
    if skip_first:
        ratios = ratios[1:]
    return float(np.max(ratios)) if ratios.size else 0.0


def expand_weights(weights: np.ndarray, width: int) -> np.ndarray:
    """
    Per-coordinate weights (n, width + 3) from (n, 4): the K weight repeats over the block.
    """
    return np.hstack([np.repeat(weights[:, :1], width, axis=1), weights[:, 1:]])
