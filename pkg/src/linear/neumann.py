# src/linear/neumann.py
"""
S(t, x) = (1 - S0 W)^{-1} S0 by fixed-point iteration y <- S0(W y) + S0 r.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .blocks import BlockMatrices
from .s0 import apply_S0, s0_tail_bound
from .w_operator import WOperator
from ..models.flow_sequence import FlowSequence
from ..params.weights import WeightScheme, componentwise_ratios, weighted_norm
from ..utils.errors import NonContractionError
from ..utils.logging import logger

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 200

# Increments growing by this factor over the first one mean divergence
DIVERGENCE_FACTOR = 1e6


@dataclass
class SolveReport:
    """
    Diagnostics of one apply_S call.
    """

    iterations: int
    residual: float
    contraction: float
    tail_bound: float
    per_j_residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    increments: List[float] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.contraction < 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "iterations": self.iterations,
            "residual": self.residual,
            "contraction": self.contraction,
            "tail_bound": self.tail_bound if math.isfinite(self.tail_bound) else "inf",
            "increments": list(self.increments),
        }


def measured_contraction(increments: List[float]) -> float:
    """
    Geometric mean of successive increment ratios (0 for fewer than two nonzero increments).
    """
    ratios = [
        b / a for a, b in zip(increments, increments[1:]) if a > 0.0 and b > 0.0
    ]
    if not ratios:
        return 0.0
    return float(math.exp(sum(math.log(r) for r in ratios) / len(ratios)))


def linear_residual(
    y: FlowSequence,
    r: FlowSequence,
    blocks: BlockMatrices,
    W: WOperator,
    scheme: WeightScheme,
) -> np.ndarray:
    """
    Per-j residual-weighted size of y_{j+1} - D_x Phi_j y_j - r_j, j = 0..J-1.
    """
    e = y - blocks.apply(y) - W.apply(y) - r
    ratios = componentwise_ratios(e, scheme.residual_weights())
    return np.max(ratios[1:], axis=1)


def apply_S(
    t: float,
    x: FlowSequence,
    r: FlowSequence,
    blocks: BlockMatrices,
    W: WOperator,
    scheme: WeightScheme,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    initial: Optional[FlowSequence] = None,
) -> Tuple[FlowSequence, SolveReport]:
    """
    Solve y_{j+1} - D_x Phi_j(t, x_j) y_j = r_j with the truncated boundary conditions.

    Args:
        t: Homotopy time (recorded only; W is already built at t)
        x: Trajectory W was built at
        r: Target-indexed forcing
        blocks: Frozen linearization
        W: Correction at (t, x)
        scheme: Weights; increments are measured in the w-norm
        tol: Stop when the w-norm increment drops below tol
        max_iter: Iteration cap
        initial: Starting guess (default S0 r)

    Returns:
        (y, SolveReport)

    Raises:
        NonContractionError: On divergence or no convergence within max_iter
    """
    if x.horizon != blocks.horizon or r.horizon != blocks.horizon:
        raise ValueError("x, r and blocks must share one horizon")
    s0r = apply_S0(r, blocks)
    y = s0r if initial is None else initial
    increments: List[float] = []
    iterations = 0

    if W.is_zero:
        iterations = 1
        increments.append(weighted_norm(y - s0r, scheme, "w"))
        y = s0r
    else:
        while True:
            y_next = s0r + apply_S0(W.apply(y), blocks)
            increment = weighted_norm(y_next - y, scheme, "w")
            iterations += 1
            increments.append(increment)
            y = y_next
            if increment <= tol:
                break
            if not math.isfinite(increment) or (
                increments[0] > 0.0 and increment > DIVERGENCE_FACTOR * increments[0]
            ):
                contraction = measured_contraction(increments)
                raise NonContractionError(
                    f"Fixed-point iteration for S diverges at t={t:.6g} "
                    f"(increment {increment:.3g}, contraction {contraction:.3g})",
                    contraction,
                )
            if iterations >= max_iter:
                contraction = measured_contraction(increments)
                raise NonContractionError(
                    f"Fixed-point iteration for S did not reach tol {tol:.3g} in {max_iter} "
                    f"iterations at t={t:.6g} (contraction {contraction:.3g}); "
                    "check the model envelopes and g0",
                    contraction,
                )

    per_j = linear_residual(y, r, blocks, W, scheme)
    report = SolveReport(
        iterations=iterations,
        residual=float(np.max(per_j)) if per_j.size else 0.0,
        contraction=measured_contraction(increments),
        tail_bound=s0_tail_bound(y, blocks),
        per_j_residuals=per_j,
        increments=increments,
    )
    logger.debug(
        f"apply_S t={t:.4g}: {iterations} iterations, residual {report.residual:.3g}, "
        f"contraction {report.contraction:.3g}"
    )
    return y, report
