# src/linear/banded_oracle.py
"""
Direct solve of the truncated linear boundary-value problem

    y_{j+1} - M_j y_j = r_j  (j < J),   pi_u y_0 = 0,   pi_v y_J = 0

assembled as one banded system. Used as an independent oracle for S0 and S
on short horizons.

Unknowns are ordered y_0, y_1, ..., y_J with coordinates [K..., g, z, mu].
Rows: the width + 1 conditions pi_u y_0 = 0, then the J * n equations, then
the two conditions pi_v y_J = 0.
"""

from typing import Optional, Tuple

import numpy as np
from scipy.linalg import solve, solve_banded

from .blocks import BlockMatrices
from .w_operator import WOperator
from ..models.flow_sequence import FlowSequence


def bandwidths(width: int) -> Tuple[int, int]:
    """
    (lower, upper) bandwidths of the assembled system.
    """
    n = width + 3
    return width + n, 2


def _assemble(jacobians: np.ndarray, r: FlowSequence) -> Tuple[list, np.ndarray]:
    horizon = r.horizon
    n = jacobians.shape[1]
    width = n - 3
    entries = []
    rhs = np.zeros((horizon + 1) * n)

    for i in range(width + 1):
        entries.append((i, i, 1.0))
    forcing = r.stacked()
    offset = width + 1
    for j in range(horizon):
        for i in range(n):
            row = offset + j * n + i
            entries.append((row, (j + 1) * n + i, 1.0))
            for p in range(n):
                value = -jacobians[j, i, p]
                if value != 0.0:
                    entries.append((row, j * n + p, value))
            rhs[row] = forcing[j + 1, i]
    last = offset + horizon * n
    for m in range(2):
        entries.append((last + m, horizon * n + width + 1 + m, 1.0))
    return entries, rhs


def solve_linear_bvp(
    jacobians: np.ndarray, r: FlowSequence, dense: bool = False
) -> FlowSequence:
    """
    Solve the truncated problem for per-scale matrices M_j.

    Args:
        jacobians: Array (J, n, n) of M_j, j = 0..J-1
        r: Target-indexed forcing on horizon J
        dense: Solve the full matrix instead of the band

    Returns:
        The solution trajectory
    """
    horizon = r.horizon
    n = r.k_dim + 3
    if jacobians.shape != (horizon, n, n):
        raise ValueError(f"Expected jacobians of shape {(horizon, n, n)}, got {jacobians.shape}")
    entries, rhs = _assemble(jacobians, r)
    size = (horizon + 1) * n

    if dense:
        matrix = np.zeros((size, size))
        for row, col, value in entries:
            matrix[row, col] += value
        solution = solve(matrix, rhs)
    else:
        lower, upper = bandwidths(r.k_dim)
        ab = np.zeros((lower + upper + 1, size))
        for row, col, value in entries:
            ab[upper + row - col, col] += value
        solution = solve_banded((lower, upper), ab, rhs)
    return FlowSequence.from_flat(solution, horizon, r.k_dim)


def solve_frozen(
    r: FlowSequence, blocks: BlockMatrices, W: Optional[WOperator] = None, dense: bool = False
) -> FlowSequence:
    """
    Oracle for S0 r (W omitted) or S(t, x) r.
    """
    jacobians = blocks.dense()[:-1] if W is None else W.full_jacobians(blocks)
    return solve_linear_bvp(jacobians, r, dense)
