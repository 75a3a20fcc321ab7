# src/linear/w_operator.py
"""
The correction W(t, x) = D_x Phi(t, x) - L:

    W_j y_j = [D phi_bar_j(V_j) - D phi_bar_j(V-ring_j)] y_j + D(psi_j, t rho_j)(x_j) y_j
"""

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from .blocks import BlockMatrices
from ..models.base import PerturbationModel
from ..models.domain import DOMAIN_CLAUSES
from ..models.flow_sequence import FlowSequence
from ..params.sequences import ParamSeq
from ..params.weights import WeightScheme, componentwise_ratios, expand_weights
from ..quadratic.flow import quadratic_jacobian
from ..utils.errors import DomainViolationError

# Radius of the ball around x-ring on which W is built, in the w-norm
BALL_RADIUS = 0.5


@dataclass(frozen=True)
class WOperator:
    """
    Per-scale matrices W_j(t, x_j), shape (J, n, n), j = 0..J-1.
    """

    t: float
    x: FlowSequence
    matrices: np.ndarray

    @property
    def horizon(self) -> int:
        return self.x.horizon

    @property
    def width(self) -> int:
        return self.x.k_dim

    @property
    def is_zero(self) -> bool:
        return not np.any(self.matrices)

    def apply(self, y: FlowSequence) -> FlowSequence:
        """
        W y indexed by target: entry j + 1 holds W_j y_j, entry 0 is zero.
        """
        out = np.zeros_like(y.stacked())
        out[1:] = np.einsum("jab,jb->ja", self.matrices, y.stacked()[:-1])
        return FlowSequence.from_stacked(out, self.width)

    def full_jacobians(self, blocks: BlockMatrices) -> np.ndarray:
        """
        D_x Phi_j(t, x_j) = L_j + W_j, shape (J, n, n).
        """
        return blocks.dense()[:-1] + self.matrices

    def block_norms(self, scheme: WeightScheme) -> Dict[str, float]:
        """
        sup_j of the weighted block norms of W_j from X^w into the residual space.

        Blocks are KK, KV, VK and VV; each entry (a, b) is scaled by
        w_b,j / v_a,j+1 and the norm is the largest row sum.
        """
        width = self.width
        w_in = expand_weights(scheme.weights("w")[:-1], width)
        v_out = expand_weights(scheme.residual_weights()[1:], width)
        scaled = np.abs(self.matrices) * w_in[:, None, :] / v_out[:, :, None]
        groups = {"K": slice(0, width), "V": slice(width, width + 3)}
        norms = {}
        for rows_name, rows in groups.items():
            for cols_name, cols in groups.items():
                block = scaled[:, rows, cols]
                value = float(np.max(np.sum(block, axis=2))) if block.size else 0.0
                norms[f"{rows_name}{cols_name}"] = value
        return norms


def check_ball(
    x: FlowSequence,
    xring: FlowSequence,
    scheme: WeightScheme,
    radius: float = BALL_RADIUS,
) -> np.ndarray:
    """
    Componentwise w-ratios of x - x-ring.

    Raises:
        DomainViolationError: At the first (j, clause) with ratio above radius
    """
    ratios = componentwise_ratios(x - xring, scheme.weights("w"))
    bad = np.argwhere(ratios > radius)
    if len(bad):
        j, column = (int(v) for v in bad[0])
        raise DomainViolationError(
            f"x leaves x-ring + {radius}B at j={j} ({DOMAIN_CLAUSES[column]} ratio "
            f"{ratios[j, column]:.4g})",
            j,
            DOMAIN_CLAUSES[column],
        )
    return ratios


def build_W(
    t: float,
    x: FlowSequence,
    model: PerturbationModel,
    params: ParamSeq,
    xring: FlowSequence,
    scheme: Optional[WeightScheme] = None,
) -> WOperator:
    """
    Assemble W(t, x) on the horizon of x.

    Args:
        t: Homotopy time
        x: Current trajectory
        model: Perturbation model (analytic Jacobians when available)
        params: Coefficient sequences
        xring: Reference trajectory of the frozen linearization
        scheme: When given, x must lie in x-ring + B/2 in the w-norm

    Returns:
        WOperator

    Raises:
        DomainViolationError: If x leaves the ball
    """
    if scheme is not None:
        check_ball(x, xring, scheme)
    horizon = x.horizon
    width = x.k_dim
    K, V = x.K[:-1], x.V[:-1]

    table = params.table(horizon)
    W = model.jacobians(K, V, 0).copy()
    W[:, width:, :] *= t
    W[:, width:, width:] += quadratic_jacobian(V, table) - quadratic_jacobian(
        xring.V[:-1], table
    )
    return WOperator(float(t), x, W)
