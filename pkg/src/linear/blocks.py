# src/linear/blocks.py
"""
Frozen linearization L_j = D phi_bar_j at the reference trajectory x-ring.

With u = (K, g) and v = (z, mu), L_j splits into

    A_j: u -> u   only the (g, g) entry 1 - 2 beta_j g_j is nonzero
    B_j: u -> v   the g column (-xi_j, eta_j); the K column is zero
    C_j: v -> v   [[1 - zeta_j g_j, 0], [gamma_j, lambda_j]]

where eta, gamma, lambda and xi are the tilde coefficients evaluated at x-ring.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from ..models.flow_sequence import FlowSequence
from ..params.sequences import ParamSeq
from ..quadratic.flow import quadratic_jacobian
from ..utils.errors import ExpansivityViolatedError, GateError


@dataclass(frozen=True)
class BlockMatrices:
    """
    Per-scale blocks A_j, B_j, C_j for j = 0..J.
    """

    a: np.ndarray
    B: np.ndarray
    C: np.ndarray
    width: int
    alpha: float
    xring: FlowSequence
    params: ParamSeq
    reference_tail: float

    @property
    def horizon(self) -> int:
        return len(self.a) - 1

    @property
    def n(self) -> int:
        """Coordinates per scale: the padded K block plus (g, z, mu)."""
        return self.width + 3

    @property
    def xi_ring(self) -> np.ndarray:
        return -self.B[:, 0]

    @property
    def eta_ring(self) -> np.ndarray:
        return self.B[:, 1]

    @property
    def gamma_ring(self) -> np.ndarray:
        return self.C[:, 1, 0]

    @property
    def lambda_ring(self) -> np.ndarray:
        return self.C[:, 1, 1]

    def dense(self) -> np.ndarray:
        """
        L_j as full matrices, shape (J+1, n, n), coordinates [K..., g, z, mu].
        """
        w = self.width
        L = np.zeros((self.horizon + 1, self.n, self.n))
        L[:, w, w] = self.a
        L[:, w + 1 :, w] = self.B
        L[:, w + 1 :, w + 1 :] = self.C
        return L

    def apply(self, y: FlowSequence) -> FlowSequence:
        """
        L y indexed by target: entry j + 1 holds L_j y_j, entry 0 is zero.
        """
        g, z, mu = y.g[:-1], y.z[:-1], y.mu[:-1]
        a, B, C = self.a[:-1], self.B[:-1], self.C[:-1]
        V = np.zeros_like(y.V)
        V[1:, 0] = a * g
        V[1:, 1] = B[:, 0] * g + C[:, 0, 0] * z
        V[1:, 2] = B[:, 1] * g + C[:, 1, 0] * z + C[:, 1, 1] * mu
        return FlowSequence(np.zeros_like(y.K), V)

    def a_product(self, l: int, j: int) -> float:
        """
        A_j ... A_l restricted to the g entry (1 when j < l).
        """
        if j < l:
            return 1.0
        return float(np.prod(self.a[l : j + 1]))

    def c_inverse_product(self, j: int, l: int) -> np.ndarray:
        """
        C_j^{-1} C_{j+1}^{-1} ... C_l^{-1} (identity when l < j).
        """
        product = np.eye(2)
        for i in range(j, l + 1):
            product = product @ np.linalg.inv(self.C[i])
        return product

    def to_dict(self) -> Dict[str, Any]:
        return {
            "horizon": self.horizon,
            "width": self.width,
            "alpha": self.alpha,
            "min_lambda_ring": float(np.min(self.lambda_ring)),
            "max_abs_xi_ring": float(np.max(np.abs(self.xi_ring))),
            "max_abs_eta_ring": float(np.max(np.abs(self.eta_ring))),
            "reference_tail": self.reference_tail,
        }


def build_L(
    xring: FlowSequence,
    params: ParamSeq,
    reference_tail: Optional[float] = None,
) -> BlockMatrices:
    """
    Freeze the quadratic Jacobian at x-ring.

    Args:
        xring: Reference trajectory (normally x-bar)
        params: Coefficient sequences
        reference_tail: Bound on |z-ring_j|, |mu-ring_j| beyond the horizon
            (default: their values at the horizon)

    Returns:
        BlockMatrices on the horizon of xring

    Raises:
        GateError: If some 1 - zeta_j g_j <= 0
        ExpansivityViolatedError: If some lambda-ring_j <= 1 (alpha >= 1)
    """
    horizon = xring.horizon
    jac = quadratic_jacobian(xring.V, params.table(horizon + 1))

    zz = jac[:, 1, 1]
    if np.any(zz <= 0.0):
        index = int(np.nonzero(zz <= 0.0)[0][0])
        raise GateError(f"1 - zeta_j g_j <= 0 at j={index}; C_j is not invertible")
    lam = jac[:, 2, 2]
    if np.any(lam <= 1.0):
        index = int(np.nonzero(lam <= 1.0)[0][0])
        raise ExpansivityViolatedError(
            f"lambda-ring_{index} = {lam[index]:.6g} <= 1; the mu block is not expansive",
            index,
        )

    if reference_tail is None:
        reference_tail = float(max(abs(xring.z[-1]), abs(xring.mu[-1])))
    return BlockMatrices(
        a=jac[:, 0, 0].copy(),
        B=jac[:, 1:, 0].copy(),
        C=jac[:, 1:, 1:].copy(),
        width=xring.k_dim,
        alpha=float(np.max(1.0 / lam)),
        xring=xring,
        params=params,
        reference_tail=float(reference_tail) if math.isfinite(reference_tail) else math.inf,
    )
