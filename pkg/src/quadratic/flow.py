# src/quadratic/flow.py
"""
The quadratic map phi_bar_j on V = (g, z, mu) and its Jacobian.

    g'  = g - beta g^2
    z'  = z - theta g^2 - zeta g z
    mu' = eta g + gamma z + lam mu
          - (ups_gg g^2 + ups_gz g z + ups_gmu g mu + ups_zz z^2 + ups_zmu z mu)
"""

import numpy as np

from ..models.flow_sequence import VTriple
from ..params.sequences import CoefficientTable, StepCoefficients


def quadratic_step(v: VTriple, c: StepCoefficients) -> VTriple:
    """
    Apply phi_bar_j to a single state.

    Args:
        v: State (g, z, mu) at scale j
        c: Coefficients at scale j

    Returns:
        The state at scale j + 1
    """
    g, z, mu = v.g, v.z, v.mu
    quadratic_mu = (
        c.ups_gg * g * g
        + c.ups_gz * g * z
        + c.ups_gmu * g * mu
        + c.ups_zz * z * z
        + c.ups_zmu * z * mu
    )
    return VTriple(
        g - c.beta * g * g,
        z - c.theta * g * g - c.zeta * g * z,
        c.eta * g + c.gamma * z + c.lam * mu - quadratic_mu,
    )


def quadratic_map(V: np.ndarray, table: CoefficientTable) -> np.ndarray:
    """
    Vectorized phi_bar: row j of V (shape (n, 3)) is mapped with coefficients j.
    """
    g, z, mu = V[:, 0], V[:, 1], V[:, 2]
    quadratic_mu = (
        table.ups_gg * g * g
        + table.ups_gz * g * z
        + table.ups_gmu * g * mu
        + table.ups_zz * z * z
        + table.ups_zmu * z * mu
    )
    return np.column_stack(
        [
            g - table.beta * g * g,
            z - table.theta * g * g - table.zeta * g * z,
            table.eta * g + table.gamma * z + table.lam * mu - quadratic_mu,
        ]
    )


def quadratic_jacobian(V: np.ndarray, table: CoefficientTable) -> np.ndarray:
    """
    Jacobians D phi_bar_j(V_j), shape (n, 3, 3), rows and columns ordered (g, z, mu).

    The mu row holds (eta_tilde, gamma_tilde, lambda_tilde) and the z row
    (-xi_tilde, 1 - zeta g, 0).
    """
    g, z, mu = V[:, 0], V[:, 1], V[:, 2]
    jac = np.zeros((len(V), 3, 3))
    jac[:, 0, 0] = 1.0 - 2.0 * table.beta * g
    jac[:, 1, 0] = -(2.0 * table.theta * g + table.zeta * z)
    jac[:, 1, 1] = 1.0 - table.zeta * g
    jac[:, 2, 0] = table.eta - 2.0 * table.ups_gg * g - table.ups_gz * z - table.ups_gmu * mu
    jac[:, 2, 1] = table.gamma - table.ups_gz * g - 2.0 * table.ups_zz * z - table.ups_zmu * mu
    jac[:, 2, 2] = table.lam - table.ups_gmu * g - table.ups_zmu * z
    return jac
