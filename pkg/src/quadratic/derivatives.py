# src/quadratic/derivatives.py
"""
First and second derivatives of V-bar in g0.

The backward recursions are differentiated with the quotient rule, so the
derivatives inherit the truncation and boundary value of the solution itself.
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from .bvp import QuadraticSolution
from ..params.sequences import ParamSeq, TailKind


@dataclass(frozen=True)
class DerivativeBundle:
    """
    d/dg0 and d^2/dg0^2 of gbar, zbar and mubar on j = 0..J.
    """

    dg: np.ndarray
    dz: np.ndarray
    dmu: np.ndarray
    d2g: np.ndarray
    d2z: np.ndarray
    d2mu: np.ndarray

    def envelope_constants(self, sol: QuadraticSolution) -> Dict[str, float]:
        """
        Fitted constants of the derivative envelopes.

        gbar: max |dg_j (g0/gbar_j)^2 - 1| / g0.
        z, mu: sup_j |d_j| g0^2 / (chi_j gbar_j^2).
        """
        g0 = sol.g0
        scale = sol.chi * sol.gbar**2 / g0**2
        gbar_ratio = self.dg * (g0 / sol.gbar) ** 2
        return {
            "gbar": float(np.max(np.abs(gbar_ratio - 1.0)) / g0),
            "z": float(np.max(np.abs(self.dz) / scale)),
            "mu": float(np.max(np.abs(self.dmu) / scale)),
        }


def _closed_form_slope(sol: QuadraticSolution, params: ParamSeq) -> float:
    # z boundary = (c/b) gbar_{J+1} when the closed-form tail was used
    if sol.z_boundary == 0.0:
        return 0.0
    beta_tail, theta_tail = params.beta.tail, params.theta.tail
    if beta_tail.kind is TailKind.CONSTANT and theta_tail.kind is TailKind.CONSTANT:
        return theta_tail.c / beta_tail.c
    return 0.0


def gbar_derivatives(sol: QuadraticSolution, params: ParamSeq) -> DerivativeBundle:
    """
    Derivatives of the quadratic solution with respect to g0.

    Args:
        sol: Quadratic solution on j = 0..J
        params: The coefficient sequences it was solved with

    Returns:
        DerivativeBundle on the same horizon
    """
    horizon = sol.horizon
    table = params.table(horizon + 1)
    gbar = sol.gbar
    beta = table.beta

    # Forward: g'_{j+1} = g'_j (1 - 2 beta g_j), g''_{j+1} = g''_j (1 - 2 beta g_j) - 2 beta g'_j^2
    dg = np.empty(horizon + 2)
    d2g = np.empty(horizon + 2)
    dg[0], d2g[0] = 1.0, 0.0
    factors = 1.0 - 2.0 * beta * gbar
    for j in range(horizon + 1):
        dg[j + 1] = dg[j] * factors[j]
        d2g[j + 1] = d2g[j] * factors[j] - 2.0 * beta[j] * dg[j] ** 2

    slope = _closed_form_slope(sol, params)
    dz_next, d2z_next = slope * dg[-1], slope * d2g[-1]
    dmu_next, d2mu_next = 0.0, 0.0

    dz = np.empty(horizon + 1)
    d2z = np.empty(horizon + 1)
    dmu = np.empty(horizon + 1)
    d2mu = np.empty(horizon + 1)
    zbar, mubar = sol.zbar, sol.mubar

    for j in range(horizon, -1, -1):
        g, g1, g2 = gbar[j], dg[j], d2g[j]
        z = zbar[j]

        D = 1.0 - table.zeta[j] * g
        D1 = -table.zeta[j] * g1
        D2 = -table.zeta[j] * g2
        N1 = dz_next + 2.0 * table.theta[j] * g * g1
        N2 = d2z_next + 2.0 * table.theta[j] * (g1 * g1 + g * g2)
        z1 = (N1 - z * D1) / D
        z2 = (N2 - 2.0 * z1 * D1 - z * D2) / D

        ups_gg, ups_gz, ups_zz = table.ups_gg[j], table.ups_gz[j], table.ups_zz[j]
        sigma1 = (
            table.eta[j] * g1
            + table.gamma[j] * z1
            - 2.0 * ups_gg * g * g1
            - ups_gz * (g1 * z + g * z1)
            - 2.0 * ups_zz * z * z1
        )
        sigma2 = (
            table.eta[j] * g2
            + table.gamma[j] * z2
            - 2.0 * ups_gg * (g1 * g1 + g * g2)
            - ups_gz * (g2 * z + 2.0 * g1 * z1 + g * z2)
            - 2.0 * ups_zz * (z1 * z1 + z * z2)
        )
        E = table.lam[j] - sol.tau[j]
        E1 = -(table.ups_gmu[j] * g1 + table.ups_zmu[j] * z1)
        E2 = -(table.ups_gmu[j] * g2 + table.ups_zmu[j] * z2)
        mu = mubar[j]
        mu1 = (dmu_next - sigma1 - mu * E1) / E
        mu2 = (d2mu_next - sigma2 - 2.0 * mu1 * E1 - mu * E2) / E

        dz[j], d2z[j], dmu[j], d2mu[j] = z1, z2, mu1, mu2
        dz_next, d2z_next, dmu_next, d2mu_next = z1, z2, mu1, mu2

    return DerivativeBundle(
        dg=dg[:-1],
        dz=dz,
        dmu=dmu,
        d2g=d2g[:-1],
        d2z=d2z,
        d2mu=d2mu,
    )
