# src/linear/s0.py
"""
The solution operator S0 of the frozen linear problem

    y_{j+1} - L_j y_j = r_j,   pi_u y_0 = 0,   pi_v y_J = 0.

u = (K, g) is computed forward, v = (z, mu) backward from the horizon.
Residual-shaped inputs are indexed by target: entry j + 1 holds r_j.
"""

import math
from typing import Optional

import numpy as np

from .blocks import BlockMatrices
from ..models.flow_sequence import FlowSequence
from ..quadratic.tails import TailEnvelope, scaled
from ..utils.errors import ExtendHorizonError


def apply_S0(
    r: FlowSequence, blocks: BlockMatrices, tol: Optional[float] = None
) -> FlowSequence:
    """
    Solve the frozen linear boundary-value problem for the forcing r.

    Args:
        r: Target-indexed forcing on the horizon of the blocks
        blocks: Frozen linearization
        tol: When given, the truncation bound must not exceed it

    Returns:
        The solution y with y_0 u-part zero and y_J v-part zero

    Raises:
        ValueError: On a horizon mismatch
        ExtendHorizonError: If the truncation bound exceeds tol
    """
    horizon = blocks.horizon
    if r.horizon != horizon:
        raise ValueError(f"Horizon mismatch: forcing {r.horizon}, blocks {horizon}")

    # pi_K A = 0, so K_{j+1} is the K forcing
    K = np.zeros_like(r.K)
    K[1:] = r.K[1:]

    a = blocks.a.tolist()
    r_g, r_z, r_mu = r.g.tolist(), r.z.tolist(), r.mu.tolist()
    g = [0.0] * (horizon + 1)
    for j in range(horizon):
        g[j + 1] = a[j] * g[j] + r_g[j + 1]

    b_z, b_mu = blocks.B[:, 0].tolist(), blocks.B[:, 1].tolist()
    c_zz = blocks.C[:, 0, 0].tolist()
    c_mz, c_mm = blocks.C[:, 1, 0].tolist(), blocks.C[:, 1, 1].tolist()
    z = [0.0] * (horizon + 1)
    mu = [0.0] * (horizon + 1)
    for j in range(horizon - 1, -1, -1):
        z[j] = (z[j + 1] - b_z[j] * g[j] - r_z[j + 1]) / c_zz[j]
        mu[j] = (mu[j + 1] - b_mu[j] * g[j] - c_mz[j] * z[j] - r_mu[j + 1]) / c_mm[j]

    y = FlowSequence(K, np.column_stack([g, z, mu]))
    if tol is not None:
        bound = s0_tail_bound(y, blocks)
        if not bound <= tol:
            raise ExtendHorizonError(
                f"S0 truncation bound {bound:.3g} exceeds tol {tol:.3g} at horizon {horizon}",
                bound,
            )
    return y


def s0_tail_bound(y: FlowSequence, blocks: BlockMatrices) -> float:
    """
    Bound on the v-part that pinning v_J = 0 discards.

    Beyond the horizon the forcing vanishes and g evolves by the A products,
    |g_l| <= |g_J| (g-ring_l / g-ring_J)^2. The discarded z_J and mu_J are the
    backward sums of B_l u_l, bounded with the tail envelope of the coefficients.
    """
    horizon = blocks.horizon
    params = blocks.params
    g_ring = float(blocks.xring.g[horizon])
    g_end = abs(float(y.g[horizon]))
    if g_end == 0.0:
        return 0.0

    tail = TailEnvelope(params, horizon, g_ring)
    if not math.isfinite(tail.g_up):
        return math.inf
    ref = blocks.reference_tail

    # z: sum over l >= J of |xi_l| |g_l| against the zeta products
    z_sources = 2.0 * tail.weighted_sum(params.theta, 3) + scaled(
        tail.weighted_sum(params.zeta, 2), ref
    )
    z_bound = scaled(g_end / g_ring**2 * z_sources, tail.growth(params.zeta))

    # mu: geometric sum with the tail contraction rate
    g_growth = (tail.g_up / g_ring) ** 2
    lam_inf = params.lam.infimum(horizon)
    denominator = (
        lam_inf
        - scaled(tail.sup(params.ups_gmu), tail.g_up)
        - scaled(tail.sup(params.ups_zmu), ref)
    )
    if not denominator > 1.0:
        return math.inf
    alpha_tail = 1.0 / denominator
    gamma_sup = (
        tail.sup(params.gamma)
        + tail.sup(params.ups_gz) * tail.g_up
        + scaled(2.0 * tail.sup(params.ups_zz) + tail.sup(params.ups_zmu), ref)
    )
    eta_sup = (
        tail.sup(params.eta)
        + 2.0 * tail.sup(params.ups_gg) * tail.g_up
        + scaled(tail.sup(params.ups_gz) + tail.sup(params.ups_gmu), ref)
    )
    mu_sources = scaled(gamma_sup, z_bound) + eta_sup * g_end * g_growth
    mu_bound = alpha_tail / (1.0 - alpha_tail) * mu_sources
    return float(max(z_bound, mu_bound))


def s0_equation_residual(y: FlowSequence, r: FlowSequence, blocks: BlockMatrices) -> np.ndarray:
    """
    Per-j relative residual |y_{j+1} - L_j y_j - r_j| / max(|y_{j+1}|, |L_j y_j|, |r_j|, tiny).
    """
    Ly = blocks.apply(y)
    lhs = y.stacked()[1:]
    rhs = Ly.stacked()[1:] + r.stacked()[1:]
    scale = np.maximum.reduce(
        [np.abs(lhs), np.abs(Ly.stacked()[1:]), np.abs(r.stacked()[1:])]
    )
    scale = np.maximum(np.max(scale, axis=1), np.finfo(float).tiny)
    return np.max(np.abs(lhs - rhs), axis=1) / scale
