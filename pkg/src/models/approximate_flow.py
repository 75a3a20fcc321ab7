# src/models/approximate_flow.py
"""
The approximate flow x-bar = (K-bar, V-bar) and the evolution maps
Phi^t_j = (psi_j, phi_bar_j + t rho_j).
"""

import math
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .base import PerturbationModel
from .domain import DomainSpec
from .flow_sequence import FlowSequence, VTriple
from ..params.sequences import ParamSeq
from ..params.weights import WeightScheme, weighted_norm
from ..quadratic.bvp import QuadraticSolution, solve_quadratic_bvp
from ..quadratic.flow import quadratic_map, quadratic_step
from ..utils.errors import ModelViolatesA3Error
from ..utils.logging import logger

# Relative slack on the K-bar containment certificate
CONTAINMENT_SLACK = 1e-12


def pad_k0(K0: np.ndarray, width: int) -> np.ndarray:
    K0 = np.atleast_1d(np.asarray(K0, dtype=float))
    if len(K0) > width:
        raise ValueError(f"K0 has {len(K0)} coordinates, the model allows {width}")
    out = np.zeros(width)
    out[: len(K0)] = K0
    return out


def kbar_iterate(
    K0: np.ndarray,
    vbar: QuadraticSolution,
    model: PerturbationModel,
    dom: DomainSpec,
) -> np.ndarray:
    """
    K-bar_{j+1} = psi_j(K-bar_j, V-bar_j) with the containment certificate.

    Args:
        K0: Initial K block
        vbar: Quadratic solution providing V-bar
        model: Perturbation model
        dom: Domain; its a_star is the containment radius

    Returns:
        Array (J+1, width) of K-bar

    Raises:
        ModelViolatesA3Error: If ||K-bar_j|| > a_star chi_j gbar_j^3 for some j
    """
    horizon = vbar.horizon
    width = model.k_dims.width(horizon)
    K = np.zeros((horizon + 1, width))
    K[0] = pad_k0(K0, width)
    V = vbar.vbar
    for j in range(horizon + 1):
        bound = dom.k_envelope(j, inner=True)
        norm = float(np.max(np.abs(K[j])))
        if norm > bound * (1.0 + CONTAINMENT_SLACK):
            raise ModelViolatesA3Error(
                f"K-bar containment fails at j={j}: ||K||={norm:.6g} > a* chi g^3 = {bound:.6g}",
                j,
            )
        if j < horizon:
            K[j + 1] = model.psi_all(K[j : j + 1], V[j : j + 1], j)[0]
    return K


def kbar_ratios(K: np.ndarray, vbar: QuadraticSolution) -> np.ndarray:
    """
    ||K-bar_j|| / (chi_j gbar_j^3) per j.
    """
    return np.max(np.abs(K), axis=1) / (vbar.chi * vbar.gbar**3)


def xbar_assemble(
    K0: np.ndarray,
    g0: float,
    params: ParamSeq,
    model: PerturbationModel,
    a: float = 1.0,
    a_star: float = 0.5,
    h: float = 1.0,
    solution: Optional[QuadraticSolution] = None,
    **solve_kwargs: Any,
) -> FlowSequence:
    """
    Assemble x-bar = (K-bar, V-bar), the t = 0 point of the homotopy.

    The model is bound to the cut-off of the quadratic solution before K-bar is iterated.

    Args:
        K0: Initial K block
        g0: Initial coupling
        params: Coefficient sequences
        model: Perturbation model
        a, a_star, h: Domain parameters
        solution: Precomputed quadratic solution for g0 (solved when omitted)
        **solve_kwargs: Forwarded to solve_quadratic_bvp

    Returns:
        FlowSequence on the horizon of the quadratic solution
    """
    if solution is None:
        solution = solve_quadratic_bvp(g0, params, **solve_kwargs)
    model = model.with_cutoff(solution.cutoff)
    kappa, R = model.envelope.kappa, model.envelope.R
    lower = R / (1.0 - kappa * params.omega) if kappa * params.omega < 1.0 else math.inf
    if not lower < a_star:
        logger.warning(
            f"⚠️ a_star={a_star} is not above R/(1 - kappa Omega) = {lower:.6g}; "
            "K-bar containment is not guaranteed"
        )
    dom = DomainSpec(solution, a, h, a_star)
    K = kbar_iterate(K0, solution, model, dom)
    return FlowSequence(K, solution.vbar)


def phi_step(
    t: float,
    x_j: Tuple[np.ndarray, VTriple],
    j: int,
    params: ParamSeq,
    model: PerturbationModel,
) -> Tuple[np.ndarray, VTriple]:
    """
    Phi^t_j(x_j) = (psi_j(x_j), phi_bar_j(V_j) + t rho_j(x_j)).
    """
    K, V = x_j
    K = np.atleast_1d(np.asarray(K, dtype=float))
    v_array = V.as_array()
    K_next = model.psi_all(K[None, :], v_array[None, :], j)[0]
    rho = model.rho_all(K[None, :], v_array[None, :], j)[0]
    base = quadratic_step(V, params.at(j))
    return K_next, VTriple(base.g + t * rho[0], base.z + t * rho[1], base.mu + t * rho[2])


def phi_all(
    t: float, x: FlowSequence, params: ParamSeq, model: PerturbationModel
) -> FlowSequence:
    """
    Images Phi^t_j(x_j) indexed by target: entry j + 1 holds Phi^t_j(x_j), entry 0 is x_0.
    """
    horizon = x.horizon
    K, V = x.K[:-1], x.V[:-1]
    images_K = model.psi_all(K, V, 0)
    images_V = quadratic_map(V, params.table(horizon)) + t * model.rho_all(K, V, 0)
    return FlowSequence(
        np.vstack([x.K[:1], images_K]), np.vstack([x.V[:1], images_V])
    )


def rho_sequence(x: FlowSequence, model: PerturbationModel) -> FlowSequence:
    """
    (rho(x))_0 = 0 and (rho(x))_{j+1} = (0, rho_j(x_j)).
    """
    rho = model.rho_all(x.K[:-1], x.V[:-1], 0)
    return FlowSequence(np.zeros_like(x.K), np.vstack([np.zeros((1, 3)), rho]))


def flow_residual(
    t: float, x: FlowSequence, params: ParamSeq, model: PerturbationModel
) -> FlowSequence:
    """
    e_{j+1} = x_{j+1} - Phi^t_j(x_j); entry 0 is zero.
    """
    return x - phi_all(t, x, params, model)


def xbar_dg0_certificate(
    K0: np.ndarray,
    g0: float,
    params: ParamSeq,
    model: PerturbationModel,
    a: float = 1.0,
    a_star: float = 0.5,
    h: float = 1.0,
    rel_step: float = 1e-4,
    horizon: Optional[int] = None,
    **solve_kwargs: Any,
) -> Dict[str, float]:
    """
    Finite-difference ||d x-bar / d g0||_w against the envelope g0^{-2} |log g0|^{-1}.

    The three solves share one horizon; the weights are those of g_ring = g-bar(g0).
    """
    centre = solve_quadratic_bvp(g0, params, horizon=horizon, **solve_kwargs)
    J = centre.horizon
    dg0 = rel_step * g0
    plus = solve_quadratic_bvp(g0 + dg0, params, horizon=J, **solve_kwargs)
    minus = solve_quadratic_bvp(g0 - dg0, params, horizon=J, **solve_kwargs)

    x_plus = xbar_assemble(K0, g0 + dg0, params, model, a, a_star, h, solution=plus)
    x_minus = xbar_assemble(K0, g0 - dg0, params, model, a, a_star, h, solution=minus)
    derivative = (x_plus - x_minus) * (1.0 / (2.0 * dg0))

    scheme = WeightScheme(centre.gbar, centre.cutoff, a, a_star, h)
    norm = weighted_norm(derivative, scheme, "w")
    envelope = 1.0 / (g0**2 * abs(math.log(g0)))
    return {"g0": g0, "norm": norm, "envelope": envelope, "ratio": norm / envelope}
