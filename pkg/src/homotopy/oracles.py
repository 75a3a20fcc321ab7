# src/homotopy/oracles.py
"""
Independent solvers for the truncated nonlinear problem

    x_{j+1} = Phi^1_j(x_j),   pi_u x_0 = u0,   v_J = v-bar_J

used to cross-check the homotopy flow.

- shooting_solve: Newton on (z0, mu0) against the forward map to scale J
- sweep_solve: forward (K, g) / backward (z, mu) Gauss-Seidel sweeps
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..models.approximate_flow import flow_residual, pad_k0
from ..models.base import PerturbationModel
from ..models.flow_sequence import FlowSequence
from ..params.sequences import ParamSeq
from ..params.weights import WeightScheme, residual_norm, weighted_norm
from ..quadratic.bvp import QuadraticGate, QuadraticSolution, solve_quadratic_bvp
from ..utils.errors import GateError, ShootingDivergedError, SweepDivergedError
from ..utils.logging import logger

# Shooting is refused beyond this horizon when inf lambda reaches SHOOTING_LAMBDA_GATE
SHOOTING_HORIZON_GATE = 60
SHOOTING_LAMBDA_GATE = 1.5

DIVERGENCE_FACTOR = 1e6
RELAXATION = 0.5


def _oracle_setup(
    g0: float,
    params: ParamSeq,
    model: PerturbationModel,
    horizon: int,
    solution: Optional[QuadraticSolution],
    gate: Optional[QuadraticGate],
    enforce_assumptions: bool,
) -> Tuple[QuadraticSolution, PerturbationModel]:
    if solution is None:
        solution = solve_quadratic_bvp(
            g0, params, horizon=horizon, gate=gate, enforce_assumptions=enforce_assumptions
        )
    elif solution.horizon != horizon:
        raise ValueError(f"Solution horizon {solution.horizon} differs from {horizon}")
    return solution, model.with_cutoff(solution.cutoff)


@dataclass
class ShootingResult:
    """
    Root (z0, mu0) of the shooting map and the trajectory it generates.
    """

    z0: float
    mu0: float
    iterations: int
    residual: float
    trajectory: FlowSequence
    history: List[float] = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return self.trajectory.horizon

    def to_dict(self) -> Dict[str, Any]:
        return {
            "z0": self.z0,
            "mu0": self.mu0,
            "horizon": self.horizon,
            "iterations": self.iterations,
            "residual": self.residual,
            "history": list(self.history),
        }


def _forward(
    K0: np.ndarray,
    v0: Tuple[float, float, float],
    params: ParamSeq,
    model: PerturbationModel,
    horizon: int,
) -> Optional[FlowSequence]:
    """
    x_{j+1} = Phi^1_j(x_j) from x_0; None once the trajectory stops being finite.
    """
    width = model.k_dims.width(horizon)
    K = np.zeros((horizon + 1, width))
    V = np.zeros((horizon + 1, 3))
    K[0] = pad_k0(K0, width)
    V[0] = v0
    table = params.table(horizon)
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(horizon):
            row_K, row_V = K[j : j + 1], V[j : j + 1]
            K[j + 1] = model.psi_all(row_K, row_V, j)[0]
            rho = model.rho_all(row_K, row_V, j)[0]
            g, z, mu = V[j]
            c = table.at(j)
            V[j + 1] = (
                g - c.beta * g * g + rho[0],
                z - c.theta * g * g - c.zeta * g * z + rho[1],
                c.eta * g
                + c.gamma * z
                + c.lam * mu
                - (
                    c.ups_gg * g * g
                    + c.ups_gz * g * z
                    + c.ups_gmu * g * mu
                    + c.ups_zz * z * z
                    + c.ups_zmu * z * mu
                )
                + rho[2],
            )
            if not (np.all(np.isfinite(V[j + 1])) and np.all(np.isfinite(K[j + 1]))):
                return None
    return FlowSequence(K, V)


def shooting_solve(
    K0: np.ndarray,
    g0: float,
    params: ParamSeq,
    model: PerturbationModel,
    horizon: int,
    tol: float = 1e-12,
    max_iter: int = 30,
    initial: Optional[Tuple[float, float]] = None,
    fd_rel: float = 1e-6,
    h: float = 1.0,
    solution: Optional[QuadraticSolution] = None,
    gate: Optional[QuadraticGate] = None,
    enforce_assumptions: bool = True,
) -> ShootingResult:
    """
    Newton iteration on (z0, mu0) -> (z_J, mu_J) - (z-bar_J, mu-bar_J).

    The Jacobian is a central finite difference with steps fd_rel times the
    z and mu radii at scale 0; rows are scaled by the radii at scale J.

    Args:
        K0: Initial K block
        g0: Initial coupling
        params: Coefficient sequences
        model: Perturbation model
        horizon: Shooting horizon J_s
        tol: Newton step tolerance in units of the scale-0 radii
        max_iter: Newton iteration cap
        initial: Starting (z0, mu0) (default: z-bar_0, mu-bar_0)
        fd_rel: Relative finite-difference step
        h: V radius parameter used for scaling
        solution: Quadratic solution on the same horizon (solved when omitted)
        gate: Quadratic admissibility gate
        enforce_assumptions: Refuse inputs failing A1/A2

    Returns:
        ShootingResult

    Raises:
        GateError: If horizon > 60 with inf lambda >= 1.5
        ShootingDivergedError: If Newton fails to converge
    """
    lam_min = float(np.min(params.lam.values(horizon)))
    if horizon > SHOOTING_HORIZON_GATE and lam_min >= SHOOTING_LAMBDA_GATE:
        raise GateError(
            f"Shooting horizon {horizon} too long for inf lambda = {lam_min:.4g}; "
            f"use J_s <= {SHOOTING_HORIZON_GATE} or the sweep oracle"
        )
    solution, model = _oracle_setup(
        g0, params, model, horizon, solution, gate, enforce_assumptions
    )
    gbar, chi = solution.gbar, solution.chi
    radius = h * chi * gbar**2 * np.abs(np.log(gbar))
    start_scale = np.array([radius[0], radius[0]])
    end_scale = np.array([radius[horizon], radius[horizon]])
    target = np.array([solution.zbar[horizon], solution.mubar[horizon]])

    def shoot(v: np.ndarray) -> Tuple[np.ndarray, Optional[FlowSequence]]:
        x = _forward(K0, (g0, v[0], v[1]), params, model, horizon)
        if x is None:
            return np.full(2, np.inf), None
        return (np.array([x.z[-1], x.mu[-1]]) - target) / end_scale, x

    v = np.array(initial if initial is not None else (solution.zbar[0], solution.mubar[0]), dtype=float)
    G, x = shoot(v)
    history = [float(np.max(np.abs(G)))]
    if not math.isfinite(history[0]):
        raise ShootingDivergedError(
            f"Forward map overflows from the initial guess at J_s={horizon}; "
            "try a smaller J_s or the sweep oracle"
        )

    steps = fd_rel * start_scale
    for iteration in range(1, max_iter + 1):
        jac = np.zeros((2, 2))
        for col in range(2):
            delta = np.zeros(2)
            delta[col] = steps[col]
            plus, _ = shoot(v + delta)
            minus, _ = shoot(v - delta)
            jac[:, col] = (plus - minus) / (2.0 * steps[col])
        try:
            update = np.linalg.solve(jac, -G)
        except np.linalg.LinAlgError as e:
            raise ShootingDivergedError(
                f"Singular shooting Jacobian at iteration {iteration}: {e}; "
                "try a smaller J_s or the sweep oracle"
            ) from e
        v = v + update
        G, x = shoot(v)
        size = float(np.max(np.abs(G)))
        history.append(size)
        logger.debug(f"Shooting iteration {iteration}: residual {size:.3g}")
        if x is None or not math.isfinite(size) or size > DIVERGENCE_FACTOR * max(history[0], 1.0):
            raise ShootingDivergedError(
                f"Shooting Newton diverged at iteration {iteration} (J_s={horizon}); "
                "try a smaller J_s or the sweep oracle"
            )
        if float(np.max(np.abs(update) / start_scale)) <= tol or size == 0.0:
            logger.info(
                f"✅ Shooting converged in {iteration} iterations "
                f"(z0={v[0]:.12g}, mu0={v[1]:.12g})"
            )
            return ShootingResult(float(v[0]), float(v[1]), iteration, size, x, history)

    raise ShootingDivergedError(
        f"Shooting did not converge in {max_iter} iterations (J_s={horizon}, "
        f"residual {history[-1]:.3g}); try a smaller J_s or the sweep oracle"
    )


@dataclass
class SweepResult:
    """
    Fixed point of the forward/backward sweep map.
    """

    trajectory: FlowSequence
    sweeps: int
    residual: float
    relaxed: bool
    increments: List[float] = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return self.trajectory.horizon

    def to_dict(self) -> Dict[str, Any]:
        return {
            "horizon": self.horizon,
            "sweeps": self.sweeps,
            "residual": self.residual,
            "relaxed": self.relaxed,
            "z0": float(self.trajectory.z[0]),
            "mu0": float(self.trajectory.mu[0]),
            "increments": list(self.increments),
        }


def _sweep(
    x: FlowSequence,
    K0: np.ndarray,
    g0: float,
    params: ParamSeq,
    model: PerturbationModel,
    v_end: np.ndarray,
) -> FlowSequence:
    """
    One sweep: (K, g) forward with (z, mu) held, then (z, mu) backward.

    rho_j is evaluated once per scale at (K_j, g_j) from the forward pass and
    the previous (z_j, mu_j).
    """
    horizon = x.horizon
    width = x.k_dim
    table = params.table(horizon)
    K = np.zeros((horizon + 1, width))
    V = np.array(x.V)
    K[0] = pad_k0(K0, width)
    V[0, 0] = g0
    rho = np.zeros((horizon, 3))

    for j in range(horizon):
        row_K, row_V = K[j : j + 1], V[j : j + 1]
        K[j + 1] = model.psi_all(row_K, row_V, j)[0]
        rho[j] = model.rho_all(row_K, row_V, j)[0]
        g = V[j, 0]
        V[j + 1, 0] = g - table.beta[j] * g * g + rho[j, 0]

    V[horizon, 1:] = v_end
    for j in range(horizon - 1, -1, -1):
        c = table.at(j)
        g = V[j, 0]
        z = (V[j + 1, 1] + c.theta * g * g - rho[j, 1]) / (1.0 - c.zeta * g)
        V[j, 1] = z
        V[j, 2] = (
            V[j + 1, 2]
            - c.eta * g
            - c.gamma * z
            + c.ups_gg * g * g
            + c.ups_gz * g * z
            + c.ups_zz * z * z
            - rho[j, 2]
        ) / (c.lam - c.ups_gmu * g - c.ups_zmu * z)
    return FlowSequence(K, V)


def sweep_solve(
    K0: np.ndarray,
    g0: float,
    params: ParamSeq,
    model: PerturbationModel,
    horizon: int,
    tol: float = 1e-12,
    max_sweeps: int = 500,
    a: float = 1.0,
    a_star: float = 0.5,
    h: float = 1.0,
    solution: Optional[QuadraticSolution] = None,
    gate: Optional[QuadraticGate] = None,
    enforce_assumptions: bool = True,
) -> SweepResult:
    """
    Iterate forward/backward sweeps to a fixed point.

    Plain Gauss-Seidel first; on non-contraction the iteration restarts once
    with relaxation 0.5.

    Args:
        K0: Initial K block
        g0: Initial coupling
        params: Coefficient sequences
        model: Perturbation model
        horizon: Working horizon J
        tol: Stop when the w-norm sweep increment is at most tol
        max_sweeps: Sweep cap per attempt
        a, a_star, h: Weight parameters of the increment norm
        solution: Quadratic solution on the same horizon (solved when omitted)
        gate: Quadratic admissibility gate
        enforce_assumptions: Refuse inputs failing A1/A2

    Returns:
        SweepResult

    Raises:
        SweepDivergedError: If neither plain nor relaxed sweeps contract
    """
    solution, model = _oracle_setup(
        g0, params, model, horizon, solution, gate, enforce_assumptions
    )
    scheme = WeightScheme(solution.gbar, solution.cutoff, a, a_star, h)
    width = model.k_dims.width(horizon)
    v_end = solution.vbar[horizon, 1:]
    start = FlowSequence(np.zeros((horizon + 1, width)), solution.vbar)

    for relaxation in (1.0, RELAXATION):
        x = start
        increments: List[float] = []
        rising = 0
        failure = ""
        for sweep in range(1, max_sweeps + 1):
            try:
                swept = _sweep(x, K0, g0, params, model, v_end)
            except ValueError as e:
                failure = f"non-finite sweep: {e}"
                break
            step = swept - x
            x = x + relaxation * step if relaxation != 1.0 else swept
            increment = weighted_norm(step, scheme, "w")
            increments.append(increment)
            if not math.isfinite(increment) or increment > DIVERGENCE_FACTOR * max(increments[0], tol):
                failure = f"increment {increment:.3g} at sweep {sweep}"
                break
            if increment <= tol:
                residual = residual_norm(flow_residual(1.0, x, params, model), scheme)
                logger.info(
                    f"✅ Sweep converged in {sweep} sweeps (relaxation {relaxation}, "
                    f"residual {residual:.3g})"
                )
                return SweepResult(x, sweep, residual, relaxation != 1.0, increments)
            if len(increments) > 1 and increment >= increments[-2]:
                rising += 1
                if rising >= 3:
                    failure = f"increments stopped shrinking at sweep {sweep}"
                    break
            else:
                rising = 0
        else:
            failure = f"no convergence in {max_sweeps} sweeps"
        logger.warning(f"⚠️ Sweep with relaxation {relaxation} failed: {failure}")

    raise SweepDivergedError(f"Sweep oracle did not contract on J={horizon}: {failure}")
