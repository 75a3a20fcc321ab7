# src/homotopy/context.py
"""
Shared state of one homotopy run and the vector field F(t, x) = S(t, x) rho(x).
"""

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Literal, Optional, Tuple

import numpy as np

from ..linear.blocks import BlockMatrices, build_L
from ..linear.neumann import SolveReport, apply_S
from ..linear.w_operator import build_W
from ..models.approximate_flow import rho_sequence, xbar_assemble
from ..models.base import PerturbationModel
from ..models.domain import DomainSpec
from ..models.flow_sequence import FlowSequence
from ..params.cutoff import CutoffData, cutoff_time
from ..params.sequences import ParamSeq
from ..params.weights import WeightScheme
from ..quadratic.bvp import QuadraticGate, QuadraticSolution, iterate_gbar, solve_quadratic_bvp
from ..utils.errors import InvalidParametersError
from ..utils.logging import logger

Integrator = Literal["rk45-adaptive", "rk4-fixed"]
BallCheck = Literal["every-step", "final", "off"]

INTEGRATORS = ("rk45-adaptive", "rk4-fixed")
BALL_CHECKS = ("every-step", "final", "off")


@dataclass(frozen=True)
class HomotopyConfig:
    """
    Integrator and solver settings for one homotopy run.
    """

    integrator: Integrator = "rk45-adaptive"
    steps: int = 16
    rtol: float = 1e-9
    atol: float = 1e-11
    s_tol: float = 1e-12
    s_max_iter: int = 200
    ball_check: BallCheck = "every-step"
    residual_tol: float = 1e-9
    tail_tol: float = 1e-10
    corrector_steps: int = 2
    b: float = 0.9
    min_step: float = 1e-10
    max_horizon: int = 4096

    def __post_init__(self) -> None:
        if self.integrator not in INTEGRATORS:
            raise InvalidParametersError(
                f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}"
            )
        if self.ball_check not in BALL_CHECKS:
            raise InvalidParametersError(
                f"ball_check must be one of {BALL_CHECKS}, got {self.ball_check!r}"
            )
        if self.steps < 4:
            raise InvalidParametersError(f"steps must be at least 4, got {self.steps}")
        for name in ("rtol", "atol", "s_tol", "residual_tol", "tail_tol", "min_step"):
            if not getattr(self, name) > 0.0:
                raise InvalidParametersError(f"{name} must be positive")
        if self.corrector_steps < 0 or self.s_max_iter < 1:
            raise InvalidParametersError("corrector_steps must be >= 0 and s_max_iter >= 1")
        if not 0.0 < self.b < 1.0:
            raise InvalidParametersError(f"b must lie in (0, 1), got {self.b}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def select_horizon(
    g0: float,
    params: ParamSeq,
    tail_tol: float,
    max_horizon: int,
    cutoff: Optional[CutoffData] = None,
) -> Tuple[int, bool]:
    """
    Smallest J with chi_J gbar_J <= tail_tol and alpha^(J - j_Omega) <= tail_tol.

    alpha is estimated as 1 / inf lambda. Returns (J, certified); when no
    J <= max_horizon qualifies the result is (max_horizon, False).
    """
    cutoff = cutoff or cutoff_time(params)
    gbar = iterate_gbar(g0, params, max_horizon)
    chi = cutoff.chi_values(max_horizon + 1)
    lam_inf = params.lam.infimum()
    alpha = 1.0 / lam_inf if lam_inf > 1.0 else 1.0
    floor = cutoff.j_omega if cutoff.is_finite else 0
    steps = np.arange(max_horizon + 1) - floor
    alpha_ok = np.where(steps > 0, steps * math.log(alpha), 0.0) <= math.log(tail_tol)
    ok = (chi * gbar <= tail_tol) & alpha_ok
    ok[0] = False
    hits = np.nonzero(ok)[0]
    if len(hits):
        return int(hits[0]), True
    return max_horizon, False


class HomotopyContext:
    """
    Everything F(t, x) needs: parameters, model, x-bar, frozen blocks and weights.
    """

    def __init__(
        self,
        params: ParamSeq,
        model: PerturbationModel,
        solution: QuadraticSolution,
        K0: np.ndarray,
        a: float = 1.0,
        a_star: float = 0.5,
        h: float = 1.0,
        config: Optional[HomotopyConfig] = None,
        tail_certified: bool = True,
    ) -> None:
        """
        Initialize the context on the horizon of the quadratic solution.

        Args:
            params: Coefficient sequences
            model: Perturbation model
            solution: Quadratic solution at g0 (its horizon is the working horizon)
            K0: Initial K block
            a, a_star, h: Domain and weight parameters
            config: Homotopy settings
            tail_certified: Whether the horizon satisfies the tail rule
        """
        self.params = params
        self.model = model.with_cutoff(solution.cutoff)
        self.solution = solution
        self.config = config or HomotopyConfig()
        self.a = float(a)
        self.a_star = float(a_star)
        self.h = float(h)
        self.tail_certified = tail_certified
        self.K0 = np.atleast_1d(np.asarray(K0, dtype=float))

        self.xbar: FlowSequence = xbar_assemble(
            self.K0, solution.g0, params, self.model, a, a_star, h, solution=solution
        )
        self.blocks: BlockMatrices = build_L(
            self.xbar, params, reference_tail=solution.tail_bound
        )
        self.scheme = WeightScheme(solution.gbar, solution.cutoff, a, a_star, h)
        self.domain = DomainSpec(solution, a, h, a_star)

    @classmethod
    def build(
        cls,
        K0: np.ndarray,
        g0: float,
        params: ParamSeq,
        model: PerturbationModel,
        a: float = 1.0,
        a_star: float = 0.5,
        h: float = 1.0,
        config: Optional[HomotopyConfig] = None,
        horizon: Optional[int] = None,
        gate: Optional[QuadraticGate] = None,
        enforce_assumptions: bool = True,
    ) -> "HomotopyContext":
        """
        Choose the horizon (tail rule unless given), solve the quadratic flow and build.
        """
        config = config or HomotopyConfig()
        certified = True
        if horizon is None:
            horizon, certified = select_horizon(g0, params, config.tail_tol, config.max_horizon)
            if not certified:
                logger.warning(
                    f"⚠️ No horizon up to {config.max_horizon} meets the tail rule "
                    f"(tail_tol={config.tail_tol:.3g}); using J={horizon}"
                )
        solution = solve_quadratic_bvp(
            g0,
            params,
            horizon=horizon,
            gate=gate,
            enforce_assumptions=enforce_assumptions,
        )
        logger.debug(f"Homotopy context at g0={g0}, J={horizon}")
        return cls(params, model, solution, K0, a, a_star, h, config, certified)

    @property
    def horizon(self) -> int:
        return self.solution.horizon

    @property
    def width(self) -> int:
        return self.xbar.k_dim

    def describe(self) -> Dict[str, Any]:
        return {
            "g0": self.solution.g0,
            "horizon": self.horizon,
            "tail_certified": self.tail_certified,
            "a": self.a,
            "a_star": self.a_star,
            "h": self.h,
            "model": self.model.describe(),
            "blocks": self.blocks.to_dict(),
        }


def F_eval(
    t: float,
    x: FlowSequence,
    context: HomotopyContext,
    check_ball: bool = True,
    initial: Optional[FlowSequence] = None,
    config: Optional[HomotopyConfig] = None,
) -> Tuple[FlowSequence, SolveReport]:
    """
    F(t, x) = S(t, x) rho(x).

    Args:
        t: Homotopy time
        x: Current trajectory
        context: Run context
        check_ball: Require x in x-ring + B/2 before building W
        initial: Starting guess for the fixed-point iteration
        config: Solver settings (default: the context's)

    Returns:
        (F, SolveReport)
    """
    r = rho_sequence(x, context.model)
    W = build_W(
        t,
        x,
        context.model,
        context.params,
        context.xbar,
        context.scheme if check_ball else None,
    )
    config = config or context.config
    return apply_S(
        t,
        x,
        r,
        context.blocks,
        W,
        context.scheme,
        tol=config.s_tol,
        max_iter=config.s_max_iter,
        initial=initial,
    )
