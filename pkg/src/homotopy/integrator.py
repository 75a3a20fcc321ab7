# src/homotopy/integrator.py
"""
Integration of the homotopy ODE x' = F(t, x), x(0) = x-bar, from t = 0 to 1.

The state is integrated in w-normalized coordinates s = (x - x-ring) / w, so
the integrator tolerances act on the w-norm and the existence ball is
max |s| <= 1/2.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import RK45

from .context import F_eval, HomotopyConfig, HomotopyContext
from ..linear.neumann import apply_S
from ..linear.w_operator import BALL_RADIUS, build_W
from ..models.approximate_flow import flow_residual
from ..models.domain import DOMAIN_CLAUSES
from ..models.flow_sequence import FlowSequence
from ..params.weights import expand_weights, residual_norm, weighted_norm
from ..utils.errors import BallExitError, StepSizeFloorError
from ..utils.logging import logger, stage, status_icon


@dataclass
class FlowResult:
    """
    Outcome of one homotopy integration.
    """

    x: FlowSequence
    x_raw: FlowSequence
    xbar: FlowSequence
    ball_ratios: Dict[str, float]
    ball_bounds: Dict[str, float]
    ratio_table: np.ndarray
    residual_raw: float
    residual: float
    residual_tol: float
    path_ball_max: float
    stats: Dict[str, Any] = field(default_factory=dict)
    tail_certified: bool = True

    @property
    def horizon(self) -> int:
        return self.x.horizon

    @property
    def ball_pass(self) -> bool:
        return all(self.ball_ratios[c] <= self.ball_bounds[c] for c in DOMAIN_CLAUSES)

    @property
    def residual_pass(self) -> bool:
        return self.residual <= self.residual_tol

    @property
    def passed(self) -> bool:
        return self.ball_pass and self.residual_pass

    def to_dict(self) -> Dict[str, Any]:
        return {
            "horizon": self.horizon,
            "z0": float(self.x.z[0]),
            "mu0": float(self.x.mu[0]),
            "ball_ratios": dict(self.ball_ratios),
            "ball_bounds": dict(self.ball_bounds),
            "ball_pass": self.ball_pass,
            "residual_raw": self.residual_raw,
            "residual": self.residual,
            "residual_tol": self.residual_tol,
            "residual_pass": self.residual_pass,
            "path_ball_max": self.path_ball_max,
            "tail_certified": self.tail_certified,
            "stats": dict(self.stats),
            "passed": self.passed,
        }

    def csv_header(self) -> List[str]:
        return self.x.csv_header() + [f"ratio_{c}" for c in DOMAIN_CLAUSES]

    def csv_rows(self) -> List[List[float]]:
        return [
            row + [float(v) for v in ratios]
            for row, ratios in zip(self.x.csv_rows(), self.ratio_table)
        ]


def theorem_ratios(x: FlowSequence, context: HomotopyContext) -> np.ndarray:
    """
    Per-j ratios (J+1, 4) of x - x-bar against chi g^3, g^2|log g| and chi g^2|log g|.
    """
    sol = context.solution
    gbar, chi = sol.gbar, sol.chi
    square_log = gbar**2 * np.abs(np.log(gbar))
    scales = np.column_stack([chi * gbar**3, square_log, chi * square_log, chi * square_log])
    diff = x - context.xbar
    k_norm = np.max(np.abs(diff.K), axis=1)
    return np.column_stack([k_norm, np.abs(diff.V)]) / scales


class _Normalizer:
    """
    Maps trajectories to w-normalized flat vectors around x-ring and back.
    """

    def __init__(self, context: HomotopyContext) -> None:
        self.ring = context.xbar.stacked()
        self.scale = expand_weights(context.scheme.weights("w"), context.width)
        self.width = context.width

    def to_state(self, x: FlowSequence) -> np.ndarray:
        return ((x.stacked() - self.ring) / self.scale).ravel()

    def to_flow(self, s: np.ndarray) -> FlowSequence:
        return FlowSequence.from_stacked(self.ring + s.reshape(self.ring.shape) * self.scale, self.width)

    def derivative(self, F: FlowSequence) -> np.ndarray:
        return (F.stacked() / self.scale).ravel()

    def clause_maxima(self, s: np.ndarray) -> Tuple[int, str, float]:
        """
        (j, clause, ratio) of the largest normalized deviation.
        """
        table = np.abs(s.reshape(self.ring.shape))
        grouped = np.column_stack([np.max(table[:, : self.width], axis=1), table[:, self.width :]])
        j, column = np.unravel_index(int(np.argmax(grouped)), grouped.shape)
        return int(j), DOMAIN_CLAUSES[column], float(grouped[j, column])


class _Field:
    """
    The normalized right-hand side with warm starts and bookkeeping.
    """

    def __init__(self, context: HomotopyContext, config: HomotopyConfig, normalizer: _Normalizer) -> None:
        self.context = context
        self.config = config
        self.normalizer = normalizer
        self.evaluations = 0
        self.s_iterations = 0
        self.max_contraction = 0.0
        self._warm: Optional[FlowSequence] = None

    def __call__(self, t: float, s: np.ndarray) -> np.ndarray:
        x = self.normalizer.to_flow(s)
        F, report = F_eval(t, x, self.context, check_ball=False, initial=self._warm, config=self.config)
        self._warm = F
        self.evaluations += 1
        self.s_iterations += report.iterations
        self.max_contraction = max(self.max_contraction, report.contraction)
        return self.normalizer.derivative(F)


def _check_ball(normalizer: _Normalizer, s: np.ndarray, t: float) -> float:
    j, clause, ratio = normalizer.clause_maxima(s)
    if ratio > BALL_RADIUS:
        raise BallExitError(t, j, clause, ratio)
    return ratio


def _integrate(
    context: HomotopyContext,
    config: HomotopyConfig,
    x_start: FlowSequence,
    t0: float,
    t1: float,
) -> Tuple[FlowSequence, Dict[str, Any], float]:
    normalizer = _Normalizer(context)
    fun = _Field(context, config, normalizer)
    s = normalizer.to_state(x_start)
    check = config.ball_check == "every-step"
    path_max = normalizer.clause_maxima(s)[2]
    steps = 0

    if config.integrator == "rk45-adaptive":
        solver = RK45(fun, t0, s, t1, rtol=config.rtol, atol=config.atol)
        while solver.status == "running":
            message = solver.step()
            if solver.status == "failed":
                raise StepSizeFloorError(
                    f"Homotopy integration failed at t={solver.t:.6g}: {message}"
                )
            if solver.step_size is not None and 0.0 < solver.step_size < config.min_step:
                if abs(t1 - solver.t) > config.min_step:
                    raise StepSizeFloorError(
                        f"Step size {solver.step_size:.3g} fell below the floor "
                        f"{config.min_step:.3g} at t={solver.t:.6g}"
                    )
            steps += 1
            if check:
                path_max = max(path_max, _check_ball(normalizer, solver.y, solver.t))
        s = solver.y
    else:
        dt = (t1 - t0) / config.steps
        t = t0
        for _ in range(config.steps):
            k1 = fun(t, s)
            k2 = fun(t + 0.5 * dt, s + 0.5 * dt * k1)
            k3 = fun(t + 0.5 * dt, s + 0.5 * dt * k2)
            k4 = fun(t + dt, s + dt * k3)
            s = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += dt
            steps += 1
            if check:
                path_max = max(path_max, _check_ball(normalizer, s, t))

    if config.ball_check == "final":
        path_max = max(path_max, _check_ball(normalizer, s, t1))
    stats = {
        "integrator": config.integrator,
        "steps": steps,
        "evaluations": fun.evaluations,
        "s_iterations": fun.s_iterations,
        "max_contraction": fun.max_contraction,
    }
    return normalizer.to_flow(s), stats, path_max


def newton_correct(
    x: FlowSequence, context: HomotopyContext, steps: int, config: Optional[HomotopyConfig] = None
) -> Tuple[FlowSequence, List[float]]:
    """
    Newton steps x <- x - S(1, x) e with e the t = 1 flow residual.

    Returns:
        (corrected x, residual norms before each step and after the last)
    """
    params, model = context.params, context.model
    config = config or context.config
    history = [residual_norm(flow_residual(1.0, x, params, model), context.scheme)]
    for _ in range(steps):
        e = flow_residual(1.0, x, params, model)
        W = build_W(1.0, x, model, params, context.xbar)
        delta, _ = apply_S(
            1.0, x, e, context.blocks, W, context.scheme, config.s_tol, config.s_max_iter
        )
        x = x - delta
        history.append(residual_norm(flow_residual(1.0, x, params, model), context.scheme))
    return x, history


def integrate_homotopy(
    xbar: FlowSequence,
    config: Optional[HomotopyConfig],
    context: HomotopyContext,
) -> FlowResult:
    """
    Integrate x' = F(t, x) from x(0) = x-bar to t = 1 and correct.

    Args:
        xbar: Initial trajectory (normally context.xbar)
        config: Settings (default: the context's)
        context: Run context

    Returns:
        FlowResult with ball ratios and residuals

    Raises:
        BallExitError: If an accepted state leaves x-ring + B/2
        StepSizeFloorError: If the adaptive step collapses
    """
    config = config or context.config
    with stage(f"Homotopy integration (J={context.horizon})"):
        x_raw, stats, path_max = _integrate(context, config, xbar, 0.0, 1.0)
        x, history = newton_correct(x_raw, context, config.corrector_steps, config)
        stats["corrector_history"] = history

        table = theorem_ratios(x, context)
        ratios = {c: float(np.max(table[:, i])) for i, c in enumerate(DOMAIN_CLAUSES)}
        bounds = {"K": config.b * (context.a - context.a_star)}
        bounds.update({c: config.b * context.h for c in DOMAIN_CLAUSES[1:]})

        result = FlowResult(
            x=x,
            x_raw=x_raw,
            xbar=context.xbar,
            ball_ratios=ratios,
            ball_bounds=bounds,
            ratio_table=table,
            residual_raw=history[0],
            residual=history[-1],
            residual_tol=config.residual_tol,
            path_ball_max=path_max,
            stats=stats,
            tail_certified=context.tail_certified,
        )
        status = status_icon(result.passed)
        logger.info(
            f"{status} Homotopy: residual {result.residual:.3g} (raw {result.residual_raw:.3g}), "
            f"path ball max {path_max:.3g}, {stats['steps']} steps"
        )
    return result


def integrate_backward(
    result: FlowResult,
    context: HomotopyContext,
    config: Optional[HomotopyConfig] = None,
) -> Dict[str, Any]:
    """
    Integrate from the raw t = 1 state back to t = 0 and measure the gap to x-bar.

    Returns:
        {"gap": ||x(0) - x-bar||_w, "tolerance": 10 max(rtol, atol), "passed": ...}
    """
    config = config or context.config
    x0, _, _ = _integrate(context, config, result.x_raw, 1.0, 0.0)
    gap = weighted_norm(x0 - context.xbar, context.scheme, "w")
    tolerance = 10.0 * max(config.rtol, config.atol)
    logger.info(f"Backward integration gap {gap:.3g} (tolerance {tolerance:.3g})")
    return {"gap": gap, "tolerance": tolerance, "passed": bool(gap <= tolerance)}


def flow_gap(a: FlowSequence, b: FlowSequence, context: HomotopyContext) -> float:
    """
    ||a - b||_w in the context's weights.
    """
    return weighted_norm(a - b, context.scheme, "w")
