# src/homotopy/sensitivity.py
"""
Derivative and continuity evidence for the perturbed flow:

- sensitivity: d(z0, mu0)/dg0 by central differences with a Richardson estimate
- derivative_bound_fit: uniform-boundedness fit over a g0 grid
- external_parameter_sweep: solves a parameter family on a grid (optionally threaded)
- refinement_study: neighbour differences under grid halving
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np

from .context import HomotopyConfig, HomotopyContext, select_horizon
from .integrator import integrate_homotopy
from .oracles import sweep_solve
from ..models.base import PerturbationModel
from ..models.flow_sequence import FlowSequence
from ..params.sequences import CoefficientSequence, ParamSeq
from ..quadratic.bvp import QuadraticGate
from ..utils.errors import InvalidParametersError, RGFlowError
from ..utils.logging import logger, stage

Solver = Literal["homotopy", "sweep"]
Family = Callable[[float], Tuple[ParamSeq, PerturbationModel]]

SOLVERS = ("homotopy", "sweep")

# Ratio of the largest to the median neighbour ratio that flags a discontinuity
DISCONTINUITY_FACTOR = 100.0


@dataclass(frozen=True)
class SolveOptions:
    """
    Shared settings for repeated solves of the perturbed flow.
    """

    solver: Solver = "homotopy"
    a: float = 1.0
    a_star: float = 0.5
    h: float = 1.0
    config: HomotopyConfig = field(default_factory=HomotopyConfig)
    gate: Optional[QuadraticGate] = None
    enforce_assumptions: bool = True

    def __post_init__(self) -> None:
        if self.solver not in SOLVERS:
            raise InvalidParametersError(f"solver must be one of {SOLVERS}, got {self.solver!r}")


def solve_flow(
    K0: np.ndarray,
    g0: float,
    params: ParamSeq,
    model: PerturbationModel,
    horizon: int,
    options: SolveOptions,
) -> FlowSequence:
    """
    The perturbed trajectory on a fixed horizon with the selected solver.
    """
    if options.solver == "homotopy":
        context = HomotopyContext.build(
            K0,
            g0,
            params,
            model,
            options.a,
            options.a_star,
            options.h,
            config=options.config,
            horizon=horizon,
            gate=options.gate,
            enforce_assumptions=options.enforce_assumptions,
        )
        return integrate_homotopy(context.xbar, None, context).x
    result = sweep_solve(
        K0,
        g0,
        params,
        model,
        horizon,
        tol=options.config.s_tol,
        a=options.a,
        a_star=options.a_star,
        h=options.h,
        gate=options.gate,
        enforce_assumptions=options.enforce_assumptions,
    )
    return result.trajectory


@dataclass
class SensitivityReport:
    """
    Finite-difference derivatives of (z0, mu0) in g0 at one point; stencil is "central" or "backward".
    """

    g0: float
    dg0: float
    horizon: int
    dz0: float
    dmu0: float
    error_z: float
    error_mu: float
    stencil: str = "central"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "g0": self.g0,
            "dg0": self.dg0,
            "horizon": self.horizon,
            "dz0_dg0": self.dz0,
            "dmu0_dg0": self.dmu0,
            "richardson_error_z": self.error_z,
            "richardson_error_mu": self.error_mu,
            "stencil": self.stencil,
        }


def sensitivity(
    K0: np.ndarray,
    g0: float,
    params: ParamSeq,
    model: PerturbationModel,
    dg0: float,
    options: Optional[SolveOptions] = None,
    horizon: Optional[int] = None,
) -> SensitivityReport:
    """
    d(z0, mu0)/dg0 from second-order differences at steps dg0 and dg0/2.

    The stencil is central unless g0 + dg0 would leave the admissibility gate;
    then the one-sided backward stencil (3 f(g0) - 4 f(g0 - h) + f(g0 - 2h)) / 2h
    is used. All solves share one horizon. The returned value is the Richardson
    combination (4 D(h/2) - D(h)) / 3 and the error estimate |D(h/2) - D(h)| / 3.

    Raises:
        InvalidParametersError: If dg0 is not positive or the stencil reaches g0 <= 0
        GateError: If g0 itself falls outside the admissibility gate
    """
    options = options or SolveOptions()
    gate = options.gate or QuadraticGate()
    central = (g0 + dg0) * params.beta_sup <= gate.g0_beta_max
    stencil = "central" if central else "backward"
    reach = 1.0 if central else 2.0
    if not (dg0 > 0.0 and g0 - reach * dg0 > 0.0):
        raise InvalidParametersError(f"Need 0 < {reach:g} dg0 < g0, got dg0={dg0}, g0={g0}")
    if horizon is None:
        horizon, _ = select_horizon(
            g0, params, options.config.tail_tol, options.config.max_horizon
        )

    def boundary(g: float) -> np.ndarray:
        x = solve_flow(K0, g, params, model, horizon, options)
        return np.array([x.z[0], x.mu[0]])

    def derivative(step: float) -> np.ndarray:
        if central:
            return (boundary(g0 + step) - boundary(g0 - step)) / (2.0 * step)
        return (3.0 * centre - 4.0 * boundary(g0 - step) + boundary(g0 - 2.0 * step)) / (2.0 * step)

    centre = None if central else boundary(g0)
    coarse = derivative(dg0)
    fine = derivative(0.5 * dg0)
    combined = (4.0 * fine - coarse) / 3.0
    error = np.abs(fine - coarse) / 3.0
    logger.debug(f"Sensitivity at g0={g0} ({stencil}): dz0={combined[0]:.6g}, dmu0={combined[1]:.6g}")
    return SensitivityReport(
        g0, dg0, horizon, float(combined[0]), float(combined[1]), float(error[0]), float(error[1]), stencil
    )


def derivative_bound_fit(reports: Sequence[SensitivityReport]) -> Dict[str, Any]:
    """
    Fitted uniform bounds for |dz0/dg0| and |dmu0/dg0| over a g0 grid.

    spread is (max - min) / max; slope is the least-squares slope of
    log|d| against log g0 (negative means growth as g0 decreases).
    """
    if not reports:
        raise InvalidParametersError("derivative_bound_fit needs at least one point")
    g0 = np.array([r.g0 for r in reports])
    fit: Dict[str, Any] = {"g0": g0.tolist()}
    for name, values in (
        ("z", np.abs([r.dz0 for r in reports])),
        ("mu", np.abs([r.dmu0 for r in reports])),
    ):
        top = float(np.max(values))
        spread = (top - float(np.min(values))) / top if top > 0.0 else 0.0
        positive = values > 0.0
        if np.count_nonzero(positive) >= 2 and len(set(g0[positive])) >= 2:
            slope = float(np.polyfit(np.log(g0[positive]), np.log(values[positive]), 1)[0])
        else:
            slope = 0.0
        fit[name] = {"sup": top, "spread": spread, "log_slope": slope, "values": values.tolist()}
    return fit


@dataclass
class SweepPoint:
    """
    Outcome of one grid point of a parameter sweep.
    """

    m: float
    trajectory: Optional[FlowSequence] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.trajectory is not None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"m": self.m, "ok": self.ok, "error": self.error}
        if self.trajectory is not None:
            data["z0"] = float(self.trajectory.z[0])
            data["mu0"] = float(self.trajectory.mu[0])
        return data


@dataclass
class ContinuityReport:
    """
    Moduli of continuity of x_j(m) over a parameter grid.
    """

    points: List[SweepPoint]
    horizon: int
    report_horizon: int
    differences: List[Dict[str, float]] = field(default_factory=list)

    @property
    def failures(self) -> int:
        return sum(1 for p in self.points if not p.ok)

    @property
    def success_fraction(self) -> float:
        return (len(self.points) - self.failures) / len(self.points) if self.points else 0.0

    @property
    def max_difference(self) -> float:
        return max((d["difference"] for d in self.differences), default=0.0)

    @property
    def max_ratio(self) -> float:
        return max((d["ratio"] for d in self.differences), default=0.0)

    @property
    def flagged(self) -> bool:
        """
        True when one neighbour ratio dwarfs the median one.
        """
        ratios = [d["ratio"] for d in self.differences]
        if len(ratios) < 2:
            return False
        median = float(np.median(ratios))
        if median == 0.0:
            return max(ratios) > 0.0
        return max(ratios) > DISCONTINUITY_FACTOR * median

    def to_dict(self) -> Dict[str, Any]:
        return {
            "horizon": self.horizon,
            "report_horizon": self.report_horizon,
            "points": [p.to_dict() for p in self.points],
            "differences": list(self.differences),
            "failures": self.failures,
            "success_fraction": self.success_fraction,
            "max_difference": self.max_difference,
            "max_ratio": self.max_ratio,
            "flagged": self.flagged,
        }

    def csv_header(self) -> List[str]:
        return ["m", "ok", "z0", "mu0", "error"]

    def csv_rows(self) -> List[List[Any]]:
        rows = []
        for p in self.points:
            d = p.to_dict()
            rows.append([p.m, int(p.ok), d.get("z0", math.nan), d.get("mu0", math.nan), p.error or ""])
        return rows


def _neighbour_differences(
    points: Sequence[SweepPoint], report_horizon: int
) -> List[Dict[str, float]]:
    """
    max over j <= report_horizon of |x_j(m_{i+1}) - x_j(m_i)| for consecutive successes.
    """
    done = [p for p in points if p.ok]
    rows = []
    for left, right in zip(done, done[1:]):
        a = left.trajectory.stacked()[: report_horizon + 1]
        b = right.trajectory.stacked()[: report_horizon + 1]
        difference = float(np.max(np.abs(b - a)))
        step = abs(right.m - left.m)
        rows.append(
            {
                "m_left": left.m,
                "m_right": right.m,
                "difference": difference,
                "ratio": difference / step if step > 0.0 else math.inf,
            }
        )
    return rows


def external_parameter_sweep(
    family: Family,
    m_grid: Sequence[float],
    K0: np.ndarray,
    g0: float,
    options: Optional[SolveOptions] = None,
    horizon: Optional[int] = None,
    report_horizon: Optional[int] = None,
    jobs: int = 1,
) -> ContinuityReport:
    """
    Solve every family member on a common horizon and measure continuity in m.

    The horizon defaults to the tail-rule horizon of the first member. Points
    run concurrently when jobs > 1; results keep grid order. A failing point
    is recorded and the sweep continues.

    Args:
        family: m -> (params, model)
        m_grid: Grid of m values, in order
        K0: Initial K block
        g0: Initial coupling
        options: Solver settings
        horizon: Common horizon (optional)
        report_horizon: Largest j entering the differences (default: horizon)
        jobs: Worker threads

    Returns:
        ContinuityReport

    Raises:
        InvalidParametersError: On an empty grid
    """
    options = options or SolveOptions()
    grid = [float(m) for m in m_grid]
    if not grid:
        raise InvalidParametersError("Parameter grid is empty")
    if horizon is None:
        first_params, _ = family(grid[0])
        horizon, _ = select_horizon(
            g0, first_params, options.config.tail_tol, options.config.max_horizon
        )
    report_horizon = horizon if report_horizon is None else min(report_horizon, horizon)
    with stage(f"Parameter sweep ({len(grid)} points, J={horizon})"):
        def solve_point(m: float) -> SweepPoint:
            try:
                params, model = family(m)
                return SweepPoint(m, solve_flow(K0, g0, params, model, horizon, options))
            except RGFlowError as e:
                logger.error(f"❌ Sweep point m={m:.6g} failed: {e}")
                return SweepPoint(m, error=f"{type(e).__name__}: {e}")

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                points = list(pool.map(solve_point, grid))
        else:
            points = [solve_point(m) for m in grid]

        report = ContinuityReport(points, horizon, report_horizon)
        report.differences = _neighbour_differences(points, report_horizon)
        logger.info(
            f"Sweep: {len(points) - report.failures}/{len(points)} points solved, "
            f"max ratio {report.max_ratio:.3g}"
        )
    return report


@dataclass
class RefinementReport:
    """
    Largest neighbour difference per grid level and the shrink factors between levels.
    """

    levels: List[int]
    differences: List[float]
    shrink_factors: List[float]
    min_shrink: float = 1.8

    @property
    def passed(self) -> bool:
        return bool(self.shrink_factors) and all(s >= self.min_shrink for s in self.shrink_factors)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "levels": list(self.levels),
            "differences": list(self.differences),
            "shrink_factors": list(self.shrink_factors),
            "min_shrink": self.min_shrink,
            "passed": self.passed,
        }


def refinement_study(
    family: Family,
    m_lo: float,
    m_hi: float,
    levels: int,
    K0: np.ndarray,
    g0: float,
    options: Optional[SolveOptions] = None,
    horizon: Optional[int] = None,
    report_horizon: Optional[int] = None,
    jobs: int = 1,
    min_shrink: float = 1.8,
) -> RefinementReport:
    """
    Neighbour differences on nested grids with 2^l + 1 points, l = 1..levels.

    The finest grid is solved once; coarser levels subsample it.
    """
    if levels < 2:
        raise InvalidParametersError(f"refinement_study needs at least 2 levels, got {levels}")
    fine = np.linspace(m_lo, m_hi, 2**levels + 1)
    sweep = external_parameter_sweep(
        family, fine, K0, g0, options, horizon, report_horizon, jobs
    )
    if sweep.failures:
        raise InvalidParametersError(
            f"{sweep.failures} grid points failed; refinement needs every point"
        )
    differences = []
    for level in range(1, levels + 1):
        stride = 2 ** (levels - level)
        rows = _neighbour_differences(sweep.points[::stride], sweep.report_horizon)
        differences.append(max(r["difference"] for r in rows))
    shrink = [
        coarse / finer if finer > 0.0 else math.inf
        for coarse, finer in zip(differences, differences[1:])
    ]
    return RefinementReport(list(range(1, levels + 1)), differences, shrink, min_shrink)


def beta_scaling_family(
    base: ParamSeq, model: PerturbationModel, last: int = 100
) -> Family:
    """
    m -> params with beta_j = m for j <= last and 0 afterwards.
    """

    def member(m: float) -> Tuple[ParamSeq, PerturbationModel]:
        return base.replace(beta=CoefficientSequence.cut(m, last)), model

    return member


def constant_family(params: ParamSeq, model: PerturbationModel) -> Family:
    """
    m -> (params, model) for every m.
    """
    return lambda m: (params, model)
