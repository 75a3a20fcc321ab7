# src/services/sweep_command.py
"""
sweep: g0 sensitivities or an external-parameter continuity sweep.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional

from .base.command_base import CommandBase
from ..config.run_config import build_family, build_solve_options
from ..homotopy.sensitivity import (
    SensitivityReport,
    SolveOptions,
    derivative_bound_fit,
    external_parameter_sweep,
    refinement_study,
    sensitivity,
)
from ..utils.errors import InvalidParametersError, RGFlowError
from ..utils.logging import logger

SENSITIVITY_HEADER = ["g0", "ok", "dz0_dg0", "dmu0_dg0", "richardson_error_z", "richardson_error_mu", "stencil", "error"]


class SweepCommand(CommandBase):
    """
    Writes sweep_points.csv and sweep_summary.json.

    Passes when the fraction of successful points reaches sweep.min_success_fraction
    (and the refinement study, when configured, shows the required shrink).
    """

    name = "sweep"

    def execute(self) -> bool:
        section = self.config.sweep
        if not section.grid:
            raise InvalidParametersError("sweep.grid: the parameter grid is empty")
        options = build_solve_options(self.config)
        if section.parameter == "g0":
            return self._g0_sweep(options)
        return self._m_sweep(options)

    def _sensitivity_point(self, g0: float, options: SolveOptions) -> Dict[str, Any]:
        dg0 = self.config.sweep.dg0_fraction * g0
        try:
            report = sensitivity(self.K0, g0, self.params, self.model, dg0, options, self.config.solver.horizon)
        except RGFlowError as e:
            logger.error(f"❌ Sensitivity at g0={g0} failed: {e}")
            return {"g0": g0, "report": None, "error": f"{type(e).__name__}: {e}"}
        return {"g0": g0, "report": report, "error": None}

    def _g0_sweep(self, options: SolveOptions) -> bool:
        grid = [float(g) for g in self.config.sweep.grid]
        jobs = min(self.config.jobs, len(grid))
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                points = list(pool.map(lambda g: self._sensitivity_point(g, options), grid))
        else:
            points = [self._sensitivity_point(g, options) for g in grid]

        reports: List[SensitivityReport] = [p["report"] for p in points if p["report"] is not None]
        rows = []
        for p in points:
            data = p["report"].to_dict() if p["report"] is not None else {}
            rows.append(
                [p["g0"], int(p["report"] is not None)]
                + [data.get(k, math.nan) for k in SENSITIVITY_HEADER[2:7]]
                + [p["error"] or ""]
            )
        fraction = len(reports) / len(points)
        fit: Optional[Dict[str, Any]] = derivative_bound_fit(reports) if reports else None

        self.writer.write_csv(self.file_name("sweep_points.csv"), SENSITIVITY_HEADER, rows)
        self.write_json(
            "sweep_summary.json",
            {
                "parameter": "g0",
                "points": [p["report"].to_dict() if p["report"] else {"g0": p["g0"], "error": p["error"]} for p in points],
                "success_fraction": fraction,
                "derivative_bound_fit": fit,
            },
        )
        return fraction >= self.config.sweep.min_success_fraction

    def _m_sweep(self, options: SolveOptions) -> bool:
        section = self.config.sweep
        family = build_family(self.config)
        report = external_parameter_sweep(
            family,
            section.grid,
            self.K0,
            self.config.g0,
            options,
            horizon=self.config.solver.horizon,
            report_horizon=section.report_horizon,
            jobs=self.config.jobs,
        )
        summary: Dict[str, Any] = {"parameter": "m", "family": section.family, **report.to_dict()}
        passed = report.success_fraction >= section.min_success_fraction
        if report.flagged:
            logger.warning(f"⚠️ Possible discontinuity: max ratio {report.max_ratio:.4g}")

        if section.refinement is not None:
            ref = section.refinement
            study = refinement_study(
                family,
                ref.m_lo,
                ref.m_hi,
                ref.levels,
                self.K0,
                self.config.g0,
                options,
                horizon=report.horizon,
                report_horizon=section.report_horizon,
                jobs=self.config.jobs,
                min_shrink=ref.min_shrink,
            )
            summary["refinement"] = study.to_dict()
            passed = passed and study.passed

        self.writer.write_table(self.file_name("sweep_points.csv"), report)
        self.write_json("sweep_summary.json", summary)
        return passed
