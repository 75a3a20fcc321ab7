# src/services/flow_command.py
"""
flow: integrate the homotopy from x-bar to the perturbed flow.
"""

import numpy as np

from .base.command_base import CommandBase
from ..homotopy.context import HomotopyContext
from ..homotopy.integrator import FlowResult, integrate_homotopy
from ..models.approximate_flow import flow_residual
from ..params.a3 import check_A3
from ..params.weights import componentwise_ratios
from ..utils.errors import InvalidParametersError
from ..utils.logging import logger


def residual_table(result: FlowResult, context: HomotopyContext):
    """
    Per-j flow residual ratios against the floored v weights.
    """
    e = flow_residual(1.0, result.x, context.params, context.model)
    ratios = componentwise_ratios(e, context.scheme.residual_weights())
    header = ["j", "residual_K", "residual_g", "residual_z", "residual_mu"]
    rows = [[j] + [float(v) for v in row] for j, row in enumerate(ratios)]
    return header, rows


class FlowCommand(CommandBase):
    """
    Writes flow_result.json and flow_trajectory.csv (and flow_residuals.csv on request).

    A1 and A2 are enforced by the quadratic solve and A3 is estimated on the
    working domain; --force downgrades failures to warnings.
    """

    name = "flow"

    def build_context(self) -> HomotopyContext:
        config = self.config
        return HomotopyContext.build(
            self.K0,
            config.g0,
            self.params,
            self.model,
            config.scheme.a,
            config.scheme.a_star,
            config.scheme.h,
            config=self.homotopy_config,
            horizon=config.solver.horizon,
            gate=self.gate,
            enforce_assumptions=config.solver.enforce_assumptions and not config.force,
        )

    def execute(self) -> bool:
        config = self.config
        context = self.build_context()
        a3 = check_A3(
            context.model, context.scheme, context.params, rng_seed=config.seed, solution=context.solution
        )
        if not a3.passed:
            message = (
                f"Assumption A3 fails: kappa_hat={a3.kappa_hat:.4g}, "
                f"R_hat={a3.R_hat:.4g}, M_hat={a3.M_hat:.4g}"
            )
            if not config.force:
                raise InvalidParametersError(message)
            logger.warning(f"⚠️ {message} (continuing with --force)")

        result = integrate_homotopy(context.xbar, None, context)

        self.writer.write_table(self.file_name("flow_trajectory.csv"), result)
        if config.output.per_j_residuals:
            header, rows = residual_table(result, context)
            self.writer.write_csv(self.file_name("flow_residuals.csv"), header, rows)
        payload = result.to_dict()
        payload["context"] = context.describe()
        payload["A3"] = a3.to_dict()
        payload["K_final_sup"] = float(np.max(np.abs(result.x.K)))
        self.write_json("flow_result.json", payload)
        return result.passed
