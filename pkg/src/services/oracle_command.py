# src/services/oracle_command.py
"""
oracle-compare: homotopy, shooting and sweep on one instance, pairwise w-norm gaps.
"""

from itertools import combinations
from typing import Any, Callable, Dict

from .base.command_base import CommandBase
from ..homotopy.context import HomotopyContext
from ..homotopy.integrator import flow_gap, integrate_homotopy
from ..homotopy.oracles import shooting_solve, sweep_solve
from ..models.flow_sequence import FlowSequence
from ..utils.errors import RGFlowError
from ..utils.logging import logger

ORACLE_GAP_TOL = 1e-7


class OracleCompareCommand(CommandBase):
    """
    Writes oracle_compare.json and one oracle_<name>.csv per successful oracle.

    An oracle that raises is recorded with its error and fails the comparison.
    """

    name = "oracle-compare"

    def execute(self) -> bool:
        config = self.config
        horizon = config.oracle.horizon
        enforce = config.solver.enforce_assumptions and not config.force
        context = HomotopyContext.build(
            self.K0,
            config.g0,
            self.params,
            self.model,
            config.scheme.a,
            config.scheme.a_star,
            config.scheme.h,
            config=self.homotopy_config,
            horizon=horizon,
            gate=self.gate,
            enforce_assumptions=enforce,
        )
        common = dict(solution=context.solution, enforce_assumptions=enforce)

        def homotopy() -> FlowSequence:
            return integrate_homotopy(context.xbar, None, context).x

        def shooting() -> FlowSequence:
            return shooting_solve(
                self.K0,
                config.g0,
                context.params,
                context.model,
                horizon,
                tol=config.oracle.shooting_tol,
                h=config.scheme.h,
                **common,
            ).trajectory

        def sweep() -> FlowSequence:
            return sweep_solve(
                self.K0,
                config.g0,
                context.params,
                context.model,
                horizon,
                tol=config.oracle.sweep_tol,
                a=config.scheme.a,
                a_star=config.scheme.a_star,
                h=config.scheme.h,
                **common,
            ).trajectory

        oracles: Dict[str, Callable[[], FlowSequence]] = {
            "homotopy": homotopy,
            "shooting": shooting,
            "sweep": sweep,
        }
        trajectories: Dict[str, FlowSequence] = {}
        errors: Dict[str, str] = {}
        for name, solve in oracles.items():
            try:
                trajectories[name] = solve()
                logger.info(f"✅ Oracle {name} solved")
            except RGFlowError as e:
                logger.error(f"❌ Oracle {name} failed: {e}")
                errors[name] = f"{type(e).__name__}: {e}"

        gaps = {
            f"{left}_{right}": flow_gap(trajectories[left], trajectories[right], context)
            for left, right in combinations(oracles, 2)
            if left in trajectories and right in trajectories
        }
        for name, x in trajectories.items():
            self.writer.write_table(self.file_name(f"oracle_{name}.csv"), x)

        passed = not errors and all(gap <= ORACLE_GAP_TOL for gap in gaps.values())
        result: Dict[str, Any] = {
            "horizon": horizon,
            "gaps": gaps,
            "tolerance": ORACLE_GAP_TOL,
            "errors": errors,
            "boundary": {
                name: {"z0": float(x.z[0]), "mu0": float(x.mu[0])} for name, x in trajectories.items()
            },
            "passed": passed,
        }
        self.write_json("oracle_compare.json", result)
        return passed
