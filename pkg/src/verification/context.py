# src/verification/context.py
"""
Lazily computed artefacts shared by the checks of one instance.
"""

import zlib
from functools import cached_property
from typing import Optional

import numpy as np

from .instances import VerificationInstance
from ..homotopy.context import HomotopyConfig, HomotopyContext
from ..homotopy.integrator import FlowResult, integrate_homotopy
from ..models.base import PerturbationModel
from ..params.cutoff import CutoffData, cutoff_time
from ..params.sequences import ParamSeq
from ..params.weights import WeightScheme
from ..quadratic.bvp import QuadraticSolution, solve_quadratic_bvp


class SuiteContext:
    """
    Per-instance cache: quadratic solutions, weights, homotopy context and flow.
    """

    def __init__(
        self,
        instance: VerificationInstance,
        seed: int = 0,
        config: Optional[HomotopyConfig] = None,
    ) -> None:
        self.instance = instance
        self.seed = seed
        self.config = config or HomotopyConfig()

    def rng(self, name: str) -> np.random.Generator:
        """
        Generator seeded by (seed, check name), independent of check order.
        """
        return np.random.default_rng([self.seed, zlib.crc32(name.encode())])

    @property
    def params(self) -> ParamSeq:
        return self.instance.params

    @property
    def K0(self) -> np.ndarray:
        return np.asarray(self.instance.K0, dtype=float)

    def solve(self, horizon: int, g0: Optional[float] = None) -> QuadraticSolution:
        return solve_quadratic_bvp(
            self.instance.g0 if g0 is None else g0,
            self.params,
            horizon=horizon,
            enforce_assumptions=self.instance.enforce_assumptions,
        )

    @cached_property
    def cutoff(self) -> CutoffData:
        return cutoff_time(self.params)

    @cached_property
    def solution(self) -> QuadraticSolution:
        return self.solve(self.instance.quadratic_horizon)

    @cached_property
    def doubled(self) -> QuadraticSolution:
        return self.solve(2 * self.instance.quadratic_horizon)

    @cached_property
    def model(self) -> PerturbationModel:
        return self.instance.model.with_cutoff(self.cutoff)

    @cached_property
    def scheme(self) -> WeightScheme:
        inst = self.instance
        return WeightScheme(self.solution.gbar, self.cutoff, inst.a, inst.a_star, inst.h)

    def build_context(
        self,
        model: Optional[PerturbationModel] = None,
        horizon: Optional[int] = None,
        K0: Optional[np.ndarray] = None,
    ) -> HomotopyContext:
        inst = self.instance
        return HomotopyContext.build(
            self.K0 if K0 is None else K0,
            inst.g0,
            self.params,
            model or inst.model,
            inst.a,
            inst.a_star,
            inst.h,
            config=self.config,
            horizon=horizon,
            enforce_assumptions=inst.enforce_assumptions,
        )

    @cached_property
    def homotopy(self) -> HomotopyContext:
        return self.build_context()

    @cached_property
    def flow(self) -> FlowResult:
        return integrate_homotopy(self.homotopy.xbar, None, self.homotopy)
