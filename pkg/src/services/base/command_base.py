# src/services/base/command_base.py
"""
Base class for the CLI commands.
Provides shared functionality:
- Building the problem objects from the run config
- Writing artefacts through one ReportWriter
- The run lifecycle with start/complete banners
"""

from abc import ABC, abstractmethod
from typing import Any, Dict

import numpy as np

from ...config.run_config import (
    RunConfig,
    build_gate,
    build_homotopy_config,
    build_K0,
    build_model,
    build_params,
)
from ...homotopy.context import HomotopyConfig
from ...models.base import PerturbationModel
from ...params.sequences import ParamSeq
from ...quadratic.bvp import QuadraticGate
from ...utils.logging import logger, stage
from ...utils.report_writer import ReportWriter


class CommandBase(ABC):
    """
    One subcommand run: execute() does the work and reports whether every
    certificate passed.
    """

    name = "command"

    def __init__(self, config: RunConfig, writer: ReportWriter) -> None:
        """
        Initialize the command.

        Args:
            config: Validated run configuration
            writer: Destination of the artefacts
        """
        self.config = config
        self.writer = writer

    @property
    def params(self) -> ParamSeq:
        return build_params(self.config)

    @property
    def model(self) -> PerturbationModel:
        return build_model(self.config)

    @property
    def K0(self) -> np.ndarray:
        return build_K0(self.config)

    @property
    def gate(self) -> QuadraticGate:
        return build_gate(self.config)

    @property
    def homotopy_config(self) -> HomotopyConfig:
        return build_homotopy_config(self.config)

    def file_name(self, stem: str) -> str:
        return self.config.output.name(stem)

    def write_json(self, stem: str, result: Dict[str, Any]) -> None:
        self.writer.write_json(
            self.file_name(stem), result, {"seed": self.config.seed, "config": self.config.model_dump(by_alias=True)}
        )

    @abstractmethod
    def execute(self) -> bool:
        """
        Run the command and write its files.
        Must be implemented by subclasses.

        Returns:
            True iff every certificate of the run passed
        """
        pass

    def run(self) -> bool:
        """
        Main execution flow: stage banners around execute(); errors are logged and re-raised.
        """
        title = self.name.capitalize()
        with stage(title):
            passed = self.execute()
            if passed:
                logger.info(f"✅ {title}: all certificates pass")
            else:
                logger.warning(f"⚠️ {title}: some certificates failed")
        return passed
