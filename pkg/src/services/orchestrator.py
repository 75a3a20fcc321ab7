# src/services/orchestrator.py
"""
Orchestrator mapping subcommands to command services and outcomes to exit codes.
"""

from enum import Enum
from typing import Dict, Optional, Type, Union

from .base.command_base import CommandBase
from .flow_command import FlowCommand
from .oracle_command import OracleCompareCommand
from .quadratic_command import QuadraticCommand
from .sweep_command import SweepCommand
from .verify_command import VerifyCommand
from ..config.run_config import RunConfig
from ..utils.errors import RGFlowError
from ..utils.logging import logger
from ..utils.report_writer import ReportWriter


class CommandType(Enum):
    """
    Available subcommands.
    """

    QUADRATIC = "quadratic"
    FLOW = "flow"
    VERIFY = "verify"
    SWEEP = "sweep"
    ORACLE_COMPARE = "oracle-compare"


class ExitCode:
    OK = 0
    CERTIFICATE_FAILURE = 1
    CONFIG_ERROR = 2
    SOLVER_ERROR = 3
    BALL_EXIT = 4


COMMANDS: Dict[CommandType, Type[CommandBase]] = {
    CommandType.QUADRATIC: QuadraticCommand,
    CommandType.FLOW: FlowCommand,
    CommandType.VERIFY: VerifyCommand,
    CommandType.SWEEP: SweepCommand,
    CommandType.ORACLE_COMPARE: OracleCompareCommand,
}


class CommandOrchestrator:
    """
    Runs one subcommand against a validated config and returns its exit status.
    """

    def __init__(self, config: RunConfig, writer: Optional[ReportWriter] = None) -> None:
        """
        Initialize the orchestrator.

        Args:
            config: Validated run configuration
            writer: Artefact writer (default: one on config.output.directory)
        """
        self.config = config
        self.writer = writer

    def command(self, command_type: CommandType) -> CommandBase:
        writer = self.writer or ReportWriter(self.config.output.directory, command_type.value)
        return COMMANDS[command_type](self.config, writer)

    def run(self, command_type: Union[CommandType, str]) -> int:
        """
        Run a subcommand.

        Solver and config errors map to their exit_code; an unexpected
        exception is logged and reported as a solver error.

        Returns:
            0 when every certificate passes, 1 on certificate failure, else the error's code
        """
        command_type = CommandType(command_type)
        try:
            passed = self.command(command_type).run()
        except RGFlowError as e:
            logger.error(f"{type(e).__name__}: {e}")
            return e.exit_code
        except Exception as e:
            logger.error(f"Unexpected error in {command_type.value}: {e}")
            return ExitCode.SOLVER_ERROR
        return ExitCode.OK if passed else ExitCode.CERTIFICATE_FAILURE


def create_orchestrator(config: RunConfig) -> CommandOrchestrator:
    """
    Factory function to create an orchestrator writing below config.output.directory.
    """
    return CommandOrchestrator(config)
