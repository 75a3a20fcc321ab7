# src/services/verify_command.py
"""
verify: run the invariant suite and report every check.
"""

from typing import List

from .base.command_base import CommandBase
from ..config.run_config import config_instance
from ..verification.instances import VerificationInstance, instance_by_name
from ..verification.suite import default_instances, run_suite
from ..utils.errors import ConfigError
from ..utils.logging import logger


class VerifyCommand(CommandBase):
    """
    Writes verify_report.json and verify_summary.csv.
    """

    name = "verify"

    def instances(self) -> List[VerificationInstance]:
        section = self.config.verify
        try:
            chosen = [instance_by_name(n) for n in section.instances] if section.instances else default_instances()
        except KeyError as e:
            raise ConfigError(f"verify.instances: {e.args[0]}") from e
        if section.include_config_instance:
            chosen.append(config_instance(self.config))
        return chosen

    def execute(self) -> bool:
        section = self.config.verify
        try:
            report = run_suite(
                self.instances(),
                only=section.checks or None,
                seed=self.config.seed,
                config=self.homotopy_config,
                include_slow=section.include_slow,
            )
        except KeyError as e:
            raise ConfigError(f"verify.checks: {e.args[0]}") from e

        for failure in report.failures:
            logger.error(f"❌ {failure.instance}/{failure.name}: {failure.status}")
        self.writer.write_table(self.file_name("verify_summary.csv"), report)
        self.write_json("verify_report.json", report.to_dict())
        return report.passed
