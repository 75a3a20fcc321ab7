# src/verification/suite.py
"""
Suite runner: every registered check on every instance, failures collected.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional

from . import checks  # noqa: F401  (registers the checks)
from .context import SuiteContext
from .instances import VerificationInstance, builtin_instances, special_instances
from .registry import CheckResult, CheckSpec, available_checks, get_check
from ..homotopy.context import HomotopyConfig
from ..utils.logging import logger, stage

CSV_HEADER = ["instance", "module", "name", "status", "tolerance", "message"]


@dataclass
class SuiteReport:
    """
    All check results of one suite run.
    """

    results: List[CheckResult]
    seed: int
    instances: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.results)

    @property
    def failures(self) -> List[CheckResult]:
        return [r for r in self.results if not r.ok]

    def counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for result in self.results:
            counts[result.status] = counts.get(result.status, 0) + 1
        return counts

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "instances": list(self.instances),
            "passed": self.passed,
            "counts": self.counts(),
            "failures": [f"{r.instance}/{r.name}" for r in self.failures],
            "checks": [r.to_dict() for r in self.results],
        }

    def csv_header(self) -> List[str]:
        return list(CSV_HEADER)

    def csv_rows(self) -> List[List[Any]]:
        return [
            [r.instance, r.module, r.name, r.status, r.tolerance, r.message]
            for r in self.results
        ]


def default_instances() -> List[VerificationInstance]:
    """
    Built-in instances followed by the targeted special instances.
    """
    return builtin_instances() + special_instances()


def run_check(spec: CheckSpec, ctx: SuiteContext) -> CheckResult:
    """
    Run one check and turn its outcome (or error) into a CheckResult.
    """
    instance = ctx.instance
    expected_fail = spec.name in instance.expected_failures
    try:
        outcome = spec.func(ctx)
    except Exception as e:
        logger.error(f"❌ {instance.name}/{spec.name} raised {type(e).__name__}: {e}")
        return CheckResult(
            spec.name,
            spec.module,
            instance.name,
            passed=False,
            expected_fail=expected_fail,
            error=f"{type(e).__name__}: {e}",
        )

    result = CheckResult(
        spec.name,
        spec.module,
        instance.name,
        passed=bool(outcome.passed),
        measured=dict(outcome.measured),
        tolerance=outcome.tolerance,
        message=outcome.message,
        expected_fail=expected_fail,
        skipped=outcome.skipped,
    )
    if result.ok:
        logger.info(f"✅ {instance.name}/{spec.name}: {result.status}")
    else:
        logger.error(f"❌ {instance.name}/{spec.name}: {result.status} {result.measured}")
    return result


def _selected(only: Optional[Iterable[str]], include_slow: bool) -> List[CheckSpec]:
    names = list(only) if only else available_checks()
    specs = [get_check(name) for name in names]
    if only:
        return specs
    return [s for s in specs if include_slow or not s.slow]


def run_suite(
    instances: Optional[List[VerificationInstance]] = None,
    only: Optional[Iterable[str]] = None,
    seed: int = 0,
    config: Optional[HomotopyConfig] = None,
    include_slow: bool = True,
) -> SuiteReport:
    """
    Run the selected checks on each instance.

    Args:
        instances: Problem instances (default: built-ins plus the special instances)
        only: Check names to run; explicitly named slow checks always run
        seed: Seed shared by all random probes
        config: Homotopy settings for the flow-based checks
        include_slow: Whether to include checks flagged slow

    Returns:
        SuiteReport with one result per (instance, check) pair

    Raises:
        KeyError: If `only` names an unknown check
    """
    with stage("Verification Suite"):
        instances = instances if instances is not None else default_instances()
        specs = _selected(only, include_slow)

        results: List[CheckResult] = []
        for instance in instances:
            ctx = SuiteContext(instance, seed, config)
            chosen = [s for s in specs if instance.runs(s.name)]
            logger.info(f"Instance '{instance.name}': {len(chosen)} checks")
            for spec in chosen:
                results.append(run_check(spec, ctx))

        report = SuiteReport(results, seed, [i.name for i in instances])
        if report.passed:
            logger.info(f"✅ All {len(results)} checks ok")
        else:
            logger.error(f"❌ {len(report.failures)} of {len(results)} checks failed")
    return report
