# src/verification/registry.py
"""
Name -> check registry for the verification suite.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, NamedTuple, Optional

from ..utils.logging import logger


@dataclass
class CheckResult:
    """
    Outcome of one named invariant on one instance.

    measured holds the fitted constants and observed ratios; tolerance is the
    threshold they were compared with.
    """

    name: str
    module: str
    instance: str
    passed: bool
    measured: Dict[str, Any] = field(default_factory=dict)
    tolerance: Optional[float] = None
    message: str = ""
    expected_fail: bool = False
    skipped: bool = False
    error: Optional[str] = None

    @property
    def status(self) -> str:
        if self.error is not None:
            return "error"
        if self.skipped:
            return "skipped"
        if self.expected_fail:
            return "expected-fail" if not self.passed else "unexpected-pass"
        return "pass" if self.passed else "fail"

    @property
    def ok(self) -> bool:
        return self.status in ("pass", "skipped", "expected-fail")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "module": self.module,
            "instance": self.instance,
            "status": self.status,
            "ok": self.ok,
            "measured": {k: _json_value(v) for k, v in self.measured.items()},
            "tolerance": _json_value(self.tolerance),
            "message": self.message,
            "error": self.error,
        }


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    return value


class Outcome(NamedTuple):
    """
    What a check function returns.
    """

    passed: bool
    measured: Dict[str, Any]
    tolerance: Optional[float] = None
    message: str = ""
    skipped: bool = False


def not_applicable(reason: str) -> Outcome:
    return Outcome(True, {}, None, reason, skipped=True)


@dataclass(frozen=True)
class CheckSpec:
    """
    A registered check: the module it belongs to and its callable.

    The callable receives a SuiteContext and returns an Outcome.
    """

    name: str
    module: str
    description: str
    func: Callable[..., Any]
    slow: bool = False


_CHECKS: Dict[str, CheckSpec] = {}


def register_check(
    name: str, module: str, description: str, slow: bool = False
) -> Callable[[Callable[..., Any]], Callable[..., Any]]:
    """
    Decorator registering a check under a unique name.

    Raises:
        ValueError: If the name is already registered
    """

    def decorate(func: Callable[..., Any]) -> Callable[..., Any]:
        if name in _CHECKS:
            raise ValueError(f"Check '{name}' is already registered")
        _CHECKS[name] = CheckSpec(name, module, description, func, slow)
        logger.debug(f"Registered check '{name}'")
        return func

    return decorate


def get_check(name: str) -> CheckSpec:
    """
    Raises:
        KeyError: On an unknown check name
    """
    if name not in _CHECKS:
        raise KeyError(f"Unknown check '{name}' (available: {', '.join(available_checks())})")
    return _CHECKS[name]


def available_checks() -> List[str]:
    """
    Registered check names in registration order.
    """
    return list(_CHECKS)
