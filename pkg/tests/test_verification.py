# tests/test_verification.py
"""
Check registry, result statuses and the suite runner.
"""

import math

import pytest

from src.verification.context import SuiteContext
from src.verification.instances import builtin_instances, counterexample_instance, instance_by_name
from src.verification.registry import (
    CheckResult,
    CheckSpec,
    Outcome,
    available_checks,
    get_check,
    register_check,
)
from src.verification.suite import default_instances, run_check, run_suite


def result(**changes):
    base = {"name": "demo", "module": "test", "instance": "cubic", "passed": True}
    base.update(changes)
    return CheckResult(**base)


class TestCheckResult:
    """Status derivation from passed / expected / skipped / error."""

    @pytest.mark.parametrize(
        "changes, status, ok",
        [
            ({}, "pass", True),
            ({"passed": False}, "fail", False),
            ({"skipped": True}, "skipped", True),
            ({"passed": False, "expected_fail": True}, "expected-fail", True),
            ({"expected_fail": True}, "unexpected-pass", False),
            ({"error": "ValueError: boom"}, "error", False),
        ],
    )
    def test_status(self, changes, status, ok):
        r = result(**changes)
        assert r.status == status
        assert r.ok is ok

    def test_non_finite_values_serialize(self):
        data = result(measured={"ratio": math.inf, "pair": [1.0, -math.inf]}).to_dict()
        assert data["measured"] == {"ratio": "inf", "pair": [1.0, "-inf"]}


class TestRegistry:
    """Named check lookup."""

    def test_builtin_checks_registered(self):
        names = available_checks()
        assert {"forward_residual", "oracle_triangle", "s0_exactness"} <= set(names)
        assert len(names) == len(set(names))

    def test_duplicate_name(self):
        get_check("forward_residual")
        with pytest.raises(ValueError):
            register_check("forward_residual", "quadratic-flow", "duplicate")(lambda ctx: None)

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            get_check("no_such_check")

    def test_unknown_instance(self):
        with pytest.raises(KeyError):
            instance_by_name("quartic")


class TestSuite:
    """Running checks on instances."""

    def test_selected_checks_on_one_instance(self):
        cubic = instance_by_name("cubic")
        report = run_suite(
            [cubic], only=["forward_residual", "abrupt_cutoff", "constant_beta_asymptotics"]
        )
        statuses = {r.name: r.status for r in report.results}
        assert statuses == {
            "forward_residual": "pass",
            "abrupt_cutoff": "pass",
            "constant_beta_asymptotics": "skipped",
        }
        assert report.passed
        assert report.instances == ["cubic"]

    def test_counterexample_fails_as_expected(self):
        report = run_suite([counterexample_instance()])
        assert report.counts() == {"pass": 2, "expected-fail": 1}
        assert report.passed
        assert report.to_dict()["failures"] == []

    def test_unknown_check_name(self):
        with pytest.raises(KeyError):
            run_suite(builtin_instances()[:1], only=["no_such_check"])

    def test_raising_check_is_an_error_result(self):
        def broken(ctx):
            raise RuntimeError("boom")

        spec = CheckSpec("broken", "test", "always raises", broken)
        r = run_check(spec, SuiteContext(instance_by_name("zero")))
        assert r.status == "error"
        assert "RuntimeError" in r.error

    def test_outcome_fields_carry_over(self):
        spec = CheckSpec("fixed", "test", "constant outcome", lambda ctx: Outcome(False, {"x": 2.0}, 1.0, "big"))
        r = run_check(spec, SuiteContext(instance_by_name("zero")))
        assert (r.status, r.tolerance, r.message, r.measured) == ("fail", 1.0, "big", {"x": 2.0})

    def test_csv_rows(self):
        report = run_suite([instance_by_name("zero")], only=["forward_residual"])
        assert report.csv_header()[:3] == ["instance", "module", "name"]
        assert report.csv_rows()[0][:4] == ["zero", "quadratic-flow", "forward_residual", "pass"]


class TestSuiteContext:
    """Per-check random streams."""

    def test_rng_depends_on_seed_and_name(self):
        ctx = SuiteContext(instance_by_name("zero"), seed=5)
        again = SuiteContext(instance_by_name("zero"), seed=5)
        assert ctx.rng("a").random() == again.rng("a").random()
        assert ctx.rng("a").random() != ctx.rng("b").random()
        assert ctx.rng("a").random() != SuiteContext(instance_by_name("zero"), seed=6).rng("a").random()


@pytest.mark.slow
class TestDefaultSuite:
    """The full registry on the default instance set."""

    def test_default_instances_pass(self):
        report = run_suite(default_instances())
        assert [f"{r.instance}/{r.name}: {r.status}" for r in report.failures] == []
        assert report.passed

    def test_every_check_runs_on_the_builtins(self):
        report = run_suite(builtin_instances())
        ran = {r.name for r in report.results if r.status == "pass"}
        assert {
            "a3_reproducible",
            "derivative_boundedness",
            "continuity_refinement",
            "psi_contraction",
            "rho_weighted_norm",
            "a_product_bound",
            "c_inverse_structure",
            "s0_norm_independence",
        } <= ran

    def test_derivative_boundedness_on_cubic(self):
        report = run_suite([instance_by_name("cubic")], only=["derivative_boundedness"])
        (r,) = report.results
        assert r.status == "pass"
        for name in ("z", "mu"):
            assert r.measured[name]["spread"] < 0.5

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_oracle_triangle_seeds(self, seed):
        report = run_suite(builtin_instances(), only=["oracle_triangle"], seed=seed)
        assert report.counts() == {"pass": 3}


class TestSpecialInstances:
    """Instances that each target a few checks."""

    def test_abrupt_cutoff_instance(self):
        report = run_suite([instance_by_name("abrupt_cutoff")])
        assert report.counts() == {"pass": 2}
        (cutoff,) = [r for r in report.results if r.name == "abrupt_cutoff"]
        assert cutoff.measured["relative_deviation"] <= 0.2
        assert cutoff.tolerance == 0.2

    def test_bounded_ratio_instance(self):
        report = run_suite([instance_by_name("bounded_ratio")])
        assert report.counts() == {"pass": 2}

    def test_ratio_checks_skip_elsewhere(self):
        report = run_suite([instance_by_name("zero")], only=["zbar_ratio_growth", "zbar_ratio_bounded"])
        assert report.counts() == {"skipped": 2}
