# tests/test_sensitivity.py
"""
g0-sensitivity, derivative-bound fits and external-parameter sweeps.
"""

import numpy as np
import pytest

from src.homotopy.sensitivity import (
    SensitivityReport,
    SolveOptions,
    beta_scaling_family,
    constant_family,
    derivative_bound_fit,
    external_parameter_sweep,
    refinement_study,
    sensitivity,
)
from src.quadratic.bvp import QuadraticGate
from src.verification.instances import standard_params
from src.utils.errors import InvalidParametersError

G0 = 0.02
HORIZON = 50

SWEEP = SolveOptions(solver="sweep")
LOOSE = SolveOptions(solver="sweep", enforce_assumptions=False)


def report(g0, dz0, dmu0):
    return SensitivityReport(g0, 1e-4, HORIZON, dz0, dmu0, 0.0, 0.0)


class TestSolveOptions:
    def test_unknown_solver(self):
        with pytest.raises(InvalidParametersError):
            SolveOptions(solver="bisection")


class TestSensitivity:
    """Finite differences in g0."""

    def test_richardson_error_is_small(self, params, zero_model):
        result = sensitivity(np.zeros(1), G0, params, zero_model, 1e-3, SWEEP, horizon=HORIZON)
        assert result.horizon == HORIZON
        assert np.isfinite(result.dz0) and result.dz0 != 0.0
        assert result.error_z <= 1e-2 * abs(result.dz0)
        assert set(result.to_dict()) >= {"dz0_dg0", "dmu0_dg0", "richardson_error_z"}

    @pytest.mark.parametrize("dg0", [0.0, -1e-3, G0, 0.05])
    def test_step_must_fit_below_g0(self, params, zero_model, dg0):
        with pytest.raises(InvalidParametersError):
            sensitivity(np.zeros(1), G0, params, zero_model, dg0, SWEEP, horizon=HORIZON)


    def test_backward_stencil_at_the_gate(self, params, zero_model):
        # g0 = 0.1 sits on the gate g0 sup|beta| <= 0.1
        result = sensitivity(np.zeros(1), 0.1, params, zero_model, 1e-3, LOOSE, horizon=HORIZON)
        assert result.stencil == "backward"
        assert result.to_dict()["stencil"] == "backward"
        relaxed = SolveOptions(solver="sweep", gate=QuadraticGate(g0_beta_max=0.2), enforce_assumptions=False)
        central = sensitivity(np.zeros(1), 0.1, params, zero_model, 1e-3, relaxed, horizon=HORIZON)
        assert central.stencil == "central"
        assert result.dz0 == pytest.approx(central.dz0, rel=1e-3, abs=1e-9)
        assert result.dmu0 == pytest.approx(central.dmu0, rel=1e-3, abs=1e-9)

    def test_backward_stencil_needs_room_below_g0(self, params, zero_model):
        with pytest.raises(InvalidParametersError):
            sensitivity(np.zeros(1), 0.1, params, zero_model, 0.06, LOOSE, horizon=HORIZON)

class TestDerivativeBoundFit:
    """Uniform-bound fits over a g0 grid."""

    def test_power_law_slope(self):
        grid = [0.005, 0.01, 0.02, 0.04]
        fit = derivative_bound_fit([report(g, 1.0 / g, -2.0) for g in grid])
        assert fit["z"]["log_slope"] == pytest.approx(-1.0)
        assert fit["z"]["sup"] == pytest.approx(200.0)
        assert fit["mu"]["spread"] == 0.0
        assert fit["mu"]["log_slope"] == pytest.approx(0.0, abs=1e-9)

    def test_single_point_has_no_slope(self):
        fit = derivative_bound_fit([report(0.01, 3.0, 0.0)])
        assert fit["z"]["log_slope"] == 0.0
        assert fit["mu"]["sup"] == 0.0

    def test_empty(self):
        with pytest.raises(InvalidParametersError):
            derivative_bound_fit([])


class TestParameterSweep:
    """Continuity of the flow in an external parameter."""

    def test_constant_family_has_no_variation(self, params, zero_model):
        sweep = external_parameter_sweep(
            constant_family(params, zero_model), [0.0, 0.5, 1.0], np.zeros(1), G0, SWEEP, HORIZON
        )
        assert sweep.success_fraction == 1.0
        assert sweep.max_difference == 0.0
        assert not sweep.flagged
        assert len(sweep.csv_rows()) == 3

    def test_failing_point_is_recorded(self, params, zero_model):
        def family(m):
            return (standard_params(lam=0.9) if m > 1.0 else params), zero_model

        sweep = external_parameter_sweep(
            family, [0.5, 1.0, 1.5], np.zeros(1), G0, SWEEP, HORIZON, jobs=2
        )
        assert [p.m for p in sweep.points] == [0.5, 1.0, 1.5]
        assert sweep.failures == 1
        assert sweep.points[2].error
        assert sweep.to_dict()["success_fraction"] == pytest.approx(2.0 / 3.0)

    def test_empty_grid(self, params, zero_model):
        with pytest.raises(InvalidParametersError):
            external_parameter_sweep(constant_family(params, zero_model), [], np.zeros(1), G0, SWEEP)

    def test_report_horizon_is_capped(self, params, zero_model):
        sweep = external_parameter_sweep(
            constant_family(params, zero_model), [1.0], np.zeros(1), G0, SWEEP, HORIZON, 500
        )
        assert sweep.report_horizon == HORIZON


class TestRefinement:
    """Nested-grid shrink factors."""

    def test_differences_halve_with_the_grid(self, zero_model):
        family = beta_scaling_family(standard_params(last=20), zero_model, last=20)
        study = refinement_study(family, 0.9, 1.1, 2, np.zeros(1), G0, LOOSE, horizon=30)
        assert study.levels == [1, 2]
        assert len(study.shrink_factors) == 1
        assert study.passed
        assert study.to_dict()["passed"] is True

    def test_needs_two_levels(self, params, zero_model):
        with pytest.raises(InvalidParametersError):
            refinement_study(constant_family(params, zero_model), 0.0, 1.0, 1, np.zeros(1), G0)
