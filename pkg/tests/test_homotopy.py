# tests/test_homotopy.py
"""
Homotopy integration, the Newton corrector, backward integration and the
shooting and sweep oracles.
"""

import numpy as np
import pytest

from src.homotopy.context import HomotopyConfig, HomotopyContext, select_horizon
from src.homotopy.integrator import (
    _check_ball,
    _Normalizer,
    flow_gap,
    integrate_backward,
    integrate_homotopy,
    newton_correct,
)
from src.homotopy.oracles import shooting_solve, sweep_solve
from src.models.approximate_flow import flow_residual
from src.params.cutoff import cutoff_time
from src.params.weights import residual_norm
from src.utils.errors import BallExitError, GateError, InvalidParametersError

G0 = 0.02
ORACLE_HORIZON = 40


@pytest.fixture(scope="module")
def cubic_flow(cubic_context):
    return integrate_homotopy(cubic_context.xbar, None, cubic_context)


@pytest.fixture(scope="module")
def oracle_context(params, cubic):
    return HomotopyContext.build(np.zeros(1), G0, params, cubic, horizon=ORACLE_HORIZON)


class TestConfig:
    """Integrator settings and horizon selection."""

    @pytest.mark.parametrize(
        "changes",
        [{"integrator": "euler"}, {"ball_check": "sometimes"}, {"steps": 2}, {"b": 1.0}, {"rtol": 0.0}],
    )
    def test_invalid_settings(self, changes):
        with pytest.raises(InvalidParametersError):
            HomotopyConfig(**changes)

    def test_select_horizon(self, params):
        horizon, certified = select_horizon(G0, params, 1e-10, 4096)
        assert certified
        cutoff = cutoff_time(params)
        assert horizon > cutoff.j_omega
        assert 1.0 / 1.5 ** (horizon - cutoff.j_omega) <= 1e-10

    def test_select_horizon_reports_shortfall(self, params):
        horizon, certified = select_horizon(G0, params, 1e-10, 50)
        assert (horizon, certified) == (50, False)

    def test_context_description(self, cubic_context):
        data = cubic_context.describe()
        assert data["horizon"] == 50
        assert data["model"]["name"] == "cubic"


class TestHomotopy:
    """Forward integration from x-bar to the t = 1 flow."""

    def test_zero_perturbation_stays_at_xbar(self, zero_context):
        result = integrate_homotopy(zero_context.xbar, None, zero_context)
        assert result.passed
        assert flow_gap(result.x, zero_context.xbar, zero_context) <= 1e-14

    def test_cubic_flow_stays_in_ball(self, cubic_flow):
        assert cubic_flow.ball_pass
        assert cubic_flow.path_ball_max <= 0.5
        assert all(cubic_flow.ball_ratios[c] <= cubic_flow.ball_bounds[c] for c in cubic_flow.ball_ratios)

    def test_cubic_flow_in_ball_at_larger_coupling(self, params, cubic):
        context = HomotopyContext.build(np.zeros(1), 0.05, params, cubic, horizon=50)
        result = integrate_homotopy(context.xbar, None, context)
        assert result.ball_pass
        assert result.ball_bounds["K"] == pytest.approx(0.9 * 0.5)

    def test_cubic_flow_residual(self, cubic_flow, cubic_context):
        assert cubic_flow.residual_pass
        residual = flow_residual(1.0, cubic_flow.x, cubic_context.params, cubic_context.model)
        assert residual_norm(residual, cubic_context.scheme) <= 1e-9

    def test_boundary_conditions(self, cubic_flow, cubic_context):
        x, xbar = cubic_flow.x, cubic_context.xbar
        assert x.g[0] == pytest.approx(G0, rel=1e-12)
        assert np.allclose(x.K[0], xbar.K[0], rtol=0.0, atol=1e-14)
        assert x.z[-1] == pytest.approx(xbar.z[-1], rel=1e-9, abs=1e-18)
        assert x.mu[-1] == pytest.approx(xbar.mu[-1], rel=1e-9, abs=1e-18)

    def test_perturbation_moves_the_flow(self, cubic_flow, cubic_context):
        assert flow_gap(cubic_flow.x, cubic_context.xbar, cubic_context) > 0.0

    def test_result_serialization(self, cubic_flow):
        data = cubic_flow.to_dict()
        assert data["passed"] is True
        assert data["horizon"] == 50
        assert len(cubic_flow.csv_rows()) == 51
        assert cubic_flow.csv_header()[-4:] == ["ratio_K", "ratio_g", "ratio_z", "ratio_mu"]

    def test_newton_correction_does_not_increase_residual(self, cubic_flow, cubic_context):
        _, history = newton_correct(cubic_flow.x_raw, cubic_context, 2)
        assert history[-1] <= history[0]

    def test_fixed_step_integrator_agrees(self, params, cubic, cubic_flow, cubic_context):
        config = HomotopyConfig(integrator="rk4-fixed", steps=8)
        context = HomotopyContext.build(np.zeros(1), G0, params, cubic, config=config, horizon=50)
        result = integrate_homotopy(context.xbar, None, context)
        assert result.passed
        assert result.stats["steps"] == 8
        assert flow_gap(result.x, cubic_flow.x, cubic_context) <= 1e-6

    def test_config_argument_leaves_context_settings(self, params, cubic):
        context = HomotopyContext.build(np.zeros(1), G0, params, cubic, horizon=50)
        original = context.config
        result = integrate_homotopy(context.xbar, HomotopyConfig(integrator="rk4-fixed", steps=8), context)
        assert result.stats["integrator"] == "rk4-fixed"
        assert context.config is original
        integrate_backward(result, context, HomotopyConfig(integrator="rk4-fixed", steps=8))
        assert context.config is original

    def test_ball_exit(self, cubic_context):
        normalizer = _Normalizer(cubic_context)
        state = normalizer.to_state(cubic_context.xbar)
        assert _check_ball(normalizer, state, 0.5) == 0.0
        columns = cubic_context.width + 3
        state[3 * columns + cubic_context.width] = 0.75
        with pytest.raises(BallExitError) as exc:
            _check_ball(normalizer, state, 0.5)
        assert exc.value.exit_code == 4
        assert (exc.value.index, exc.value.clause) == (3, "g")
        assert exc.value.ratio == pytest.approx(0.75)


class TestBackward:
    """Reverse integration from t = 1 recovers x-bar."""

    def test_backward_gap(self, cubic_flow, cubic_context):
        report = integrate_backward(cubic_flow, cubic_context)
        assert report["passed"] is True
        assert report["gap"] <= report["tolerance"]


class TestOracles:
    """Independent solvers of the same boundary-value problem."""

    def test_three_solvers_agree(self, oracle_context, params, cubic):
        ctx = oracle_context
        homotopy = integrate_homotopy(ctx.xbar, None, ctx).x
        shooting = shooting_solve(np.zeros(1), G0, params, cubic, ORACLE_HORIZON, solution=ctx.solution)
        sweep = sweep_solve(np.zeros(1), G0, params, cubic, ORACLE_HORIZON, solution=ctx.solution)
        assert flow_gap(homotopy, shooting.trajectory, ctx) <= 1e-7
        assert flow_gap(homotopy, sweep.trajectory, ctx) <= 1e-7
        assert flow_gap(shooting.trajectory, sweep.trajectory, ctx) <= 1e-7

    def test_sweep_converges_without_relaxation(self, oracle_context, params, cubic):
        result = sweep_solve(
            np.zeros(1), G0, params, cubic, ORACLE_HORIZON, solution=oracle_context.solution
        )
        assert not result.relaxed
        assert result.residual <= 1e-9
        assert result.to_dict()["sweeps"] == result.sweeps

    def test_shooting_gate(self, params, cubic):
        with pytest.raises(GateError):
            shooting_solve(np.zeros(1), G0, params, cubic, 61)

    def test_solution_horizon_must_match(self, oracle_context, params, cubic):
        with pytest.raises(ValueError):
            sweep_solve(np.zeros(1), G0, params, cubic, 30, solution=oracle_context.solution)
