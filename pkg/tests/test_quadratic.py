# tests/test_quadratic.py
"""
The quadratic boundary-value solver, its certificates and the A1/A2 checkers.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.params.assumptions import check_A1, check_A2
from src.params.cutoff import cutoff_time
from src.params.sequences import CoefficientSequence, ParamSeq, StepCoefficients, TailRule
from src.models.flow_sequence import VTriple
from src.quadratic.bvp import QuadraticGate, iterate_gbar, solve_mubar, solve_quadratic_bvp, solve_zbar
from src.quadratic.certificates import (
    abrupt_cutoff_check,
    asymptotic_ratio_report,
    beta_monotonicity,
    envelope_stability,
    forward_residual,
    initial_condition_stability,
    product_asymptotic,
    riemann_sum_check,
    sum_certificate,
    zbar_ratio_growth,
    zeta_product_bound,
)
from src.quadratic.derivatives import gbar_derivatives
from src.quadratic.flow import quadratic_step
from src.verification.instances import (
    abrupt_cutoff_instance,
    bounded_ratio_instance,
    counterexample_instance,
    standard_params,
)
from src.utils.errors import (
    ExpansivityViolatedError,
    GateError,
    GZeroTooLargeError,
    InvalidParametersError,
)

G0 = 0.02


class TestIterateGbar:
    """Forward g recursion."""

    def test_zero_beta_is_constant(self):
        assert np.all(iterate_gbar(0.1, ParamSeq(2.0), 20) == 0.1)

    def test_rejects_non_positive_g0(self, params):
        with pytest.raises(InvalidParametersError):
            iterate_gbar(0.0, params, 5)

    def test_positivity_loss(self):
        params = ParamSeq.from_constants(omega=2.0, beta=1.0)
        with pytest.raises(GZeroTooLargeError) as exc:
            iterate_gbar(2.0, params, 3)
        assert exc.value.index == 1

    @settings(max_examples=40)
    @given(g0=st.floats(1e-4, 0.1), steps=st.integers(1, 200))
    def test_decreasing_under_positive_beta(self, g0, steps):
        gbar = iterate_gbar(g0, ParamSeq.from_constants(omega=2.0, beta=1.0), steps)
        assert np.all(np.diff(gbar) < 0.0)
        assert np.all(gbar > 0.0)


class TestSolveQuadratic:
    """Solver modes, gates and error paths."""

    def test_adaptive_solution_is_certified(self, params):
        sol = solve_quadratic_bvp(G0, params)
        assert sol.certified
        assert sol.tail_certificate <= sol.tol

    def test_fixed_horizon(self, solution):
        assert solution.horizon == 200
        assert solution.vbar.shape == (201, 3)
        assert solution.alpha == pytest.approx(1.0 / 1.5)

    def test_forward_residual(self, solution, params):
        assert forward_residual(solution, params) <= 1e-13

    def test_gate_rejects_large_g0(self, params):
        with pytest.raises(GateError):
            solve_quadratic_bvp(0.2, params, horizon=50)

    def test_gate_rejects_slow_contraction(self):
        params = standard_params(lam=1.2)
        with pytest.raises(GateError):
            solve_quadratic_bvp(G0, params, horizon=50, gate=QuadraticGate(alpha_max=0.75))

    def test_lambda_at_most_one_is_not_expanding(self):
        params = standard_params(lam=0.9)
        with pytest.raises(ExpansivityViolatedError):
            solve_quadratic_bvp(G0, params, horizon=50, enforce_assumptions=False)

    def test_vanishing_beta_fails_assumptions(self):
        with pytest.raises(InvalidParametersError):
            solve_quadratic_bvp(G0, ParamSeq(2.0), horizon=50)

    def test_vanishing_beta_without_assumptions(self):
        sol = solve_quadratic_bvp(G0, ParamSeq(2.0), horizon=50, enforce_assumptions=False)
        assert np.all(sol.gbar == G0)
        assert np.all(sol.zbar == 0.0)
        assert np.all(sol.mubar == 0.0)

    def test_non_positive_g0(self, params):
        with pytest.raises(InvalidParametersError):
            solve_quadratic_bvp(-0.01, params, horizon=10)

    def test_serialization(self, solution):
        data = solution.to_dict()
        assert data["horizon"] == 200
        assert data["cutoff"]["j_omega"] == 40
        assert solution.csv_header() == ["j", "gbar", "zbar", "mubar", "chi"]
        assert len(solution.csv_rows()) == 201


class TestCertificates:
    """Observed ratios behind the quadratic flow bounds."""

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_riemann_sum(self, solution, params, n):
        assert riemann_sum_check(n, solution, params).passed

    def test_product_asymptotic(self, solution, params):
        report = product_asymptotic(1.0, 0, solution, params)
        assert report.samples
        assert report.passed
        assert report.c > 0.0

    def test_product_with_zero_exponent(self, solution, params):
        report = product_asymptotic(0.0, 5, solution, params)
        assert report.c == 1.0 and report.residual_bound == 0.0

    def test_sum_certificate_is_stable(self, solution, params):
        cert = sum_certificate(2, 0, 0, 100, solution, cutoff_time(params))
        assert cert.ratio > 0.0
        assert cert.stable

    def test_sum_certificate_rejects_bad_range(self, solution, params):
        with pytest.raises(ValueError):
            sum_certificate(0.5, 0, 0, 10, solution, cutoff_time(params))

    def test_abrupt_cutoff_plateau(self, solution, params):
        report = abrupt_cutoff_check(solution, params)
        assert report is not None
        assert report.last_index == 40
        assert report.bit_exact

    def test_abrupt_cutoff_needs_vanishing_tail(self, constant_params):
        sol = solve_quadratic_bvp(G0, constant_params, horizon=100, enforce_assumptions=False)
        assert abrupt_cutoff_check(sol, constant_params) is None

    def test_abrupt_cutoff_plateau_near_reciprocal(self):
        instance = abrupt_cutoff_instance()
        sol = solve_quadratic_bvp(
            instance.g0, instance.params, horizon=instance.quadratic_horizon, enforce_assumptions=False
        )
        report = abrupt_cutoff_check(sol, instance.params)
        assert report.last_index == 100
        assert report.bit_exact
        assert report.reference == pytest.approx(0.01)
        assert report.relative_deviation <= instance.plateau_tolerance

    def test_constant_beta_asymptotics(self, constant_params):
        sol = solve_quadratic_bvp(G0, constant_params, horizon=10_000, enforce_assumptions=False)
        report = asymptotic_ratio_report(sol, constant_params)
        assert report is not None
        assert report.passed
        assert asymptotic_ratio_report(sol, standard_params()) is None

    def test_beta_monotonicity(self, params, rng):
        report = beta_monotonicity(G0, params, 100, rng, trials=20)
        assert report["max_relative_increase"] <= 1e-14

    def test_initial_condition_stability(self, params):
        report = initial_condition_stability(G0, 1e-3, params, 200)
        assert 0.0 <= report["fitted_C"] < 100.0

    def test_zeta_product(self, solution, params):
        # zeta <= 0 everywhere, so every factor is at most one
        assert 0.0 < zeta_product_bound(solution.gbar, params) <= 1.0

    def test_zbar_envelope_stable(self, params):
        assert envelope_stability(G0, params, 200).change < 0.05

    def test_zbar_envelope_grows_on_counterexample(self):
        instance = counterexample_instance()
        report = envelope_stability(
            instance.g0, instance.params, instance.quadratic_horizon, enforce_assumptions=False
        )
        assert report.change >= 0.05

    def test_zbar_ratio_grows_on_counterexample(self):
        instance = counterexample_instance()
        J = instance.quadratic_horizon
        report = zbar_ratio_growth(
            instance.g0, instance.params, [J, 2 * J, 4 * J, 8 * J], enforce_assumptions=False
        )
        assert report.increasing
        assert report.ratios[-1] > 3.0
        # sup |z-bar|/g-bar grows like log J
        assert 0.5 < report.log_slope < 1.5

    def test_zbar_ratio_bounded_for_negative_zeta(self):
        instance = bounded_ratio_instance()
        J = instance.quadratic_horizon
        report = zbar_ratio_growth(
            instance.g0, instance.params, [J, 2 * J, 4 * J, 8 * J], enforce_assumptions=False
        )
        assert max(report.ratios) < 1.0
        assert report.to_dict()["horizons"] == [J, 2 * J, 4 * J, 8 * J]


class TestDerivatives:
    """g0-derivatives of the quadratic solution."""

    def test_dg_matches_finite_difference(self, solution, params):
        bundle = gbar_derivatives(solution, params)
        eps = 1e-7
        fd = (iterate_gbar(G0 + eps, params, 200) - iterate_gbar(G0 - eps, params, 200)) / (2 * eps)
        assert np.allclose(bundle.dg, fd, rtol=1e-5)

    def test_dz_matches_finite_difference(self, params):
        eps = 1e-6
        plus = solve_quadratic_bvp(G0 + eps, params, horizon=200)
        minus = solve_quadratic_bvp(G0 - eps, params, horizon=200)
        bundle = gbar_derivatives(solve_quadratic_bvp(G0, params, horizon=200), params)
        fd = (plus.zbar - minus.zbar) / (2 * eps)
        assert np.allclose(bundle.dz, fd, rtol=1e-4, atol=1e-12)

    def test_envelope_constants_are_finite(self, solution, params):
        constants = gbar_derivatives(solution, params).envelope_constants(solution)
        assert set(constants) == {"gbar", "z", "mu"}
        assert all(np.isfinite(v) for v in constants.values())


class TestAssumptions:
    """A1 and A2 reports."""

    def test_standard_params_pass(self, params):
        cutoff = cutoff_time(params)
        assert check_A1(params, 200, cutoff).passed
        assert check_A2(params, cutoff, 200).passed

    def test_zero_beta_fails_A1(self):
        params = ParamSeq(2.0)
        assert not check_A1(params, 100).passed

    def test_lambda_clause(self):
        params = standard_params().replace(lam=CoefficientSequence([2.0, 0.5], TailRule.constant(2.0)))
        report = check_A2(params, cutoff_time(params), 100)
        assert not report.lambda_pass
        assert report.lambda_offending_index == 1

    def test_report_is_json_ready(self, params):
        data = check_A2(params, cutoff_time(params), 100).to_dict()
        assert data["passed"] is True


class TestQuadraticMap:
    """Single steps and the separate z-bar / mu-bar solves."""

    def test_step_by_hand(self):
        c = StepCoefficients(beta=1.0, eta=0.5, gamma=0.5, lam=2.0, theta=0.5, zeta=-0.5, ups_gg=1.0)
        out = quadratic_step(VTriple(0.1, 0.01, 0.02), c)
        assert (out.g, out.z, out.mu) == pytest.approx((0.09, 0.0055, 0.085))

    def test_step_matches_solution(self, solution, params):
        for j in (0, 39, 40, 150):
            out = quadratic_step(VTriple.from_array(solution.vbar[j]), params.at(j))
            assert np.allclose(out.as_array(), solution.vbar[j + 1], rtol=1e-9, atol=1e-15)

    def test_separate_solves_agree(self, solution, params):
        zbar = solve_zbar(solution.gbar, params)
        assert np.allclose(zbar, solution.zbar, rtol=1e-12, atol=0.0)
        mubar = solve_mubar(solution.gbar, zbar, params)
        assert np.allclose(mubar, solution.mubar, rtol=1e-8, atol=1e-14)

    def test_mubar_rejects_length_mismatch(self, solution, params):
        with pytest.raises(ValueError):
            solve_mubar(solution.gbar, solution.zbar[:-1], params)
