# tests/test_models.py
"""
Perturbation models, the model registry, domains, A3 sampling and x-bar.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.models.approximate_flow import (
    flow_residual,
    kbar_iterate,
    pad_k0,
    phi_step,
    rho_sequence,
    xbar_assemble,
    xbar_dg0_certificate,
)
from src.models.base import KDims, ModelEnvelope
from src.models.builtin import CubicMonomial, LinearContraction, RandomPolynomial, ZeroPerturbation
from src.models.domain import DomainSpec, in_domain
from src.models.flow_sequence import VTriple
from src.models.registry import available_models, create_model, register_model
from src.params.a3 import check_A3
from src.params.cutoff import cutoff_time
from src.quadratic.flow import quadratic_step
from src.utils.errors import ConfigError, InvalidParametersError, ModelViolatesA3Error

G0 = 0.02


class TestBuiltinModels:
    """Closed-form models and their Jacobians."""

    def test_cubic_values(self, params):
        model = CubicMonomial(c_rho=0.2, c_psi=0.3, kappa0=0.1, cutoff=cutoff_time(params))
        K = np.array([0.5])
        V = np.array([0.1, 0.0, 0.0])
        chi = 2.0**-6
        assert model.psi(45, K, V)[0] == pytest.approx(0.05 + 0.3 * chi * 1e-3)
        assert np.allclose(model.rho(45, K, V), [0.2 * chi * 1e-3, 0.0, 0.0], rtol=1e-12, atol=0.0)

    def test_cubic_envelope(self):
        envelope = CubicMonomial(c_rho=0.1, c_psi=-0.2).envelope
        assert (envelope.kappa, envelope.R, envelope.M) == pytest.approx((0.15, 0.4, 1.0))

    def test_zero_model(self, rng):
        K, V = rng.normal(size=(4, 2)), rng.normal(size=(4, 3))
        assert not np.any(ZeroPerturbation().evaluate(K, V))

    def test_linear_model_ignores_v(self, rng):
        model = LinearContraction(kappa0=0.2)
        K, V = rng.normal(size=(3, 1)), rng.normal(size=(3, 3))
        assert np.allclose(model.psi_all(K, V), 0.2 * K)
        assert not np.any(model.rho_all(K, V))

    @pytest.mark.parametrize(
        "model",
        [CubicMonomial(c_rho=0.3, c_psi=0.2), RandomPolynomial(seed=7), LinearContraction()],
        ids=["cubic", "random-polynomial", "linear"],
    )
    def test_analytic_jacobian_matches_finite_differences(self, model, rng):
        K = rng.uniform(-1e-5, 1e-5, size=(5, 2))
        V = np.column_stack([rng.uniform(0.01, 0.03, 5), rng.uniform(-1e-3, 1e-3, (5, 2))])
        radii = np.tile([1e-5, 1e-5, 1e-3, 1e-3, 1e-3], (5, 1))
        analytic = model.analytic_jacobian(3, K, V)
        numeric = model.fd_jacobian(K, V, 3, radii)
        assert np.allclose(analytic, numeric, rtol=1e-5, atol=1e-10)

    def test_random_polynomial_is_seeded(self):
        first, second = RandomPolynomial(seed=3), RandomPolynomial(seed=3)
        assert np.array_equal(first.kappa, second.kappa)
        assert first.envelope == second.envelope

    def test_inactive_coordinates_are_zeroed(self):
        model = CubicMonomial(k_dims=KDims(default=2, overrides={2: 1}))
        K = np.ones((3, 2))
        V = np.full((3, 3), 0.02)
        out = model.psi_all(K, V, 0)
        # row 1 lands on scale 2, which has a single K coordinate
        assert out[1, 1] == 0.0
        assert out[0, 1] != 0.0

    def test_kdims(self):
        dims = KDims(default=1, overrides={3: 4, 100: 2})
        assert dims.width(10) == 4
        assert dims.mask(10)[3].tolist() == [True] * 4
        with pytest.raises(ValueError):
            KDims(default=-1)


class TestRegistry:
    """Model construction by name."""

    def test_builtin_names(self):
        assert {"zero", "linear", "cubic", "random-polynomial"} <= set(available_models())

    def test_create_with_coefficients(self):
        model = create_model("cubic", {"c_rho": 0.05})
        assert isinstance(model, CubicMonomial) and model.c_rho == 0.05

    def test_unknown_name(self):
        with pytest.raises(ConfigError, match="model.name"):
            create_model("quartic")

    def test_bad_coefficients(self):
        with pytest.raises(ConfigError, match="model.coefficients"):
            create_model("linear", {"c_rho": 1.0})

    def test_duplicate_registration(self):
        with pytest.raises(ValueError):
            register_model("zero", ZeroPerturbation)


class TestDomain:
    """Per-scale domains around V-bar."""

    def test_rejects_bad_radii(self, solution):
        with pytest.raises(InvalidParametersError):
            DomainSpec(solution, 1.0, 0.0)
        with pytest.raises(InvalidParametersError):
            DomainSpec(solution, 1.0, 1.0, a_star=2.0)

    def test_quadratic_solution_is_inside(self, solution):
        dom = DomainSpec(solution, 1.0, 1.0)
        assert dom.first_violation(solution.as_flow_sequence()) is None

    @settings(max_examples=25, deadline=None)
    @given(j=st.integers(0, 199), seed=st.integers(0, 2**31 - 1))
    def test_samples_lie_in_domain(self, solution, j, seed):
        dom = DomainSpec(solution, 1.0, 1.0)
        K, V = dom.sample(j, 20, 2, np.random.default_rng(seed))
        for k_row, v_row in zip(K, V):
            assert np.all(dom.clause_ratios(k_row, v_row, j) <= 1.0)

    def test_violation_is_reported(self, solution):
        dom = DomainSpec(solution, 1.0, 1.0)
        V = solution.vbar.copy()
        V[7, 1] += 10.0 * dom.radii()[7, 2]
        x = solution.as_flow_sequence().replace(V=V)
        j, clause, ratio = dom.first_violation(x)
        assert (j, clause) == (7, "z")
        assert ratio == pytest.approx(10.0)


class TestA3:
    """Monte-Carlo estimates of (kappa, R, M)."""

    def test_cubic_passes(self, cubic, scheme, params, solution):
        report = check_A3(cubic, scheme, params, sample_count=50, solution=solution)
        assert report.passed
        assert report.kappa_hat == pytest.approx(0.15)

    def test_cubic_higher_derivatives_on_the_full_horizon(self, cubic, scheme, params, solution):
        report = check_A3(cubic, scheme, params, solution=solution)
        assert max(report.sampled_indices) >= 150
        assert report.M_by_clause["third"] <= cubic.envelope.M
        assert report.M_by_clause["second"] <= cubic.envelope.M
        assert report.passed

    def test_zero_model_passes(self, zero_model, scheme, params, solution):
        report = check_A3(zero_model, scheme, params, sample_count=20, solution=solution)
        assert report.passed
        assert report.M_hat == 0.0

    def test_understated_kappa_fails(self, cubic, scheme, params, solution):
        report = check_A3(
            cubic, scheme, params, sample_count=20, solution=solution,
            declared=ModelEnvelope(0.01, 0.2, 0.5),
        )
        assert report.constraints_pass
        assert not report.estimates_pass

    def test_infeasible_declaration_fails(self, zero_model, scheme, params, solution):
        # kappa must stay below 1/Omega
        report = check_A3(
            zero_model, scheme, params, sample_count=10, solution=solution,
            declared=ModelEnvelope(0.6, 0.1, 0.1),
        )
        assert not report.constraints_pass
        assert report.to_dict()["passed"] is False


class TestApproximateFlow:
    """x-bar assembly and the flow residual."""

    def test_xbar_of_zero_model(self, params, zero_model, solution):
        x = xbar_assemble(np.zeros(1), G0, params, zero_model, solution=solution)
        assert not np.any(x.K)
        assert np.array_equal(x.V, solution.vbar)

    def test_xbar_binds_model_to_cutoff(self, params, cubic, solution):
        unbound = xbar_assemble(np.zeros(1), G0, params, cubic, solution=solution)
        bound = xbar_assemble(np.zeros(1), G0, params, cubic.with_cutoff(solution.cutoff), solution=solution)
        assert np.array_equal(unbound.K, bound.K)
        assert unbound.K[150, 0] < cubic.c_psi * solution.gbar[150] ** 3

    def test_linear_kbar_decays(self, params, linear_model, solution):
        x = xbar_assemble(np.array([1e-7]), G0, params, linear_model, solution=solution)
        assert x.K[3, 0] == pytest.approx(1e-7 * 0.15**3)

    def test_kbar_containment_failure(self, params, linear_model, solution):
        with pytest.raises(ModelViolatesA3Error) as exc:
            xbar_assemble(np.array([1.0]), G0, params, linear_model, solution=solution)
        assert exc.value.index == 0

    def test_xbar_is_a_t0_flow(self, params, cubic, solution):
        model = cubic.with_cutoff(solution.cutoff)
        x = xbar_assemble(np.zeros(1), G0, params, model, solution=solution)
        residual = flow_residual(0.0, x, params, model)
        assert np.max(np.abs(residual.stacked())) < 1e-13

    def test_rho_sequence_is_target_indexed(self, params, cubic, solution):
        model = cubic.with_cutoff(solution.cutoff)
        x = xbar_assemble(np.zeros(1), G0, params, model, solution=solution)
        rho = rho_sequence(x, model)
        assert not np.any(rho.V[0])
        assert rho.g[1] == pytest.approx(model.rho(0, x.K[0], x.V[0])[0])
        assert not np.any(rho.K)

    def test_pad_k0(self):
        assert pad_k0([1.0], 3).tolist() == [1.0, 0.0, 0.0]
        with pytest.raises(ValueError):
            pad_k0([1.0, 2.0], 1)

    def test_xbar_dg0_certificate(self, params, zero_model):
        report = xbar_dg0_certificate(np.zeros(1), G0, params, zero_model, horizon=100)
        assert report["envelope"] == pytest.approx(1.0 / (G0**2 * abs(np.log(G0))))
        assert np.isfinite(report["ratio"]) and report["ratio"] > 0.0


class TestSingleScale:
    """One-scale maps and the pointwise domain test."""

    def test_vbar_rows_are_in_domain(self, solution):
        dom = DomainSpec(solution, 1.0, 1.0)
        for j in (0, 40, 200):
            assert in_domain((np.zeros(1), VTriple.from_array(solution.vbar[j])), j, dom)

    def test_shifted_row_leaves_domain(self, solution):
        dom = DomainSpec(solution, 1.0, 1.0)
        v = solution.vbar[5].copy()
        v[2] += 2.0 * dom.radii()[5, 3]
        assert not in_domain((np.zeros(1), VTriple.from_array(v)), 5, dom)
        k_out = np.array([2.0 * dom.radii()[5, 0]])
        assert not in_domain((k_out, VTriple.from_array(solution.vbar[5])), 5, dom)

    def test_phi_step_of_zero_model_follows_vbar(self, params, zero_model, solution):
        for j in (0, 39, 120):
            _, v = phi_step(1.0, (np.zeros(1), VTriple.from_array(solution.vbar[j])), j, params, zero_model)
            assert np.allclose(v.as_array(), solution.vbar[j + 1], rtol=1e-9, atol=1e-15)

    def test_phi_step_at_t0_is_quadratic(self, params, cubic, solution):
        model = cubic.with_cutoff(solution.cutoff)
        v = VTriple.from_array(solution.vbar[3])
        _, out = phi_step(0.0, (np.array([1e-9]), v), 3, params, model)
        assert np.array_equal(out.as_array(), quadratic_step(v, params.at(3)).as_array())

    def test_kbar_iterate_contracts(self, linear_model, solution):
        dom = DomainSpec(solution, 1.0, 1.0, a_star=0.5)
        K = kbar_iterate(np.array([1e-7]), solution, linear_model, dom)
        assert K.shape == (solution.horizon + 1, 1)
        assert K[2, 0] == pytest.approx(1e-7 * 0.15**2)
