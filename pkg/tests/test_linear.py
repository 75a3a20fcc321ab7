# tests/test_linear.py
"""
Frozen blocks, S0, the W correction, S and the operator-norm estimator.
"""

import numpy as np
import pytest

from src.linear.banded_oracle import solve_frozen
from src.linear.blocks import build_L
from src.linear.neumann import SolveReport, apply_S, measured_contraction
from src.linear.norms import operator_norm_estimate
from src.linear.s0 import apply_S0, s0_equation_residual
from src.linear.w_operator import build_W, check_ball
from src.models.flow_sequence import FlowSequence
from src.params.weights import expand_weights, weighted_norm
from src.utils.errors import DomainViolationError, ExpansivityViolatedError
from src.verification.instances import standard_params


def random_forcing(context, rng, k_only=False, v_only=False):
    """Target-indexed forcing with unit residual-weighted size; entry 0 is zero."""
    scale = expand_weights(context.scheme.residual_weights(), context.width).copy()
    scale[0] = 0.0
    data = rng.uniform(-1.0, 1.0, scale.shape) * scale
    if k_only:
        data[:, context.width :] = 0.0
    if v_only:
        data[:, : context.width] = 0.0
    return FlowSequence.from_stacked(data, context.width)


class TestBlocks:
    """The frozen linearization around x-bar."""

    def test_block_shapes(self, cubic_context):
        blocks = cubic_context.blocks
        assert blocks.horizon == 50
        assert blocks.dense().shape == (51, blocks.n, blocks.n)
        assert blocks.alpha < 1.0

    def test_mu_direction_expands(self, cubic_context):
        assert np.all(cubic_context.blocks.lambda_ring > 1.0)

    def test_a_product(self, cubic_context):
        blocks = cubic_context.blocks
        assert blocks.a_product(5, 4) == 1.0
        assert blocks.a_product(2, 4) == pytest.approx(float(np.prod(blocks.a[2:5])))
        assert 0.0 < blocks.a_product(0, 49) <= 1.0

    def test_c_inverse_product(self, cubic_context):
        blocks = cubic_context.blocks
        assert np.array_equal(blocks.c_inverse_product(4, 3), np.eye(2))
        product = blocks.c_inverse_product(2, 3)
        assert np.allclose(product @ blocks.C[3] @ blocks.C[2], np.eye(2))
        # the inverse products stay bounded since C expands in mu and is near one in z
        assert np.all(np.isfinite(blocks.c_inverse_product(0, 49)))

    def test_apply_is_target_indexed(self, cubic_context, rng):
        y = random_forcing(cubic_context, rng)
        Ly = cubic_context.blocks.apply(y)
        assert not np.any(Ly.stacked()[0])
        assert not np.any(Ly.K)


class TestS0:
    """Exact solver of the frozen problem."""

    def test_solves_the_equation(self, cubic_context, rng):
        r = random_forcing(cubic_context, rng)
        y = apply_S0(r, cubic_context.blocks)
        assert np.max(s0_equation_residual(y, r, cubic_context.blocks)) <= 1e-12

    def test_boundary_conditions(self, cubic_context, rng):
        y = apply_S0(random_forcing(cubic_context, rng), cubic_context.blocks)
        assert not np.any(y.K[0]) and y.g[0] == 0.0
        assert y.z[-1] == 0.0 and y.mu[-1] == 0.0

    def test_block_diagonal(self, cubic_context, rng):
        blocks = cubic_context.blocks
        y_k = apply_S0(random_forcing(cubic_context, rng, k_only=True), blocks)
        y_v = apply_S0(random_forcing(cubic_context, rng, v_only=True), blocks)
        assert not np.any(y_k.V)
        assert not np.any(y_v.K)

    def test_linear_in_forcing(self, cubic_context, rng):
        blocks = cubic_context.blocks
        r1, r2 = random_forcing(cubic_context, rng), random_forcing(cubic_context, rng)
        combined = apply_S0(r1 + 2.0 * r2, blocks)
        separate = apply_S0(r1, blocks) + 2.0 * apply_S0(r2, blocks)
        scheme = cubic_context.scheme
        assert weighted_norm(combined - separate, scheme) <= 1e-10 * weighted_norm(combined, scheme)

    @pytest.mark.parametrize("dense", [False, True], ids=["banded", "dense"])
    def test_matches_global_solve(self, cubic_context, rng, dense):
        r = random_forcing(cubic_context, rng)
        y = apply_S0(r, cubic_context.blocks)
        oracle = solve_frozen(r, cubic_context.blocks, dense=dense)
        scheme = cubic_context.scheme
        assert weighted_norm(y - oracle, scheme) <= 1e-8 * max(weighted_norm(y, scheme), 1.0)

    def test_rejects_horizon_mismatch(self, cubic_context):
        with pytest.raises(ValueError):
            apply_S0(FlowSequence.zeros(10), cubic_context.blocks)

    def test_operator_norm_is_finite(self, cubic_context):
        blocks = cubic_context.blocks
        norm = operator_norm_estimate(
            lambda r: apply_S0(r, blocks), cubic_context.scheme, "v", "w", probes=20
        )
        assert 0.0 < norm < np.inf


class TestS:
    """S(t, x) = (I - S0 W)^{-1} S0 and the W correction."""

    def test_zero_model_has_zero_w(self, zero_context):
        ctx = zero_context
        W = build_W(1.0, ctx.xbar, ctx.model, ctx.params, ctx.xbar, ctx.scheme)
        assert W.is_zero

    def test_zero_w_reduces_to_s0(self, zero_context, rng):
        ctx = zero_context
        W = build_W(1.0, ctx.xbar, ctx.model, ctx.params, ctx.xbar, ctx.scheme)
        r = random_forcing(ctx, rng)
        y, report = apply_S(1.0, ctx.xbar, r, ctx.blocks, W, ctx.scheme)
        assert np.array_equal(y.stacked(), apply_S0(r, ctx.blocks).stacked())
        assert report.iterations == 1

    def test_fixed_point_matches_global_solve(self, cubic_context, rng):
        ctx = cubic_context
        W = build_W(1.0, ctx.xbar, ctx.model, ctx.params, ctx.xbar, ctx.scheme)
        assert not W.is_zero
        r = random_forcing(ctx, rng)
        y, report = apply_S(1.0, ctx.xbar, r, ctx.blocks, W, ctx.scheme)
        assert report.converged
        assert report.contraction < 0.5
        oracle = solve_frozen(r, ctx.blocks, W)
        assert weighted_norm(y - oracle, ctx.scheme) <= 1e-8 * max(weighted_norm(y, ctx.scheme), 1.0)

    def test_w_scales_model_part_with_t(self, cubic_context):
        ctx = cubic_context
        W0 = build_W(0.0, ctx.xbar, ctx.model, ctx.params, ctx.xbar)
        W1 = build_W(1.0, ctx.xbar, ctx.model, ctx.params, ctx.xbar)
        width = ctx.width
        # rho enters with t, psi does not
        assert not np.any(W0.matrices[:, width:, :])
        assert np.array_equal(W0.matrices[:, :width, :], W1.matrices[:, :width, :])

    def test_block_norms_are_small(self, cubic_context):
        ctx = cubic_context
        W = build_W(1.0, ctx.xbar, ctx.model, ctx.params, ctx.xbar)
        norms = W.block_norms(ctx.scheme)
        assert set(norms) == {"KK", "KV", "VK", "VV"}
        assert all(np.isfinite(v) for v in norms.values())

    def test_ball_violation(self, cubic_context):
        ctx = cubic_context
        V = ctx.xbar.V.copy()
        V[3, 0] += ctx.scheme.weights("w")[3, 1]
        far = ctx.xbar.replace(V=V)
        with pytest.raises(DomainViolationError) as exc:
            check_ball(far, ctx.xbar, ctx.scheme)
        assert (exc.value.index, exc.value.clause) == (3, "g")
        with pytest.raises(DomainViolationError):
            build_W(1.0, far, ctx.model, ctx.params, ctx.xbar, ctx.scheme)


class TestDiagnostics:
    """Contraction measurement and operator-norm probes."""

    def test_measured_contraction(self):
        assert measured_contraction([1.0, 0.5, 0.25]) == pytest.approx(0.5)
        assert measured_contraction([1.0]) == 0.0

    def test_report_serialization(self):
        report = SolveReport(3, 1e-14, 0.1, float("inf"), np.array([1e-15, 2e-15]), [1.0, 0.1])
        assert report.to_dict()["tail_bound"] == "inf"
        assert report.converged

    def test_identity_has_unit_norm(self, scheme):
        assert operator_norm_estimate(lambda x: x, scheme, probes=5) == pytest.approx(1.0)

    def test_estimate_is_deterministic(self, cubic_context):
        blocks = cubic_context.blocks
        op = lambda r: apply_S0(r, blocks)  # noqa: E731
        first = operator_norm_estimate(op, cubic_context.scheme, "v", "w", probes=10, seed=3)
        second = operator_norm_estimate(op, cubic_context.scheme, "v", "w", probes=10, seed=3)
        assert first == second


class TestFrozenBlocks:
    """Blocks of the quadratic Jacobian frozen at x-bar."""

    def test_matches_context(self, cubic_context, params):
        blocks = build_L(cubic_context.xbar, params, reference_tail=cubic_context.blocks.reference_tail)
        assert np.array_equal(blocks.a, cubic_context.blocks.a)
        assert np.array_equal(blocks.C, cubic_context.blocks.C)
        g = cubic_context.xbar.g
        assert blocks.a[10] == pytest.approx(1.0 - 2.0 * g[10])
        assert blocks.a[45] == 1.0
        assert blocks.alpha == pytest.approx(1.0 / 1.5)

    def test_non_expansive_mu_block(self, solution):
        with pytest.raises(ExpansivityViolatedError) as exc:
            build_L(solution.as_flow_sequence(), standard_params(lam=0.9))
        assert exc.value.exit_code == 3
