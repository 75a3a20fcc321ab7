# tests/test_params.py
"""
Coefficient sequences, cut-off time and weighted norms.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.models.flow_sequence import FlowSequence
from src.params.cutoff import cutoff_time, default_horizon
from src.params.sequences import CoefficientSequence, ParamSeq, TailRule
from src.params.weights import WeightScheme, expand_weights, residual_norm, weighted_norm
from src.utils.errors import InvalidParametersError

beta_prefixes = st.lists(
    st.floats(min_value=0.0, max_value=1.0, allow_nan=False), min_size=1, max_size=40
).filter(lambda values: any(v > 0.0 for v in values))


class TestCoefficientSequence:
    """Prefix plus tail rule evaluation."""

    def test_constant_sequence(self):
        seq = CoefficientSequence.constant(0.3)
        assert seq[0] == 0.3
        assert seq[10_000] == 0.3
        assert seq.sup_abs() == 0.3

    def test_cut_sequence_vanishes_after_last(self):
        seq = CoefficientSequence.cut(2.0, 5)
        assert np.array_equal(seq.values(8), [2.0] * 6 + [0.0, 0.0])
        assert seq.tail.vanishes

    def test_geometric_tail(self):
        seq = CoefficientSequence([1.0, 1.0], TailRule.geometric(0.5, 0.5))
        assert seq[2] == 0.5
        assert seq[4] == pytest.approx(0.125)
        assert seq.tail_sum_abs(2) == pytest.approx(1.0)

    def test_unbounded_geometric_is_rejected(self):
        seq = CoefficientSequence([], TailRule.geometric(1.0, 1.5))
        with pytest.raises(InvalidParametersError):
            ParamSeq(2.0, eta=seq)

    def test_with_entry_changes_one_index(self):
        seq = CoefficientSequence.constant(1.0).with_entry(3, 5.0)
        assert seq.values(6).tolist() == [1.0, 1.0, 1.0, 5.0, 1.0, 1.0]

    def test_unknown_tail_rule(self):
        with pytest.raises(InvalidParametersError):
            TailRule.from_dict({"rule": "harmonic"})

    @given(prefix=beta_prefixes, c=st.floats(0.0, 1.0), r=st.floats(0.0, 0.99))
    def test_values_agree_with_indexing(self, prefix, c, r):
        seq = CoefficientSequence(prefix, TailRule.geometric(c, r))
        values = seq.values(len(prefix) + 5)
        assert np.allclose(values, [seq[j] for j in range(len(prefix) + 5)], rtol=1e-12, atol=0.0)


class TestParamSeq:
    """Parameter set construction and serialization."""

    @pytest.mark.parametrize("omega", [1.0, 0.5, -2.0, math.inf])
    def test_omega_must_exceed_one(self, omega):
        with pytest.raises(InvalidParametersError):
            ParamSeq(omega)

    def test_lambda_defaults_to_two(self):
        assert ParamSeq(2.0).lam[7] == 2.0

    def test_dict_uses_lambda_key(self, params):
        data = params.to_dict()
        assert "lambda" in data and "lam" not in data
        assert ParamSeq.from_dict(data).to_dict() == data

    def test_from_constants_rejects_unknown_names(self):
        with pytest.raises(InvalidParametersError):
            ParamSeq.from_constants(omega=2.0, delta=1.0)


class TestCutoff:
    """Omega cut-off time and chi."""

    def test_cut_beta(self):
        params = ParamSeq(2.0, beta=CoefficientSequence.cut(1.0, 40))
        assert cutoff_time(params).j_omega == 40

    def test_constant_beta_is_infinite(self, constant_params):
        cutoff = cutoff_time(constant_params)
        assert not cutoff.is_finite
        assert np.all(cutoff.chi_values(50) == 1.0)

    def test_zero_beta(self):
        assert cutoff_time(ParamSeq(2.0)).j_omega == 0

    def test_geometric_tail_at_rate(self):
        beta = CoefficientSequence([1.0] * 11, TailRule.geometric(0.5, 0.5))
        assert cutoff_time(ParamSeq(2.0, beta=beta)).j_omega == 10

    def test_chi_is_multiplicative(self):
        cutoff = cutoff_time(ParamSeq(3.0, beta=CoefficientSequence.cut(1.0, 5)))
        chi = cutoff.chi_values(30)
        ratios = chi[:-1] / chi[1:]
        assert np.all(np.isclose(ratios, 1.0) | np.isclose(ratios, 3.0))
        assert chi[5] == 1.0 and chi[6] == pytest.approx(1.0 / 3.0)

    @settings(max_examples=50)
    @given(prefix=beta_prefixes, low=st.floats(1.1, 4.0), extra=st.floats(0.0, 4.0))
    def test_cutoff_monotone_in_omega(self, prefix, low, extra):
        beta = CoefficientSequence(prefix)
        first = cutoff_time(ParamSeq(low, beta=beta)).j_omega
        second = cutoff_time(ParamSeq(low + extra, beta=beta)).j_omega
        assert first <= second

    def test_default_horizon_reaches_tolerance(self):
        cutoff = cutoff_time(ParamSeq(2.0, beta=CoefficientSequence.cut(1.0, 10)))
        horizon = default_horizon(cutoff, 1e-12, floor=0)
        assert cutoff.chi(horizon) <= 1e-12


class TestWeights:
    """w and v weights and the weighted sup norms."""

    def test_invalid_parameters(self, solution, params):
        cutoff = cutoff_time(params)
        with pytest.raises(InvalidParametersError):
            WeightScheme(solution.gbar, cutoff, 1.0, 1.0, 1.0)
        with pytest.raises(InvalidParametersError):
            WeightScheme(solution.gbar, cutoff, 1.0, 0.5, 0.0)
        with pytest.raises(InvalidParametersError):
            WeightScheme(np.array([0.5, 0.4]), cutoff, 1.0, 0.5, 1.0)

    def test_weight_columns(self, scheme, solution):
        g = solution.gbar
        w = scheme.weights("w")
        v = scheme.weights("v")
        assert w[3, 0] == pytest.approx(0.5 * g[3] ** 3)
        assert w[3, 1] == pytest.approx(g[3] ** 2 * abs(math.log(g[3])))
        assert v[3, 2] == pytest.approx(g[3] ** 3)

    def test_residual_weights_are_floored(self, scheme):
        floor = 1e-3 * scheme.weights("w")
        assert np.all(scheme.residual_weights() >= floor)

    def test_weight_is_norm_of_unit_weight_sequence(self, scheme):
        x = FlowSequence.from_stacked(expand_weights(scheme.weights("w"), 1), 1)
        assert weighted_norm(x, scheme) == pytest.approx(1.0)

    def test_residual_norm_skips_first_entry(self, scheme):
        data = np.zeros((scheme.horizon + 1, 4))
        data[0] = 1.0
        assert residual_norm(FlowSequence.from_stacked(data, 1), scheme) == 0.0

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1), c=st.floats(-50.0, 50.0).filter(lambda v: abs(v) > 1e-6))
    def test_norm_axioms(self, scheme, seed, c):
        rng = np.random.default_rng(seed)
        scale = expand_weights(scheme.weights("w"), 1)
        x = FlowSequence.from_stacked(rng.uniform(-1, 1, scale.shape) * scale, 1)
        y = FlowSequence.from_stacked(rng.uniform(-1, 1, scale.shape) * scale, 1)
        nx, ny = weighted_norm(x, scheme), weighted_norm(y, scheme)
        assert weighted_norm(c * x, scheme) == pytest.approx(abs(c) * nx, rel=1e-12)
        assert weighted_norm(x + y, scheme) <= (nx + ny) * (1 + 1e-12)
