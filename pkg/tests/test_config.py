# tests/test_config.py
"""
Run config validation, overrides and builders.
"""

import json

import numpy as np
import pytest

from src.config.run_config import (
    SEED_ENV,
    build_family,
    build_homotopy_config,
    build_model,
    build_params,
    build_solve_options,
    config_instance,
    load_run_config,
    parse_run_config,
)
from src.models.builtin import CubicMonomial, LinearContraction
from src.verification.instances import standard_params
from src.utils.errors import ConfigError


@pytest.fixture(autouse=True)
def no_env_seed(monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)


@pytest.fixture
def config_file(tmp_path):
    def write(data):
        path = tmp_path / "run.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return write


class TestValidation:
    """Schema errors name the offending field."""

    def test_defaults(self):
        config = parse_run_config({})
        assert config.g0 == 0.02
        assert config.model.name == "cubic"
        assert config.solver.integrator == "rk45-adaptive"

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="colour"):
            parse_run_config({"colour": "blue"})

    def test_unknown_nested_key(self):
        with pytest.raises(ConfigError, match="solver.method"):
            parse_run_config({"solver": {"method": "euler"}})

    def test_omega_at_most_one(self):
        with pytest.raises(ConfigError, match="params.omega"):
            parse_run_config({"params": {"omega": -2.0}})

    def test_g0_range(self):
        with pytest.raises(ConfigError, match="g0"):
            parse_run_config({"g0": 0.5})

    def test_inner_radius(self):
        with pytest.raises(ConfigError, match="a_star"):
            parse_run_config({"scheme": {"a": 0.4, "a_star": 0.5}})

    def test_exit_code(self):
        with pytest.raises(ConfigError) as exc:
            parse_run_config({"seed": -1})
        assert exc.value.exit_code == 2


class TestParams:
    """Sequence sections and the number shorthand."""

    def test_number_means_constant(self):
        params = build_params(parse_run_config({"params": {"beta": 0.5, "lambda": 3.0}}))
        assert params.beta[0] == 0.5 and params.beta[10_000] == 0.5
        assert params.lam[7] == 3.0

    def test_explicit_sequence(self):
        data = {"params": {"beta": {"prefix": [1.0, 1.0], "tail": {"rule": "geometric", "c": 0.5, "r": 0.5}}}}
        params = build_params(parse_run_config(data))
        assert params.beta[3] == pytest.approx(0.25)

    def test_serialized_params_load_back(self):
        params = standard_params()
        assert build_params(parse_run_config({"params": params.to_dict()})).to_dict() == params.to_dict()

    def test_unknown_tail_rule(self):
        with pytest.raises(ConfigError, match="params.beta.tail.rule"):
            parse_run_config({"params": {"beta": {"tail": {"rule": "harmonic"}}}})


class TestLoading:
    """File, environment and flag precedence."""

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="Failed to read"):
            load_run_config(tmp_path / "absent.json")

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{g0: 0.02", encoding="utf-8")
        with pytest.raises(ConfigError, match="Malformed JSON"):
            load_run_config(path)

    def test_top_level_must_be_object(self, config_file):
        with pytest.raises(ConfigError, match="top level"):
            load_run_config(config_file([1, 2]))

    def test_seed_precedence(self, config_file, monkeypatch):
        path = config_file({"seed": 1})
        assert load_run_config(path).seed == 1
        monkeypatch.setenv(SEED_ENV, "7")
        assert load_run_config(path).seed == 7
        assert load_run_config(path, {"seed": 9}).seed == 9

    def test_bad_env_seed(self, monkeypatch):
        monkeypatch.setenv(SEED_ENV, "seven")
        with pytest.raises(ConfigError, match=SEED_ENV):
            load_run_config()

    def test_dotted_overrides(self, config_file):
        path = config_file({"params": {"omega": 3.0}})
        config = load_run_config(path, {"params.omega": 4.0, "solver.horizon": 64, "g0": None})
        assert config.params.omega == 4.0
        assert config.solver.horizon == 64
        assert config.g0 == 0.02

    def test_override_inside_scalar(self, config_file):
        with pytest.raises(ConfigError, match="non-object"):
            load_run_config(config_file({"g0": 0.02}), {"g0.value": 1.0})


class TestBuilders:
    """Domain objects from a validated config."""

    def test_model(self):
        config = parse_run_config({"model": {"name": "linear", "coefficients": {"kappa0": 0.1}}})
        model = build_model(config)
        assert isinstance(model, LinearContraction)

    def test_unknown_model(self):
        with pytest.raises(ConfigError, match="model.name"):
            build_model(parse_run_config({"model": {"name": "quartic"}}))

    def test_homotopy_config(self):
        config = parse_run_config({"solver": {"integrator": "rk4-fixed", "steps": 32}, "scheme": {"b": 0.8}})
        homotopy = build_homotopy_config(config)
        assert (homotopy.integrator, homotopy.steps, homotopy.b) == ("rk4-fixed", 32, 0.8)

    def test_solve_options(self):
        options = build_solve_options(parse_run_config({"sweep": {"solver": "homotopy"}}))
        assert options.solver == "homotopy"
        assert options.gate.g0_beta_max == 0.1

    def test_beta_scaling_family(self):
        config = parse_run_config({"params": {"beta": 1.0}, "sweep": {"family_last": 10}})
        params, model = build_family(config)(0.5)
        assert params.beta[10] == 0.5 and params.beta[11] == 0.0
        assert isinstance(model, CubicMonomial)

    def test_config_instance(self):
        instance = config_instance(parse_run_config({"g0": 0.01, "K0": [1e-8]}))
        assert instance.name == "config"
        assert instance.g0 == 0.01
        assert np.allclose(instance.K0, [1e-8])
