# src/config/run_config.py
"""
Run configuration: schema, loading with overrides, and builders.

The schema is validated before any computation; unknown keys are rejected
and validation failures surface as ConfigError naming the dotted field path.
"""

import json
import math
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..homotopy.context import HomotopyConfig
from ..homotopy.sensitivity import Family, SolveOptions, beta_scaling_family, constant_family
from ..models.base import KDims, PerturbationModel
from ..models.registry import create_model
from ..params.cutoff import CutoffData
from ..params.sequences import PARAM_NAMES, CoefficientSequence, ParamSeq, TailRule
from ..quadratic.bvp import QuadraticGate
from ..utils.errors import ConfigError
from ..utils.logging import logger
from ..verification.instances import VerificationInstance

SEED_ENV = "RGFLOW_SEED"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)


class TailConfig(_Section):
    rule: Literal["zero", "constant", "geometric"] = "zero"
    c: float = 0.0
    r: float = 0.0


class SequenceConfig(_Section):
    """
    Explicit prefix plus a tail rule; a bare number in the file means a constant sequence.
    """

    prefix: List[float] = Field(default_factory=list)
    tail: TailConfig = Field(default_factory=TailConfig)

    def build(self) -> CoefficientSequence:
        return CoefficientSequence(self.prefix, TailRule.from_dict(self.tail.model_dump()))


def _sequence_shorthand(value: Any) -> Any:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return {"tail": {"rule": "constant", "c": float(value)}}
    return value


class ParamsConfig(_Section):
    omega: float = Field(2.0, gt=1.0)
    beta: Optional[SequenceConfig] = None
    eta: Optional[SequenceConfig] = None
    gamma: Optional[SequenceConfig] = None
    lam: Optional[SequenceConfig] = Field(None, alias="lambda")
    theta: Optional[SequenceConfig] = None
    zeta: Optional[SequenceConfig] = None
    ups_gg: Optional[SequenceConfig] = None
    ups_gz: Optional[SequenceConfig] = None
    ups_gmu: Optional[SequenceConfig] = None
    ups_zz: Optional[SequenceConfig] = None
    ups_zmu: Optional[SequenceConfig] = None

    @field_validator(*PARAM_NAMES, mode="before")
    @classmethod
    def _expand_constants(cls, value: Any) -> Any:
        return _sequence_shorthand(value)


class ModelConfig(_Section):
    name: str = "cubic"
    coefficients: Dict[str, Union[float, int]] = Field(default_factory=dict)
    k_dim: int = Field(1, ge=1)
    k_dim_overrides: Dict[int, int] = Field(default_factory=dict)


class SchemeConfig(_Section):
    a: float = Field(1.0, gt=0.0)
    a_star: float = Field(0.5, gt=0.0)
    h: float = Field(1.0, gt=0.0)
    b: float = Field(0.9, gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def _inner_radius(self) -> "SchemeConfig":
        if not self.a_star < self.a:
            raise ValueError(f"a_star must be smaller than a (a_star={self.a_star}, a={self.a})")
        return self


class GateConfig(_Section):
    g0_beta_max: float = Field(0.1, gt=0.0)
    alpha_max: float = Field(0.75, gt=0.0, lt=1.0)


class SolverConfig(_Section):
    """
    Quadratic tolerance, optional fixed horizon, and homotopy integrator settings.
    """

    quadratic_tol: float = Field(1e-12, gt=0.0)
    horizon: Optional[int] = Field(None, ge=1)
    integrator: Literal["rk45-adaptive", "rk4-fixed"] = "rk45-adaptive"
    steps: int = Field(16, ge=4)
    rtol: float = Field(1e-9, gt=0.0)
    atol: float = Field(1e-11, gt=0.0)
    s_tol: float = Field(1e-12, gt=0.0)
    s_max_iter: int = Field(200, ge=1)
    ball_check: Literal["every-step", "final", "off"] = "every-step"
    residual_tol: float = Field(1e-9, gt=0.0)
    tail_tol: float = Field(1e-10, gt=0.0)
    corrector_steps: int = Field(2, ge=0)
    min_step: float = Field(1e-10, gt=0.0)
    max_horizon: int = Field(4096, ge=2)
    enforce_assumptions: bool = True


class RefinementConfig(_Section):
    m_lo: float
    m_hi: float
    levels: int = Field(3, ge=2)
    min_shrink: float = Field(1.8, gt=1.0)


class SweepConfig(_Section):
    """
    parameter "g0" sweeps the initial coupling with sensitivities; "m" sweeps
    the external parameter of a family.
    """

    parameter: Literal["g0", "m"] = "g0"
    grid: List[float] = Field(default_factory=list)
    family: Literal["beta-scaling", "constant"] = "beta-scaling"
    family_last: int = Field(100, ge=0)
    solver: Literal["homotopy", "sweep"] = "sweep"
    dg0_fraction: float = Field(0.01, gt=0.0, lt=1.0)
    report_horizon: Optional[int] = Field(None, ge=1)
    min_success_fraction: float = Field(1.0, ge=0.0, le=1.0)
    refinement: Optional[RefinementConfig] = None


class VerifyConfig(_Section):
    instances: List[str] = Field(default_factory=list)
    checks: List[str] = Field(default_factory=list)
    include_slow: bool = True
    include_config_instance: bool = False
    quadratic_horizon: int = Field(200, ge=2)
    oracle_horizon: int = Field(40, ge=2)


class OracleConfig(_Section):
    horizon: int = Field(40, ge=2)
    shooting_tol: float = Field(1e-12, gt=0.0)
    sweep_tol: float = Field(1e-12, gt=0.0)


class OutputConfig(_Section):
    directory: str = "output"
    prefix: str = ""
    per_j_residuals: bool = False

    def name(self, stem: str) -> str:
        return f"{self.prefix}{stem}"


class RunConfig(_Section):
    """
    One run: the problem (params, model, g0, K0, scheme) plus per-command sections.
    """

    g0: float = Field(0.02, gt=0.0, lt=math.exp(-1.0))
    K0: List[float] = Field(default_factory=lambda: [0.0])
    seed: int = Field(0, ge=0)
    jobs: int = Field(1, ge=1)
    force: bool = False
    params: ParamsConfig = Field(default_factory=ParamsConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    scheme: SchemeConfig = Field(default_factory=SchemeConfig)
    gate: GateConfig = Field(default_factory=GateConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)
    oracle: OracleConfig = Field(default_factory=OracleConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)


def _format_errors(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        path = ".".join(str(p) for p in item["loc"]) or "<root>"
        parts.append(f"{path}: {item['msg']}")
    return "; ".join(parts)


def _apply_override(data: Dict[str, Any], dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        child = node.setdefault(key, {})
        if not isinstance(child, dict):
            raise ConfigError(f"{dotted}: cannot override inside non-object '{key}'")
        node = child
    node[keys[-1]] = value


def parse_run_config(data: Mapping[str, Any]) -> RunConfig:
    """
    Validate a config mapping.

    Raises:
        ConfigError: With the dotted path of every invalid field
    """
    try:
        return RunConfig.model_validate(dict(data))
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {_format_errors(e)}") from e


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """
    Read a JSON config (or start from defaults) and apply overrides.

    Precedence, lowest first: file, RGFLOW_SEED, dotted-key overrides from flags.

    Args:
        path: JSON file, or None for the defaults
        overrides: {"params.omega": 3.0, ...}; None values are ignored

    Returns:
        Validated RunConfig

    Raises:
        ConfigError: On an unreadable file, malformed JSON or invalid fields
    """
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        except OSError as e:
            raise ConfigError(f"Failed to read config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"Malformed JSON in {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")

    env_seed = os.getenv(SEED_ENV)
    if env_seed:
        try:
            data["seed"] = int(env_seed)
        except ValueError as e:
            raise ConfigError(f"{SEED_ENV}: not an integer: {env_seed!r}") from e
        logger.debug(f"Seed {env_seed} taken from {SEED_ENV}")

    for dotted, value in (overrides or {}).items():
        if value is not None:
            _apply_override(data, dotted, value)

    return parse_run_config(data)


# Builders


def build_params(config: RunConfig) -> ParamSeq:
    section = config.params
    sequences = {
        name: getattr(section, name).build()
        for name in PARAM_NAMES
        if getattr(section, name) is not None
    }
    return ParamSeq(section.omega, **sequences)


def build_model(config: RunConfig, cutoff: Optional[CutoffData] = None) -> PerturbationModel:
    section = config.model
    k_dims = KDims(section.k_dim, dict(section.k_dim_overrides))
    return create_model(section.name, dict(section.coefficients), k_dims, cutoff)


def build_gate(config: RunConfig) -> QuadraticGate:
    return QuadraticGate(config.gate.g0_beta_max, config.gate.alpha_max)


def build_homotopy_config(config: RunConfig) -> HomotopyConfig:
    solver = config.solver
    return HomotopyConfig(
        integrator=solver.integrator,
        steps=solver.steps,
        rtol=solver.rtol,
        atol=solver.atol,
        s_tol=solver.s_tol,
        s_max_iter=solver.s_max_iter,
        ball_check=solver.ball_check,
        residual_tol=solver.residual_tol,
        tail_tol=solver.tail_tol,
        corrector_steps=solver.corrector_steps,
        b=config.scheme.b,
        min_step=solver.min_step,
        max_horizon=solver.max_horizon,
    )


def build_K0(config: RunConfig) -> np.ndarray:
    return np.asarray(config.K0, dtype=float)


def build_solve_options(config: RunConfig) -> SolveOptions:
    scheme = config.scheme
    return SolveOptions(
        solver=config.sweep.solver,
        a=scheme.a,
        a_star=scheme.a_star,
        h=scheme.h,
        config=build_homotopy_config(config),
        gate=build_gate(config),
        enforce_assumptions=config.solver.enforce_assumptions,
    )


def build_family(config: RunConfig) -> Family:
    params, model = build_params(config), build_model(config)
    if config.sweep.family == "beta-scaling":
        return beta_scaling_family(params, model, config.sweep.family_last)
    return constant_family(params, model)


def config_instance(config: RunConfig) -> VerificationInstance:
    """
    The configured problem as a verification instance named "config".
    """
    scheme = config.scheme
    return VerificationInstance(
        "config",
        build_params(config),
        build_model(config),
        g0=config.g0,
        K0=tuple(config.K0),
        a=scheme.a,
        a_star=scheme.a_star,
        h=scheme.h,
        quadratic_horizon=config.verify.quadratic_horizon,
        oracle_horizon=config.verify.oracle_horizon,
        enforce_assumptions=config.solver.enforce_assumptions,
    )
