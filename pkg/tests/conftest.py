# tests/conftest.py
"""
Shared fixtures: the standard parameter set, built-in models and solved problems.
"""

import numpy as np
import pytest

from src.homotopy.context import HomotopyContext
from src.models.builtin import CubicMonomial, LinearContraction, ZeroPerturbation
from src.params.cutoff import cutoff_time
from src.params.sequences import ParamSeq
from src.params.weights import WeightScheme
from src.quadratic.bvp import solve_quadratic_bvp
from src.verification.instances import standard_params

G0 = 0.02


@pytest.fixture(scope="session")
def params() -> ParamSeq:
    return standard_params()


@pytest.fixture(scope="session")
def constant_params() -> ParamSeq:
    return ParamSeq.from_constants(omega=2.0, beta=1.0, lam=2.0)


@pytest.fixture(scope="session")
def cubic() -> CubicMonomial:
    return CubicMonomial()


@pytest.fixture(scope="session")
def linear_model() -> LinearContraction:
    return LinearContraction()


@pytest.fixture(scope="session")
def zero_model() -> ZeroPerturbation:
    return ZeroPerturbation()


@pytest.fixture(scope="session")
def solution(params):
    return solve_quadratic_bvp(G0, params, horizon=200)


@pytest.fixture(scope="session")
def scheme(params, solution) -> WeightScheme:
    return WeightScheme(solution.gbar, cutoff_time(params), 1.0, 0.5, 1.0)


@pytest.fixture(scope="session")
def cubic_context(params, cubic) -> HomotopyContext:
    return HomotopyContext.build(np.zeros(1), G0, params, cubic, horizon=50)


@pytest.fixture(scope="session")
def zero_context(params, zero_model) -> HomotopyContext:
    return HomotopyContext.build(np.zeros(1), G0, params, zero_model, horizon=50)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
