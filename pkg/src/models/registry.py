# src/models/registry.py
"""
Name -> factory registry for perturbation models.
"""

from typing import Any, Callable, Dict, List, Optional

from .base import KDims, PerturbationModel
from .builtin import CubicMonomial, LinearContraction, RandomPolynomial, ZeroPerturbation
from ..params.cutoff import CutoffData
from ..utils.errors import ConfigError
from ..utils.logging import logger

ModelFactory = Callable[..., PerturbationModel]

_REGISTRY: Dict[str, ModelFactory] = {
    ZeroPerturbation.name: ZeroPerturbation,
    LinearContraction.name: LinearContraction,
    CubicMonomial.name: CubicMonomial,
    RandomPolynomial.name: RandomPolynomial,
}


def register_model(name: str, factory: ModelFactory, replace: bool = False) -> None:
    """
    Register a custom model factory.

    The factory is called as factory(**coefficients, k_dims=..., cutoff=...).

    Raises:
        ValueError: If the name is taken and replace is False
    """
    if name in _REGISTRY and not replace:
        raise ValueError(f"Model '{name}' is already registered")
    _REGISTRY[name] = factory
    logger.debug(f"Registered model '{name}'")


def available_models() -> List[str]:
    return sorted(_REGISTRY)


def create_model(
    name: str,
    coefficients: Optional[Dict[str, Any]] = None,
    k_dims: Optional[KDims] = None,
    cutoff: Optional[CutoffData] = None,
) -> PerturbationModel:
    """
    Build a registered model.

    Raises:
        ConfigError: On an unknown name or coefficients the factory rejects
    """
    factory = _REGISTRY.get(name)
    if factory is None:
        raise ConfigError(
            f"model.name: unknown model '{name}' (available: {', '.join(available_models())})"
        )
    try:
        return factory(**(coefficients or {}), k_dims=k_dims, cutoff=cutoff)
    except TypeError as e:
        raise ConfigError(f"model.coefficients: invalid for '{name}': {e}") from e
