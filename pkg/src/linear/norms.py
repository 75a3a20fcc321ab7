# src/linear/norms.py
"""
Randomized lower bounds for weighted operator norms.
"""

from typing import Callable, Literal

import numpy as np

from ..models.flow_sequence import FlowSequence
from ..params.weights import WeightScheme, expand_weights, residual_norm, weighted_norm

LinearAction = Callable[[FlowSequence], FlowSequence]
Norm = Literal["w", "v"]


def _measure(x: FlowSequence, scheme: WeightScheme, which: Norm) -> float:
    if which == "w":
        return weighted_norm(x, scheme, "w")
    if which == "v":
        return residual_norm(x, scheme)
    raise ValueError(f"Unknown norm: {which!r}")


def operator_norm_estimate(
    op: LinearAction,
    scheme: WeightScheme,
    in_norm: Norm = "w",
    out_norm: Norm = "w",
    probes: int = 200,
    seed: int = 0,
    k_dim: int = 1,
) -> float:
    """
    max over probes r of ||op r||_out / ||r||_in.

    Probes are sign patterns scaled by the input weights, so each has unit
    input norm; the first probe has all signs positive. A "v" input is
    residual-shaped: entry 0 is zero and the floored v weights are used.

    Args:
        op: Linear action on trajectories of the scheme's horizon
        scheme: Weight scheme
        in_norm: Norm of the input space
        out_norm: Norm of the output space
        probes: Number of probes
        seed: Seed of the sign generator
        k_dim: K width of the probes

    Returns:
        A lower bound for the operator norm (deterministic for a fixed seed)
    """
    rng = np.random.default_rng(seed)
    if in_norm == "w":
        weights = scheme.weights("w")
    elif in_norm == "v":
        weights = scheme.residual_weights()
    else:
        raise ValueError(f"Unknown norm: {in_norm!r}")
    scale = expand_weights(weights, k_dim)
    if in_norm == "v":
        scale = scale.copy()
        scale[0] = 0.0

    best = 0.0
    for i in range(probes):
        signs = np.ones_like(scale) if i == 0 else rng.choice([-1.0, 1.0], size=scale.shape)
        probe = FlowSequence.from_stacked(signs * scale, k_dim)
        size = _measure(probe, scheme, in_norm)
        if size == 0.0:
            continue
        best = max(best, _measure(op(probe), scheme, out_norm) / size)
    return best
