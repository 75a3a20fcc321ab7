# src/quadratic/tails.py
"""
Closed-form bounds for everything beyond a working horizon.

A TailEnvelope looks at indices j >= start and bounds gbar_j, sums of
|s_j| gbar_j^n and products of (1 - s_j gbar_j)^{-1} using only the tail rules
of the coefficient sequences.
"""

import math
from typing import Optional

import numpy as np

from ..params.sequences import CoefficientSequence, ParamSeq, TailKind


def scaled(coefficient: float, bound: float) -> float:
    """
    coefficient * bound with 0 * inf read as 0.
    """
    return 0.0 if coefficient == 0.0 else coefficient * bound


def signed_part_sum(seq: CoefficientSequence, start: int, sign: float) -> float:
    """
    Sum over j >= start of max(sign * s_j, 0) (upper bound, inf when divergent).
    """
    head = seq.prefix[start:]
    total = float(np.sum(np.maximum(sign * head, 0.0)))
    tail = seq.tail
    if tail.vanishes:
        return total
    offset = max(0, start - seq.stored_length)
    if tail.kind is TailKind.CONSTANT:
        return math.inf if sign * tail.c > 0.0 else total
    if tail.r >= 0.0 and sign * tail.c <= 0.0:
        return total
    return total + tail.sum_abs(offset)


class TailEnvelope:
    """
    Bounds on the quadratic flow for j >= start, given gbar_start.
    """

    def __init__(self, params: ParamSeq, start: int, g_start: float) -> None:
        """
        Initialize the envelope.

        Args:
            params: Coefficient sequences
            start: First index beyond the stored solution
            g_start: gbar at index start
        """
        self.params = params
        self.start = start
        self.g_start = g_start

        negative = signed_part_sum(params.beta, start, -1.0)
        exponent = 2.0 * g_start * negative
        # Self-consistent only while exp(exponent) <= 2
        if exponent <= math.log(2.0):
            self.g_up = g_start * math.exp(exponent)
        else:
            self.g_up = math.inf

        beta = params.beta
        self.beta_constant: Optional[float] = None
        if start >= beta.stored_length and beta.tail.kind is TailKind.CONSTANT and beta.tail.c > 0.0:
            self.beta_constant = beta.tail.c

    @property
    def resolved(self) -> bool:
        """True when every sequence is governed by its tail rule from start on."""
        return self.start >= self.params.stored_length

    def sup(self, seq: CoefficientSequence) -> float:
        return seq.sup_abs(self.start)

    def weighted_sum(self, seq: CoefficientSequence, power: int) -> float:
        """
        Bound on sum over j >= start of |s_j| gbar_j^power.
        """
        plain = seq.tail_sum_abs(self.start)
        if plain == 0.0:
            return 0.0
        if math.isfinite(plain):
            return plain * self.g_up**power if power else plain
        # Constant-type tails: telescoping sum beta gbar^2 = gbar_start - gbar_inf
        if power >= 2 and self.beta_constant is not None and math.isfinite(self.g_up):
            return self.sup(seq) * self.g_up ** (power - 1) / self.beta_constant
        return math.inf

    def growth(self, seq: CoefficientSequence) -> float:
        """
        Bound on prod over j >= start of (1 - s_j gbar_j)^{-1}.

        Uses 1/(1 - x) <= exp(2x) for 0 <= x <= 1/2; negative entries contribute
        factors below one.
        """
        positive = signed_part_sum(seq, self.start, 1.0)
        if positive == 0.0:
            return 1.0
        if not (math.isfinite(positive) and math.isfinite(self.g_up)):
            return math.inf
        if self.sup(seq) * self.g_up > 0.5:
            return math.inf
        return math.exp(2.0 * self.g_up * positive)

    def closed_form_z(self) -> Optional[float]:
        """
        Exact z-bar at index start when the tails allow telescoping, else None.

        With beta constant b > 0, zeta vanishing and theta constant c beyond
        start, z-bar_start = sum theta gbar^2 = (c/b) gbar_start.
        """
        if not self.resolved or self.beta_constant is None:
            return None
        if not self.params.zeta.tail.vanishes:
            return None
        theta_tail = self.params.theta.tail
        if theta_tail.vanishes:
            return 0.0
        if theta_tail.kind is not TailKind.CONSTANT:
            return None
        return theta_tail.c / self.beta_constant * self.g_start
