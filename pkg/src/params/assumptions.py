# src/params/assumptions.py
"""
Numeric checkers for the structural assumptions on beta (A1) and on the
remaining coefficients (A2). Reports carry failures instead of raising.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .cutoff import CutoffData, RATIO_SLACK, cutoff_time
from .sequences import ENVELOPE_NAMES, ParamSeq, TailKind
from ..utils.logging import logger


def _json_number(value: float) -> Any:
    return "inf" if value == math.inf else value


@dataclass(frozen=True)
class A1Report:
    """
    sup|beta| and the best exceptional-index constant c for beta_j >= c.
    """

    beta_sup: float
    c: float
    exceptional_indices: Tuple[int, ...]
    window: Optional[int]
    passed: bool

    @property
    def exceptional_count(self) -> int:
        return len(self.exceptional_indices)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["exceptional_indices"] = list(self.exceptional_indices)
        data["exceptional_count"] = self.exceptional_count
        data["window"] = "inf" if self.window is None else self.window
        return data


@dataclass(frozen=True)
class A2Report:
    """
    lambda lower bound, positive-zeta count and the chi-envelope constant.
    """

    lambda_min: float
    lambda_pass: bool
    lambda_offending_index: Optional[int]
    zeta_positive_count: float
    zeta_pass: bool
    envelope: float
    envelope_by_name: Dict[str, float] = field(default_factory=dict)
    envelope_pass: bool = True
    horizon: int = 0

    @property
    def passed(self) -> bool:
        return self.lambda_pass and self.zeta_pass and self.envelope_pass

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda_min": self.lambda_min,
            "lambda_pass": self.lambda_pass,
            "lambda_offending_index": self.lambda_offending_index,
            "zeta_positive_count": _json_number(self.zeta_positive_count),
            "zeta_pass": self.zeta_pass,
            "envelope": _json_number(self.envelope),
            "envelope_by_name": {
                name: _json_number(value) for name, value in self.envelope_by_name.items()
            },
            "envelope_pass": self.envelope_pass,
            "horizon": self.horizon,
            "passed": self.passed,
        }


def _best_exceptional_constant(values: np.ndarray, cap: float) -> float:
    """
    Largest c <= cap with #{v < c} <= floor(1/c); 0 when none exists.

    Candidates are the observed positive values and 1/m, since the exceptional
    count is piecewise constant between observed values.
    """
    sorted_values = np.sort(values)
    count = len(values)
    observed = np.unique(values[values > 0.0])
    reciprocal = 1.0 / np.arange(1, count + 2, dtype=float)
    candidates = np.unique(np.concatenate([observed, reciprocal]))
    candidates = candidates[candidates <= cap]
    if not len(candidates):
        return 0.0
    exceptions = np.searchsorted(sorted_values, candidates, side="left")
    allowed = np.floor(1.0 / candidates + 1e-12)
    valid = candidates[exceptions <= allowed]
    return float(np.max(valid)) if len(valid) else 0.0


def check_A1(
    params: ParamSeq, horizon: int, cutoff: Optional[CutoffData] = None
) -> A1Report:
    """
    Check that beta is bounded and eventually bounded below up to the cut-off.

    Args:
        params: Coefficient sequences
        horizon: Scan length used when j_omega is infinite
        cutoff: Precomputed cut-off (computed when omitted)

    Returns:
        A1Report with the best observed constant c
    """
    cutoff = cutoff or cutoff_time(params)
    beta = params.beta
    beta_sup = beta.sup_abs()
    cap = math.inf

    if cutoff.is_finite:
        window: Optional[int] = cutoff.j_omega
        values = beta.values(cutoff.j_omega + 1)
    else:
        window = None
        scan = max(horizon, beta.stored_length) + 1
        values = beta.values(scan)
        tail = beta.tail
        if tail.kind is TailKind.CONSTANT or (
            tail.kind is TailKind.GEOMETRIC and tail.r == 1.0
        ):
            cap = tail.c
        else:
            # Infinitely many tail entries fall below any c > 0
            cap = 0.0

    c = _best_exceptional_constant(values, cap) if cap > 0.0 else 0.0
    exceptional = tuple(int(j) for j in np.nonzero(values < c)[0]) if c > 0 else ()
    report = A1Report(
        beta_sup=beta_sup,
        c=c,
        exceptional_indices=exceptional,
        window=window,
        passed=bool(math.isfinite(beta_sup) and c > 0.0),
    )
    logger.debug(f"A1: sup|beta|={beta_sup:.6g}, c={c:.6g}, passed={report.passed}")
    return report


def _first_index_at_most_one(params: ParamSeq, scan: int) -> Optional[int]:
    values = params.lam.values(scan)
    hits = np.nonzero(values <= 1.0)[0]
    return int(hits[0]) if len(hits) else None


def check_A2(params: ParamSeq, cutoff: CutoffData, horizon: int) -> A2Report:
    """
    Check lambda > 1, the finiteness of positive zeta entries up to the cut-off,
    and the chi-envelope of the remaining coefficients.

    Args:
        params: Coefficient sequences
        cutoff: Cut-off data of beta
        horizon: Scan horizon (extended to cover every stored prefix)

    Returns:
        A2Report with a pass/fail flag per clause
    """
    scan = max(horizon, params.stored_length) + 1

    lambda_min = params.lam.infimum()
    lambda_pass = lambda_min > 1.0
    offending = None if lambda_pass else _first_index_at_most_one(params, scan)

    a1 = check_A1(params, horizon, cutoff)
    if cutoff.is_finite:
        zeta_count: float = params.zeta.positive_count(cutoff.j_omega)
    else:
        zeta_count = params.zeta.positive_count()
    zeta_pass = math.isfinite(zeta_count)
    if zeta_pass and a1.c > 0.0:
        zeta_pass = zeta_count <= math.floor(1.0 / a1.c + 1e-12)

    chi = cutoff.chi_values(scan)
    by_name: Dict[str, float] = {}
    for name in ENVELOPE_NAMES:
        seq = params.sequence(name)
        if not cutoff.is_finite:
            by_name[name] = seq.sup_abs()
            continue
        tail = seq.tail
        if not tail.vanishes and (
            tail.kind is TailKind.CONSTANT
            or abs(tail.r) > (1.0 / cutoff.omega) * (1.0 + RATIO_SLACK)
        ):
            by_name[name] = math.inf
            continue
        by_name[name] = float(np.max(np.abs(seq.values(scan)) / chi))

    envelope = max(by_name.values()) if by_name else 0.0
    report = A2Report(
        lambda_min=lambda_min,
        lambda_pass=lambda_pass,
        lambda_offending_index=offending,
        zeta_positive_count=zeta_count,
        zeta_pass=zeta_pass,
        envelope=envelope,
        envelope_by_name=by_name,
        envelope_pass=math.isfinite(envelope),
        horizon=scan - 1,
    )
    logger.debug(
        f"A2: lambda_min={lambda_min:.6g}, zeta+={zeta_count}, C_env={envelope:.6g}"
    )
    return report
