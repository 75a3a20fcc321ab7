# src/quadratic/certificates.py
"""
Numeric certificates for the bounds satisfied by the quadratic flow.

Every O(.) statement is turned into an observed ratio, and where it matters,
a stability check of that ratio under doubling of the horizon.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bvp import QuadraticSolution, iterate_gbar, solve_quadratic_bvp
from .tails import TailEnvelope
from ..params.cutoff import CutoffData
from ..params.sequences import ParamSeq, TailKind
from ..utils.errors import SolverError
from ..utils.logging import logger

# Relative change tolerated by a fitted constant under horizon doubling
STABILITY_THRESHOLD = 0.10


def _relative_change(first: float, second: float) -> float:
    scale = max(abs(first), abs(second))
    return abs(second - first) / scale if scale > 0.0 else 0.0


def forward_residual(sol: QuadraticSolution, params: ParamSeq) -> float:
    """
    Largest relative residual of V-bar_{j+1} - phi_bar_j(V-bar_j) over j < J.

    Each residual is scaled by the sum of the magnitudes of the terms that
    produce it, so cancellation does not inflate the ratio.
    """
    horizon = sol.horizon
    if horizon == 0:
        return 0.0
    t = params.table(horizon)
    g, z, mu = sol.gbar[:-1], sol.zbar[:-1], sol.mubar[:-1]
    g1, z1, mu1 = sol.gbar[1:], sol.zbar[1:], sol.mubar[1:]
    tiny = np.finfo(float).tiny

    g_terms = [g, t.beta * g * g]
    z_terms = [z, t.theta * g * g, t.zeta * g * z]
    mu_terms = [
        t.eta * g,
        t.gamma * z,
        t.lam * mu,
        t.ups_gg * g * g,
        t.ups_gz * g * z,
        t.ups_gmu * g * mu,
        t.ups_zz * z * z,
        t.ups_zmu * z * mu,
    ]
    g_res = g1 - (g_terms[0] - g_terms[1])
    z_res = z1 - (z_terms[0] - z_terms[1] - z_terms[2])
    mu_res = mu1 - (mu_terms[0] + mu_terms[1] + mu_terms[2] - sum(mu_terms[3:]))

    ratios = []
    for res, terms, target in ((g_res, g_terms, g1), (z_res, z_terms, z1), (mu_res, mu_terms, mu1)):
        scale = np.abs(target) + sum(np.abs(term) for term in terms) + tiny
        ratios.append(float(np.max(np.abs(res) / scale)))
    return max(ratios)


@dataclass(frozen=True)
class ProductAsymptotic:
    """
    c_j with its residual bound, and the sampled product ratios.
    """

    gamma: float
    j: int
    c: float
    residual_bound: float
    samples: Tuple[Tuple[int, float, float], ...] = ()

    @property
    def passed(self) -> bool:
        return all(abs(ratio - 1.0) <= bound for _, ratio, bound in self.samples)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["samples"] = [list(s) for s in self.samples]
        data["passed"] = self.passed
        return data


def _log_corrections(gamma: float, x: np.ndarray) -> np.ndarray:
    # log(1 + r_k) with (1 - gamma x)^{-1} = (1 - x)^{-gamma} (1 + r_k)
    return gamma * np.log1p(-x) - np.log1p(-gamma * x)


def product_asymptotic(
    gamma: float,
    j: int,
    sol: QuadraticSolution,
    params: ParamSeq,
    samples: Optional[Sequence[int]] = None,
) -> ProductAsymptotic:
    """
    The constant c_j in prod_{k=j}^{l} (1 - gamma beta_k gbar_k)^{-1} ~ (gbar_j/gbar_{l+1})^gamma c_j.

    Args:
        gamma: Exponent (non-negative)
        j: Start index
        sol: Quadratic solution
        params: Coefficient sequences
        samples: Indices l to check (default: a few spread over [j, J])

    Returns:
        ProductAsymptotic with c_j, its certified residual bound and per-l ratios

    Raises:
        SolverError: If some factor 1 - gamma beta_k gbar_k is not positive
    """
    horizon = sol.horizon
    if not 0 <= j <= horizon:
        raise ValueError(f"j={j} outside 0..{horizon}")
    x = params.beta.values(horizon + 1) * sol.gbar
    if gamma == 0.0:
        sampled = tuple((l, 1.0, 0.0) for l in (samples or [j]))
        return ProductAsymptotic(gamma, j, 1.0, 0.0, sampled)
    factors = 1.0 - gamma * x
    if np.any(factors <= 0.0) or np.any(1.0 - x <= 0.0):
        index = int(np.nonzero((factors <= 0.0) | (1.0 - x <= 0.0))[0][0])
        raise SolverError(f"1 - gamma beta_k gbar_k <= 0 at k={index}")

    logs = _log_corrections(gamma, x)
    # Beyond the horizon |log(1 + r_k)| <= (gamma^2 + gamma) beta_k^2 gbar_k^2
    tail = TailEnvelope(params, horizon + 1, sol.gbar_next)
    beta_sup = params.beta.sup_abs(horizon + 1)
    tail_sum = (gamma * gamma + gamma) * (
        0.0 if beta_sup == 0.0 else beta_sup * tail.weighted_sum(params.beta, 2)
    )
    suffix = np.cumsum(np.abs(logs)[::-1])[::-1]

    c = math.exp(float(np.sum(logs[j:])))
    residual = math.expm1(float(suffix[j]) + tail_sum)

    if samples is None:
        samples = sorted({j, (j + horizon) // 2, horizon - 1} - {-1})
    checked: List[Tuple[int, float, float]] = []
    for l in samples:
        if not j <= l < horizon:
            continue
        product = math.exp(-float(np.sum(np.log(factors[j : l + 1]))))
        predicted = (sol.gbar[j] / sol.gbar[l + 1]) ** gamma * c
        bound = math.expm1(float(suffix[l + 1]) + tail_sum) + 1e-12
        checked.append((int(l), product / predicted, bound))
    return ProductAsymptotic(gamma, j, c, residual, tuple(checked))


@dataclass(frozen=True)
class SumCertificate:
    """
    Observed ratio of sum_{l=j}^{k} chi_l gbar_l^n |log gbar_l|^m to its envelope.
    """

    n: float
    m: float
    j: int
    k: int
    ratio: float
    doubled_ratio: Optional[float] = None

    @property
    def stable(self) -> Optional[bool]:
        if self.doubled_ratio is None:
            return None
        return _relative_change(self.ratio, self.doubled_ratio) <= STABILITY_THRESHOLD

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["stable"] = self.stable
        return data


def _sum_ratio(
    n: float, m: float, j: int, k: int, gbar: np.ndarray, chi: np.ndarray
) -> float:
    g = gbar[j : k + 1]
    logs = np.abs(np.log(g))
    total = float(np.sum(chi[j : k + 1] * g**n * logs**m))
    if n == 1:
        envelope = abs(math.log(gbar[k])) ** (m + 1)
    else:
        envelope = chi[j] * gbar[j] ** (n - 1) * abs(math.log(gbar[j])) ** m
    return total / envelope


def sum_certificate(
    n: float, m: float, j: int, k: int, sol: QuadraticSolution, cutoff: CutoffData
) -> SumCertificate:
    """
    Fitted constant of the chi-weighted power sums of gbar.

    The envelope is |log gbar_k|^{m+1} for n = 1 and chi_j gbar_j^{n-1} |log gbar_j|^m
    for n > 1. When 2k fits in the solution's horizon the ratio is recomputed
    at 2k to judge stability.
    """
    if not (n >= 1 and m >= 0 and 0 <= j <= k <= sol.horizon):
        raise ValueError(f"Invalid sum range n={n}, m={m}, j={j}, k={k}")
    chi = cutoff.chi_values(sol.horizon + 1)
    ratio = _sum_ratio(n, m, j, k, sol.gbar, chi)
    doubled = None
    if 2 * k <= sol.horizon and k > j:
        doubled = _sum_ratio(n, m, j, 2 * k, sol.gbar, chi)
    return SumCertificate(n, m, j, k, ratio, doubled)


@dataclass(frozen=True)
class AsymptoticRatioReport:
    """
    gbar_j against g0 / (1 + g0 b j) for constant beta = b.
    """

    b: float
    min_ratio: float
    max_ratio: float
    final_ratio: float
    log_correction: float
    log_correction_bound: float

    @property
    def passed(self) -> bool:
        return 0.8 <= self.final_ratio <= 1.2 and self.log_correction <= self.log_correction_bound

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["passed"] = self.passed
        return data


def constant_beta(params: ParamSeq) -> Optional[float]:
    """
    b when beta_j = b > 0 for every j, else None.
    """
    beta = params.beta
    if beta.tail.kind is not TailKind.CONSTANT or beta.tail.c <= 0.0:
        return None
    if np.any(beta.prefix != beta.tail.c):
        return None
    return beta.tail.c


def asymptotic_ratio_report(
    sol: QuadraticSolution, params: ParamSeq
) -> Optional[AsymptoticRatioReport]:
    """
    Compare gbar_j with g0/(1 + g0 b j); None unless beta is constant.
    """
    b = constant_beta(params)
    if b is None:
        return None
    j = np.arange(sol.horizon + 1)
    reference = 1.0 / sol.g0 + b * j
    ratios = sol.gbar * reference
    J = sol.horizon
    correction = 1.0 / sol.gbar[-1] - reference[-1]
    bound = 2.0 * b * math.log1p(b * J * sol.g0) + 10.0
    return AsymptoticRatioReport(
        b=b,
        min_ratio=float(np.min(ratios)),
        max_ratio=float(np.max(ratios)),
        final_ratio=float(ratios[-1]),
        log_correction=float(correction),
        log_correction_bound=bound,
    )


@dataclass(frozen=True)
class AbruptCutoffReport:
    """
    Constancy of gbar after the last nonzero beta.
    """

    last_index: int
    plateau: float
    reference: float
    bit_exact: bool

    @property
    def relative_deviation(self) -> float:
        return abs(self.plateau - self.reference) / self.reference

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["relative_deviation"] = self.relative_deviation
        return data


def abrupt_cutoff_check(
    sol: QuadraticSolution, params: ParamSeq
) -> Optional[AbruptCutoffReport]:
    """
    For beta vanishing beyond a finite index L, check gbar_j == gbar_{L+1} for j > L.

    The reference plateau is 1/(b L) with b = beta_L. None when beta has a
    non-vanishing tail, no nonzero entry, or L + 1 exceeds the horizon.
    """
    beta = params.beta
    if not beta.tail.vanishes:
        return None
    nonzero = np.nonzero(beta.prefix)[0]
    if not len(nonzero):
        return None
    last = int(nonzero[-1])
    if last + 1 > sol.horizon or last == 0:
        return None
    plateau = sol.gbar[last + 1 :]
    return AbruptCutoffReport(
        last_index=last,
        plateau=float(plateau[0]),
        reference=1.0 / (abs(beta.prefix[last]) * last),
        bit_exact=bool(np.all(plateau == plateau[0])),
    )


@dataclass(frozen=True)
class RiemannSumReport:
    """
    sum_l beta_l psi(gbar_l) gbar_l^2 against the integral of psi(t) = t^{n-2}.
    """

    n: int
    j: int
    k: int
    riemann_sum: float
    integral: float
    correction_bound: float

    @property
    def difference(self) -> float:
        return abs(self.riemann_sum - self.integral)

    @property
    def passed(self) -> bool:
        rounding = 64 * np.finfo(float).eps * (self.k - self.j + 1) * abs(self.riemann_sum)
        return self.difference <= self.correction_bound * (1.0 + 1e-9) + rounding

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["difference"] = self.difference
        data["passed"] = self.passed
        return data


def _antiderivative(power: float, t: np.ndarray) -> np.ndarray:
    if power == -1:
        return np.log(t)
    return t ** (power + 1) / (power + 1)


def riemann_sum_check(
    n: int, sol: QuadraticSolution, params: ParamSeq, j: int = 0, k: Optional[int] = None
) -> RiemannSumReport:
    """
    Compare the beta-weighted sum with the integral of t^{n-2} between gbar_{k+1} and gbar_j.

    Since gbar_l - gbar_{l+1} = beta_l gbar_l^2 the sum is a Riemann sum; the
    second-order correction is bounded by 1/2 sum sup|psi'| (beta_l gbar_l^2)^2.
    """
    k = sol.horizon - 1 if k is None else k
    if not 0 <= j <= k < sol.horizon:
        raise ValueError(f"Invalid range j={j}, k={k} for horizon {sol.horizon}")
    power = n - 2
    g = sol.gbar[j : k + 1]
    g_next = sol.gbar[j + 1 : k + 2]
    steps = params.beta.values(k + 1)[j:] * g * g
    total = float(np.sum(steps * g**power))
    integral = float(_antiderivative(power, np.array([sol.gbar[j]]))[0]) - float(
        _antiderivative(power, np.array([sol.gbar[k + 1]]))[0]
    )
    if power == 0:
        slope = np.zeros_like(g)
    else:
        low, high = np.minimum(g, g_next), np.maximum(g, g_next)
        # |psi'(t)| = |power| t^{power-1} is monotone, so its sup sits at an endpoint
        slope = np.abs(power) * np.maximum(low ** (power - 1), high ** (power - 1))
    bound = 0.5 * float(np.sum(slope * steps**2))
    return RiemannSumReport(n, j, k, total, integral, bound)


def initial_condition_stability(
    g0: float, delta: float, params: ParamSeq, horizon: int
) -> Dict[str, float]:
    """
    Fitted C in |g_ring_j - gbar_j| <= delta g_ring_j (1 + C g0) with g_ring_0 = (1 + delta) g0.
    """
    gbar = iterate_gbar(g0, params, horizon)
    gring = iterate_gbar(g0 * (1.0 + delta), params, horizon)
    ratios = np.abs(gring - gbar) / (abs(delta) * gring)
    max_ratio = float(np.max(ratios))
    return {
        "delta": delta,
        "max_ratio": max_ratio,
        "fitted_C": max(0.0, (max_ratio - 1.0) / g0),
    }


def beta_monotonicity(
    g0: float,
    params: ParamSeq,
    horizon: int,
    rng: np.random.Generator,
    trials: int = 10,
    bump: float = 0.1,
) -> Dict[str, Any]:
    """
    Raise single beta_k entries and record the largest relative increase of any gbar_j.

    The increase should be zero; a few ulps are tolerated by the caller.
    """
    base = iterate_gbar(g0, params, horizon)
    worst = -math.inf
    indices = []
    for _ in range(trials):
        k = int(rng.integers(0, horizon))
        amount = float(rng.uniform(0.0, bump))
        raised = params.replace(beta=params.beta.with_entry(k, params.beta[k] + amount))
        try:
            gbar = iterate_gbar(g0, raised, horizon)
        except SolverError:
            # Positivity lost only ever lowers gbar further
            continue
        worst = max(worst, float(np.max((gbar - base) / base)))
        indices.append(k)
    return {"max_relative_increase": worst if indices else 0.0, "indices": indices}


def zeta_product_bound(gbar: np.ndarray, params: ParamSeq) -> float:
    """
    sup over j <= l of prod_{k=j}^{l} (1 - zeta_k gbar_k)^{-1} on the given horizon.
    """
    zeta = params.zeta.values(len(gbar))
    logs = -np.log1p(-zeta * gbar)
    prefix = np.concatenate([[0.0], np.cumsum(logs)])
    running_min = np.minimum.accumulate(prefix[:-1])
    return float(math.exp(float(np.max(prefix[1:] - running_min))))


@dataclass
class EnvelopeStability:
    """
    z-bar and mu-bar envelopes at a horizon and its double.
    """

    horizon: int
    envelope_z: float
    envelope_mu: float
    doubled_z: float
    doubled_mu: float
    extra: Dict[str, float] = field(default_factory=dict)

    @property
    def change(self) -> float:
        return max(
            _relative_change(self.envelope_z, self.doubled_z),
            _relative_change(self.envelope_mu, self.doubled_mu),
        )

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["change"] = self.change
        return data


def envelope_stability(
    g0: float, params: ParamSeq, horizon: int, **solve_kwargs: Any
) -> EnvelopeStability:
    """
    Solve at horizon and 2 * horizon and compare the fitted envelopes.
    """
    first = solve_quadratic_bvp(g0, params, horizon=horizon, **solve_kwargs)
    second = solve_quadratic_bvp(g0, params, horizon=2 * horizon, **solve_kwargs)
    return EnvelopeStability(
        horizon=horizon,
        envelope_z=first.envelope_z,
        envelope_mu=first.envelope_mu,
        doubled_z=second.envelope_z,
        doubled_mu=second.envelope_mu,
    )


@dataclass
class ZbarRatioGrowth:
    """
    C(J) = sup_j |z-bar_j| / g-bar_j for a list of horizons.
    """

    horizons: List[int]
    ratios: List[float]

    @property
    def increasing(self) -> bool:
        return all(b > a for a, b in zip(self.ratios, self.ratios[1:]))

    @property
    def log_slope(self) -> float:
        """Least-squares slope of C(J) against log J."""
        if len(self.horizons) < 2:
            return 0.0
        return float(np.polyfit(np.log(self.horizons), self.ratios, 1)[0])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "horizons": list(self.horizons),
            "ratios": list(self.ratios),
            "increasing": self.increasing,
            "log_slope": self.log_slope,
        }


def zbar_ratio_growth(
    g0: float, params: ParamSeq, horizons: Sequence[int], **solve_kwargs: Any
) -> ZbarRatioGrowth:
    """
    Solve at every horizon and record sup_j |z-bar_j| / g-bar_j.
    """
    horizons = sorted(int(J) for J in horizons)
    ratios = []
    for J in horizons:
        sol = solve_quadratic_bvp(g0, params, horizon=J, **solve_kwargs)
        ratios.append(float(np.max(np.abs(sol.zbar) / sol.gbar)))
    logger.debug(f"z-bar/g-bar growth: {dict(zip(horizons, ratios))}")
    return ZbarRatioGrowth(horizons, ratios)
