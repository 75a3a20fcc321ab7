# src/params/a3.py
"""
Monte-Carlo checker for the third-order assumptions on a perturbation model.

Samples points of D_j at a spread of scales and estimates kappa (D_K psi),
R (psi at K = 0) and M (rho, D_K rho, D_V of both maps, and the second and
third derivative envelopes) from the observed ratios.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .sequences import ParamSeq
from .weights import WeightScheme
from ..models.base import ModelEnvelope, PerturbationModel, split_jacobian
from ..models.domain import DomainSpec
from ..quadratic.bvp import QuadraticSolution, solve_quadratic_bvp
from ..utils.logging import logger, stage, status_icon

# Relative slack when comparing estimates against declared constants
A3_SLACK = 1e-8

# Finite-difference steps for the higher derivatives, per unit of domain radius
SECOND_DERIVATIVE_STEP = 1e-3
THIRD_DERIVATIVE_STEP = 1e-2

# Steps are floored at eps^(1/3) |x| (first differences) and eps^(1/4) |x| (second differences)
EPS = float(np.finfo(float).eps)
SECOND_STEP_FLOOR = EPS ** (1.0 / 3.0)
THIRD_STEP_FLOOR = EPS ** 0.25

# Multiple of eps times the Jacobian magnitudes treated as rounding in a difference
ROUNDING_FACTOR = 64.0


@dataclass
class A3Report:
    """
    Estimated (kappa, R, M) with per-clause detail and the pass/fail verdict.
    """

    kappa_hat: float
    R_hat: float
    M_hat: float
    M_by_clause: Dict[str, float]
    declared: ModelEnvelope
    a: float
    omega: float
    sampled_indices: List[int]
    sample_count: int
    skipped: List[Tuple[int, str]] = field(default_factory=list)

    @property
    def constraints_pass(self) -> bool:
        """kappa in (0, 1/Omega), R in (0, a(1 - kappa Omega)), M > 0."""
        d = self.declared
        return (
            0.0 < d.kappa < 1.0 / self.omega
            and 0.0 < d.R < self.a * (1.0 - d.kappa * self.omega)
            and d.M > 0.0
        )

    @property
    def estimates_pass(self) -> bool:
        d = self.declared
        slack = 1.0 + A3_SLACK
        return (
            self.kappa_hat <= d.kappa * slack
            and self.R_hat <= d.R * slack
            and self.M_hat <= d.M * slack
        )

    @property
    def passed(self) -> bool:
        return self.constraints_pass and self.estimates_pass

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kappa_hat": self.kappa_hat,
            "R_hat": self.R_hat,
            "M_hat": self.M_hat,
            "M_by_clause": dict(self.M_by_clause),
            "declared": self.declared.to_dict(),
            "a": self.a,
            "omega": self.omega,
            "sampled_indices": list(self.sampled_indices),
            "sample_count": self.sample_count,
            "skipped": [list(s) for s in self.skipped],
            "constraints_pass": self.constraints_pass,
            "estimates_pass": self.estimates_pass,
            "passed": self.passed,
        }


def _operator_norm(blocks: np.ndarray) -> np.ndarray:
    # sup-norm operator norm: max absolute row sum
    if blocks.shape[-1] == 0 or blocks.shape[-2] == 0:
        return np.zeros(blocks.shape[:-2])
    return np.max(np.sum(np.abs(blocks), axis=-1), axis=-1)


def _sample_indices(horizon: int, count: int) -> List[int]:
    if horizon <= 1:
        return [0]
    return sorted({int(j) for j in np.linspace(0, horizon - 1, num=min(count, horizon))})


def _higher_derivative_ratios(
    model: PerturbationModel,
    K: np.ndarray,
    V: np.ndarray,
    j: int,
    radii: np.ndarray,
    envelope_k: float,
    envelope_v: float,
) -> Dict[str, float]:
    """
    Ratios of coordinate second/third derivatives to M (chi g^3)^{1-n} (g^2|log g|)^{-m}.

    Second derivatives come from central differences of the Jacobian, third
    derivatives from second differences along the same coordinate. Steps never
    drop below a rounding floor relative to |x_p|, and the rounding error bound
    of each difference is subtracted before the ratio is taken.
    """
    width = K.shape[1]
    x = np.hstack([K, V])
    base = model.jacobians(K, V, j)
    ratios = {"second": 0.0, "third": 0.0}
    for p in range(width + 3):
        in_k = p < width
        if radii[p] <= 0.0:
            continue
        scale = float(np.max(np.abs(x[:, p])))
        step2 = max(SECOND_DERIVATIVE_STEP * radii[p], SECOND_STEP_FLOOR * scale)
        step3 = max(THIRD_DERIVATIVE_STEP * radii[p], THIRD_STEP_FLOOR * scale)
        shifted = []
        for step in (step2, -step2, step3, -step3):
            y = x.copy()
            y[:, p] += step
            shifted.append(model.jacobians(y[:, :width], y[:, width:], j))
        rounding2 = ROUNDING_FACTOR * EPS * (np.abs(shifted[0]) + np.abs(shifted[1])) / (2.0 * step2)
        rounding3 = (
            ROUNDING_FACTOR * EPS * (np.abs(shifted[2]) + 2.0 * np.abs(base) + np.abs(shifted[3])) / step3**2
        )
        second = np.maximum(np.abs(shifted[0] - shifted[1]) / (2.0 * step2) - rounding2, 0.0)
        third = np.maximum(np.abs(shifted[2] - 2.0 * base + shifted[3]) / step3**2 - rounding3, 0.0)
        for q in range(width + 3):
            n_k = int(in_k) + int(q < width)
            n_v = 2 - n_k
            denominator2 = envelope_k ** (1 - n_k) * envelope_v ** (-n_v)
            value2 = float(np.max(second[:, :, q]))
            ratios["second"] = max(ratios["second"], value2 / denominator2)
            n_k3 = 2 * int(in_k) + int(q < width)
            n_v3 = 3 - n_k3
            denominator3 = envelope_k ** (1 - n_k3) * envelope_v ** (-n_v3)
            value3 = float(np.max(third[:, :, q]))
            ratios["third"] = max(ratios["third"], value3 / denominator3)
    return ratios


def check_A3(
    model: PerturbationModel,
    scheme: WeightScheme,
    params: ParamSeq,
    sample_count: int = 200,
    rng_seed: int = 0,
    solution: Optional[QuadraticSolution] = None,
    declared: Optional[ModelEnvelope] = None,
    index_count: int = 8,
    higher_derivatives: bool = True,
) -> A3Report:
    """
    Estimate the model's (kappa, R, M) on D_j and compare with the declared values.

    Args:
        model: Perturbation model
        scheme: Weight scheme providing g_ring, a and h
        params: Coefficient sequences
        sample_count: Samples per scale
        rng_seed: Seed of the sampler
        solution: Reference quadratic solution (solved at the scheme's horizon when omitted)
        declared: Declared constants (default: the model's envelope)
        index_count: Number of scales sampled
        higher_derivatives: Also estimate second/third derivative envelopes

    Returns:
        A3Report; evaluation failures are skipped and recorded
    """
    with stage("A3 check"):
        if solution is None:
            solution = solve_quadratic_bvp(
                float(scheme.gring[0]), params, horizon=scheme.horizon, enforce_assumptions=False
            )
        declared = declared or model.envelope
        model = model.with_cutoff(solution.cutoff)
        dom = DomainSpec(solution, scheme.a, scheme.h)
        rng = np.random.default_rng(rng_seed)
        horizon = solution.horizon
        width = model.k_dims.width(horizon)
        mask = model.k_dims.mask(horizon, width)
        radii_all = dom.radii()

        indices = _sample_indices(horizon, index_count)
        kappa_hat = R_hat = 0.0
        clauses: Dict[str, float] = {
            "rho": 0.0,
            "DK_rho": 0.0,
            "DV_psi": 0.0,
            "DV_rho": 0.0,
        }
        if higher_derivatives:
            clauses.update({"second": 0.0, "third": 0.0})
        skipped: List[Tuple[int, str]] = []

        for j in indices:
            if j + 1 > horizon:
                continue
            cube_next = float(solution.chi[j + 1] * solution.gbar[j + 1] ** 3)
            square_next = float(solution.chi[j + 1] * solution.gbar[j + 1] ** 2)
            log_square_next = float(solution.gbar[j + 1] ** 2 * abs(math.log(solution.gbar[j + 1])))
            K, V = dom.sample(j, sample_count, width, rng, mask[j])
            radii = np.concatenate([np.full(width, radii_all[j, 0]), radii_all[j, 1:]])
            try:
                with np.errstate(divide="raise", over="raise", invalid="raise"):
                    psi_free = model.psi_all(np.zeros_like(K), V, j)
                    rho = model.rho_all(K, V, j)
                    jac = model.jacobians(K, V, j, np.tile(radii, (len(V), 1)))
            except (ArithmeticError, ValueError) as e:
                skipped.append((j, f"evaluation failed: {e}"))
                logger.debug(f"A3 sampling skipped j={j}: {e}")
                continue
            if not (np.all(np.isfinite(jac)) and np.all(np.isfinite(rho))):
                skipped.append((j, "non-finite model output"))
                continue

            DK_psi, DV_psi, DK_rho, DV_rho = split_jacobian(jac, width)
            kappa_hat = max(kappa_hat, float(np.max(_operator_norm(DK_psi))))
            R_hat = max(R_hat, float(np.max(np.max(np.abs(psi_free), axis=1))) / cube_next)
            clauses["rho"] = max(clauses["rho"], float(np.max(np.abs(rho))) / cube_next)
            clauses["DK_rho"] = max(clauses["DK_rho"], float(np.max(_operator_norm(DK_rho))))
            clauses["DV_psi"] = max(clauses["DV_psi"], float(np.max(_operator_norm(DV_psi))) / square_next)
            clauses["DV_rho"] = max(clauses["DV_rho"], float(np.max(_operator_norm(DV_rho))) / square_next)

            if higher_derivatives:
                probe = min(len(V), 16)
                higher = _higher_derivative_ratios(
                    model, K[:probe], V[:probe], j, radii, cube_next, log_square_next
                )
                for key, value in higher.items():
                    clauses[key] = max(clauses[key], value)

        M_hat = max(clauses.values()) if clauses else 0.0
        report = A3Report(
            kappa_hat=kappa_hat,
            R_hat=R_hat,
            M_hat=M_hat,
            M_by_clause=clauses,
            declared=declared,
            a=scheme.a,
            omega=params.omega,
            sampled_indices=indices,
            sample_count=sample_count,
            skipped=skipped,
        )
        status = status_icon(report.passed)
        logger.info(
            f"{status} A3: kappa_hat={kappa_hat:.4g}, R_hat={R_hat:.4g}, M_hat={M_hat:.4g} "
            f"(declared {declared.kappa}, {declared.R}, {declared.M})"
        )
    return report
