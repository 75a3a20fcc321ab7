# src/quadratic/bvp.py
"""
Global solution of the quadratic flow with g0 given and z, mu -> 0.

g-bar is iterated forward. z-bar and mu-bar are the backward sums

    z_j  = (z_{j+1} + theta_j g_j^2) / (1 - zeta_j g_j)
    mu_j = (mu_{j+1} - sigma_j) / (lam_j - tau_j)

started at the horizon from a boundary value whose error is bounded by a
TailEnvelope. Adaptive solves double the horizon until the bound drops below
the tolerance.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .tails import TailEnvelope, scaled
from ..models.flow_sequence import FlowSequence, VTriple
from ..params.assumptions import check_A1, check_A2
from ..params.cutoff import CutoffData, cutoff_time, default_horizon
from ..params.sequences import ParamSeq
from ..utils.errors import (
    ExpansivityViolatedError,
    GateError,
    GZeroTooLargeError,
    InvalidParametersError,
    TailNotCertifiedError,
)
from ..utils.logging import logger

DEFAULT_TOL = 1e-12
MAX_HORIZON = 2**17


@dataclass(frozen=True)
class QuadraticGate:
    """
    Admissibility gate: g0 * sup|beta| and the mu contraction rate alpha.
    """

    g0_beta_max: float = 0.1
    alpha_max: float = 0.75

    def check_g0(self, g0: float, beta_sup: float) -> None:
        if g0 * beta_sup > self.g0_beta_max:
            raise GateError(
                f"g0 * sup|beta| = {g0 * beta_sup:.6g} exceeds the gate {self.g0_beta_max}"
            )

    def check_alpha(self, alpha: float) -> None:
        if alpha > self.alpha_max:
            raise GateError(f"alpha = {alpha:.6g} exceeds the gate {self.alpha_max}")


def iterate_gbar(g0: float, params: ParamSeq, horizon: int) -> np.ndarray:
    """
    Forward iteration g_{j+1} = g_j - beta_j g_j^2 for j < horizon.

    Args:
        g0: Initial coupling (positive)
        params: Coefficient sequences
        horizon: Number of steps J

    Returns:
        Array of gbar_0 .. gbar_J

    Raises:
        InvalidParametersError: If g0 is not positive
        GZeroTooLargeError: If some gbar_j is not positive
    """
    if not g0 > 0.0:
        raise InvalidParametersError(f"g0 must be positive, got {g0}")
    beta = params.beta.values(horizon).tolist()
    out = [float(g0)]
    g = float(g0)
    for j, b in enumerate(beta):
        g = g - b * g * g
        if not g > 0.0:
            raise GZeroTooLargeError(j + 1, g)
        out.append(g)
    return np.array(out)


@dataclass
class _ZPass:
    values: np.ndarray
    error: float
    tail_sup: float
    boundary: float


@dataclass
class _MuPass:
    values: np.ndarray
    sigma: np.ndarray
    tau: np.ndarray
    alpha: float
    error: float
    tail_sup: float


def _z_pass(gbar: np.ndarray, g_next: float, params: ParamSeq) -> _ZPass:
    horizon = len(gbar) - 1
    theta = params.theta.values(horizon + 1)
    zeta = params.zeta.values(horizon + 1)
    denominators = 1.0 - zeta * gbar
    if np.any(denominators <= 0.0):
        index = int(np.nonzero(denominators <= 0.0)[0][0])
        raise GateError(f"1 - zeta_j gbar_j <= 0 at j={index}; g0 too large for zeta")

    tail = TailEnvelope(params, horizon + 1, g_next)
    closed = tail.closed_form_z()
    if closed is not None:
        boundary = closed
        error = 0.0
        tail_sup = abs(closed) / g_next * tail.g_up if g_next > 0 else 0.0
    else:
        boundary = 0.0
        tail_sup = scaled(tail.weighted_sum(params.theta, 2), tail.growth(params.zeta))
        growth = np.cumprod((1.0 / denominators)[::-1])[::-1]
        error = scaled(tail_sup, float(np.max(growth)))

    sources = (theta * gbar * gbar).tolist()
    factors = denominators.tolist()
    values = [0.0] * (horizon + 1)
    z = boundary
    for j in range(horizon, -1, -1):
        z = (z + sources[j]) / factors[j]
        values[j] = z
    return _ZPass(np.array(values), error, tail_sup, boundary)


def _mu_pass(
    gbar: np.ndarray, zbar: np.ndarray, z_pass: _ZPass, g_next: float, params: ParamSeq
) -> _MuPass:
    horizon = len(gbar) - 1
    table = params.table(horizon + 1)
    g, z = gbar, zbar
    tau = table.ups_gmu * g + table.ups_zmu * z
    sigma = (
        table.eta * g
        + table.gamma * z
        - table.ups_gg * g * g
        - table.ups_gz * g * z
        - table.ups_zz * z * z
    )
    denominators = table.lam - tau
    if np.any(denominators <= 1.0):
        index = int(np.nonzero(denominators <= 1.0)[0][0])
        raise ExpansivityViolatedError(
            f"lambda_j - tau_j = {denominators[index]:.6g} <= 1 at j={index}", index
        )
    inverse = 1.0 / denominators

    tail = TailEnvelope(params, horizon + 1, g_next)
    zs = z_pass.tail_sup
    start = horizon + 1
    tau_sup = scaled(params.ups_gmu.sup_abs(start), tail.g_up) + scaled(
        params.ups_zmu.sup_abs(start), zs
    )
    lam_inf = params.lam.infimum(start)
    alpha_tail = 1.0 / (lam_inf - tau_sup) if lam_inf - tau_sup > 1.0 else math.inf
    alpha = max(float(np.max(inverse)), alpha_tail)
    if alpha >= 1.0:
        raise ExpansivityViolatedError(
            f"alpha = {alpha:.6g} >= 1 beyond the horizon (lambda_inf={lam_inf:.6g})"
        )

    sigma_sup = (
        scaled(params.eta.sup_abs(start), tail.g_up)
        + scaled(params.gamma.sup_abs(start), zs)
        + scaled(params.ups_gg.sup_abs(start), tail.g_up**2)
        + scaled(params.ups_gz.sup_abs(start), scaled(tail.g_up, zs))
        + scaled(params.ups_zz.sup_abs(start), zs * zs)
    )
    tail_sup = scaled(sigma_sup, alpha_tail / (1.0 - alpha_tail))

    sources = sigma.tolist()
    factors = inverse.tolist()
    values = [0.0] * (horizon + 1)
    mu = 0.0
    for j in range(horizon, -1, -1):
        mu = (mu - sources[j]) * factors[j]
        values[j] = mu
    mu_values = np.array(values)

    decay = float(np.max(np.cumprod(inverse[::-1])))
    z_error = z_pass.error if math.isfinite(z_pass.error) else 0.0
    coupling = float(
        np.max(
            np.abs(table.gamma)
            + np.abs(table.ups_gz) * g
            + np.abs(table.ups_zz) * (2.0 * np.abs(z) + z_error)
            + np.abs(table.ups_zmu) * np.abs(mu_values)
        )
    )
    error = scaled(decay, tail_sup) + scaled(
        scaled(coupling, z_pass.error), alpha / (1.0 - alpha)
    )
    return _MuPass(mu_values, sigma, tau, alpha, error, tail_sup)


def solve_zbar(gbar: np.ndarray, params: ParamSeq, tol: float = DEFAULT_TOL) -> np.ndarray:
    """
    z-bar on the horizon of gbar, with the tail bound checked against tol.

    Args:
        gbar: gbar_0 .. gbar_J
        params: Coefficient sequences
        tol: Required bound on the truncation error

    Returns:
        Array of z-bar_0 .. z-bar_J

    Raises:
        TailNotCertifiedError: If the truncation error bound exceeds tol
    """
    gbar = np.asarray(gbar, dtype=float)
    horizon = len(gbar) - 1
    g_next = gbar[-1] - params.beta[horizon] * gbar[-1] ** 2
    z_pass = _z_pass(gbar, g_next, params)
    if not z_pass.error <= tol:
        raise TailNotCertifiedError(
            f"z-bar tail bound {z_pass.error:.3g} exceeds tol {tol:.3g} at horizon {horizon}",
            z_pass.error,
        )
    return z_pass.values


def solve_mubar(
    gbar: np.ndarray, zbar: np.ndarray, params: ParamSeq, tol: float = DEFAULT_TOL
) -> np.ndarray:
    """
    mu-bar on the horizon of gbar, with the tail bound checked against tol.

    zbar is taken as exact; use solve_quadratic_bvp for the combined bound.

    Raises:
        ExpansivityViolatedError: If (lambda_j - tau_j)^{-1} >= 1 somewhere
        TailNotCertifiedError: If the truncation error bound exceeds tol
    """
    gbar = np.asarray(gbar, dtype=float)
    zbar = np.asarray(zbar, dtype=float)
    if gbar.shape != zbar.shape:
        raise ValueError(f"gbar and zbar lengths differ: {gbar.shape} vs {zbar.shape}")
    horizon = len(gbar) - 1
    g_next = gbar[-1] - params.beta[horizon] * gbar[-1] ** 2
    tail = TailEnvelope(params, horizon + 1, g_next)
    z_bound = abs(zbar[-1]) + scaled(
        tail.weighted_sum(params.theta, 2), tail.growth(params.zeta)
    )
    exact_z = _ZPass(zbar, 0.0, z_bound, 0.0)
    mu_pass = _mu_pass(gbar, zbar, exact_z, g_next, params)
    if not mu_pass.error <= tol:
        raise TailNotCertifiedError(
            f"mu-bar tail bound {mu_pass.error:.3g} exceeds tol {tol:.3g} at horizon {horizon}",
            mu_pass.error,
        )
    return mu_pass.values


class QuadraticSolution:
    """
    The quadratic flow V-bar on j = 0..J with its truncation certificate.
    """

    def __init__(
        self,
        g0: float,
        gbar: np.ndarray,
        zbar: np.ndarray,
        mubar: np.ndarray,
        sigma: np.ndarray,
        tau: np.ndarray,
        alpha: float,
        tail_certificate: float,
        tail_bound: float,
        tol: float,
        cutoff: CutoffData,
        gbar_next: float,
        z_boundary: float,
    ) -> None:
        self.g0 = float(g0)
        self.gbar = gbar
        self.zbar = zbar
        self.mubar = mubar
        self.sigma = sigma
        self.tau = tau
        self.alpha = float(alpha)
        self.tail_certificate = float(tail_certificate)
        self.tail_bound = float(tail_bound)
        self.tol = float(tol)
        self.cutoff = cutoff
        self.gbar_next = float(gbar_next)
        self.z_boundary = float(z_boundary)
        self.chi = cutoff.chi_values(len(gbar))
        self._vbar = np.column_stack([gbar, zbar, mubar])
        for arr in (self.gbar, self.zbar, self.mubar, self.sigma, self.tau, self.chi, self._vbar):
            arr.setflags(write=False)

    @property
    def horizon(self) -> int:
        return len(self.gbar) - 1

    @property
    def certified(self) -> bool:
        return self.tail_certificate <= self.tol

    @property
    def vbar(self) -> np.ndarray:
        """
        Array (J+1, 3) with columns g, z, mu.
        """
        return self._vbar

    def vtriple(self, j: int) -> VTriple:
        return VTriple(self.gbar[j], self.zbar[j], self.mubar[j])

    def as_flow_sequence(self, k_dim: int = 1) -> FlowSequence:
        return FlowSequence(np.zeros((self.horizon + 1, k_dim)), self.vbar)

    @property
    def envelope_z(self) -> float:
        """sup_j |z-bar_j| / (chi_j gbar_j)."""
        return float(np.max(np.abs(self.zbar) / (self.chi * self.gbar)))

    @property
    def envelope_mu(self) -> float:
        """sup_j |mu-bar_j| / (chi_j gbar_j)."""
        return float(np.max(np.abs(self.mubar) / (self.chi * self.gbar)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "g0": self.g0,
            "horizon": self.horizon,
            "alpha": self.alpha,
            "tail_certificate": self.tail_certificate,
            "tail_bound": self.tail_bound if math.isfinite(self.tail_bound) else "inf",
            "tol": self.tol,
            "certified": self.certified,
            "envelope_z": self.envelope_z,
            "envelope_mu": self.envelope_mu,
            "cutoff": self.cutoff.to_dict(),
        }

    def csv_header(self) -> List[str]:
        return ["j", "gbar", "zbar", "mubar", "chi"]

    def csv_rows(self) -> List[List[float]]:
        return [
            [j, float(g), float(z), float(mu), float(c)]
            for j, (g, z, mu, c) in enumerate(
                zip(self.gbar, self.zbar, self.mubar, self.chi)
            )
        ]

    def __repr__(self) -> str:
        return (
            f"QuadraticSolution(g0={self.g0}, horizon={self.horizon}, "
            f"alpha={self.alpha:.4g}, tail={self.tail_certificate:.3g})"
        )


def _solve_at_horizon(
    g0: float, params: ParamSeq, horizon: int, cutoff: CutoffData, tol: float
) -> QuadraticSolution:
    extended = iterate_gbar(g0, params, horizon + 1)
    gbar, g_next = extended[:-1], float(extended[-1])
    z_pass = _z_pass(gbar, g_next, params)
    mu_pass = _mu_pass(gbar, z_pass.values, z_pass, g_next, params)
    return QuadraticSolution(
        g0=g0,
        gbar=gbar,
        zbar=z_pass.values,
        mubar=mu_pass.values,
        sigma=mu_pass.sigma,
        tau=mu_pass.tau,
        alpha=mu_pass.alpha,
        tail_certificate=max(z_pass.error, mu_pass.error),
        tail_bound=max(z_pass.tail_sup, mu_pass.tail_sup),
        tol=tol,
        cutoff=cutoff,
        gbar_next=g_next,
        z_boundary=z_pass.boundary,
    )


def _enforce_assumptions(params: ParamSeq, cutoff: CutoffData, horizon: int) -> None:
    a1 = check_A1(params, horizon, cutoff)
    if not a1.passed:
        raise InvalidParametersError(
            f"Assumption A1 fails: sup|beta|={a1.beta_sup:.6g}, best c={a1.c:.6g}"
        )
    a2 = check_A2(params, cutoff, horizon)
    if not a2.passed:
        clauses = [
            name
            for name, ok in (
                ("lambda", a2.lambda_pass),
                ("zeta", a2.zeta_pass),
                ("envelope", a2.envelope_pass),
            )
            if not ok
        ]
        detail = ""
        if a2.lambda_offending_index is not None:
            detail = f" (lambda_{a2.lambda_offending_index} <= 1)"
        raise InvalidParametersError(f"Assumption A2 fails: {', '.join(clauses)}{detail}")


def solve_quadratic_bvp(
    g0: float,
    params: ParamSeq,
    tol: float = DEFAULT_TOL,
    horizon: Optional[int] = None,
    gate: Optional[QuadraticGate] = None,
    enforce_assumptions: bool = True,
    max_horizon: int = MAX_HORIZON,
) -> QuadraticSolution:
    """
    Solve the quadratic boundary-value problem.

    With horizon=None the horizon starts at default_horizon and doubles until
    the truncation bound is at most tol. With an explicit horizon a single
    solve runs and the result carries certified=False when the bound misses tol.

    Args:
        g0: Initial coupling
        params: Coefficient sequences
        tol: Truncation tolerance
        horizon: Fixed horizon, or None for the adaptive mode
        gate: Admissibility gate (default QuadraticGate())
        enforce_assumptions: Refuse inputs failing A1/A2
        max_horizon: Largest horizon tried by the adaptive mode

    Returns:
        QuadraticSolution

    Raises:
        InvalidParametersError: On non-positive g0 or failing assumptions
        GateError: If g0 or alpha fall outside the gate
        ExpansivityViolatedError: If alpha >= 1
        TailNotCertifiedError: If the adaptive mode cannot reach tol
    """
    gate = gate or QuadraticGate()
    if not g0 > 0.0:
        raise InvalidParametersError(f"g0 must be positive, got {g0}")
    cutoff = cutoff_time(params)
    gate.check_g0(g0, cutoff.beta_sup)

    start = horizon if horizon is not None else default_horizon(cutoff, tol)
    start = max(start, 1)
    if enforce_assumptions:
        _enforce_assumptions(params, cutoff, start)

    if horizon is not None:
        solution = _solve_at_horizon(g0, params, horizon, cutoff, tol)
        gate.check_alpha(solution.alpha)
        if not solution.certified:
            logger.warning(
                f"⚠️ Tail bound {solution.tail_certificate:.3g} exceeds tol {tol:.3g} "
                f"at horizon {horizon}"
            )
        return solution

    current = max(start, params.stored_length + 1)
    while True:
        solution = _solve_at_horizon(g0, params, current, cutoff, tol)
        gate.check_alpha(solution.alpha)
        logger.debug(
            f"Quadratic solve at J={current}: tail bound {solution.tail_certificate:.3g}"
        )
        if solution.certified:
            return solution
        if current >= max_horizon:
            raise TailNotCertifiedError(
                f"Tail bound {solution.tail_certificate:.3g} still exceeds tol {tol:.3g} "
                f"at the maximal horizon {current}",
                solution.tail_certificate,
            )
        current = min(2 * current, max_horizon)


def horizon_sweep(
    g0: float, params: ParamSeq, horizons: List[int], **kwargs: Any
) -> List[Tuple[int, QuadraticSolution]]:
    """
    Explicit-horizon solves at each horizon, in order.
    """
    return [
        (h, solve_quadratic_bvp(g0, params, horizon=h, **kwargs)) for h in horizons
    ]
