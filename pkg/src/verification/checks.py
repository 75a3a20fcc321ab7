# src/verification/checks.py
"""
Named invariant checks, one function per property, grouped by module.

Every check takes a SuiteContext and returns an Outcome with the fitted
constants it measured and the tolerance it compared them with.
"""

import math

import numpy as np

from .context import SuiteContext
from .registry import Outcome, not_applicable, register_check
from ..homotopy.context import select_horizon
from ..homotopy.integrator import flow_gap, integrate_backward, integrate_homotopy
from ..homotopy.oracles import shooting_solve, sweep_solve
from ..homotopy.sensitivity import (
    SolveOptions,
    beta_scaling_family,
    derivative_bound_fit,
    refinement_study,
    sensitivity,
)
from ..linear.banded_oracle import solve_frozen
from ..linear.neumann import apply_S
from ..linear.norms import operator_norm_estimate
from ..linear.s0 import apply_S0, s0_equation_residual
from ..linear.w_operator import build_W
from ..models.approximate_flow import kbar_ratios, pad_k0, rho_sequence
from ..models.builtin import ZeroPerturbation
from ..models.domain import DomainSpec
from ..models.flow_sequence import FlowSequence
from ..params.a3 import check_A3
from ..params.cutoff import CHI_FLOOR, cutoff_time
from ..params.sequences import CoefficientSequence, ParamSeq
from ..params.weights import expand_weights, residual_norm, weighted_norm
from ..quadratic.certificates import (
    abrupt_cutoff_check,
    asymptotic_ratio_report,
    beta_monotonicity,
    envelope_stability,
    forward_residual,
    initial_condition_stability,
    riemann_sum_check,
    zbar_ratio_growth,
    zeta_product_bound,
)
from ..quadratic.derivatives import gbar_derivatives

# Relative change allowed for a fitted constant under horizon doubling
STABILITY_TOL = 0.1


def _stable(first: float, second: float, rel: float = STABILITY_TOL) -> bool:
    return math.isclose(first, second, rel_tol=rel, abs_tol=1e-12)


def _random_forcing(ctx: SuiteContext, rng: np.random.Generator, k_only: bool = False) -> FlowSequence:
    """
    Residual-shaped probe: uniform entries scaled by the floored v weights, entry 0 zero.
    """
    blocks = ctx.homotopy.blocks
    scale = expand_weights(ctx.homotopy.scheme.residual_weights(), blocks.width)
    data = rng.uniform(-1.0, 1.0, size=scale.shape) * scale
    data[0] = 0.0
    if k_only:
        data[:, blocks.width :] = 0.0
    return FlowSequence.from_stacked(data, blocks.width)


# params-and-spaces


@register_check("chi_multiplicative", "params-and-spaces", "chi_j / chi_{j+1} is 1 or Omega")
def check_chi_multiplicative(ctx: SuiteContext) -> Outcome:
    chi = ctx.cutoff.chi_values(ctx.instance.quadratic_horizon + 2)
    ratios = chi[:-1] / chi[1:]
    live = chi[1:] > CHI_FLOOR
    omega = ctx.params.omega
    deviation = np.minimum(np.abs(ratios - 1.0), np.abs(ratios - omega) / omega)[live]
    worst = float(np.max(deviation)) if len(deviation) else 0.0
    return Outcome(worst <= 1e-12, {"max_deviation": worst, "j_omega": ctx.cutoff.j_omega}, 1e-12)


@register_check("weighted_norm_axioms", "params-and-spaces", "homogeneity and triangle inequality")
def check_weighted_norm_axioms(ctx: SuiteContext) -> Outcome:
    rng = ctx.rng("weighted_norm_axioms")
    scheme = ctx.scheme
    scale = expand_weights(scheme.weights("w"), 1)
    worst_homogeneity = worst_triangle = 0.0
    for _ in range(50):
        x = FlowSequence.from_stacked(rng.uniform(-2.0, 2.0, scale.shape) * scale, 1)
        y = FlowSequence.from_stacked(rng.uniform(-2.0, 2.0, scale.shape) * scale, 1)
        c = float(rng.uniform(-10.0, 10.0))
        nx, ny = weighted_norm(x, scheme), weighted_norm(y, scheme)
        homogeneity = abs(weighted_norm(c * x, scheme) - abs(c) * nx) / (abs(c) * nx)
        triangle = (weighted_norm(x + y, scheme) - nx - ny) / (nx + ny)
        worst_homogeneity = max(worst_homogeneity, homogeneity)
        worst_triangle = max(worst_triangle, triangle)
    passed = worst_homogeneity <= 1e-12 and worst_triangle <= 1e-12
    return Outcome(
        passed, {"homogeneity": worst_homogeneity, "triangle_excess": worst_triangle}, 1e-12
    )


@register_check("cutoff_monotone", "params-and-spaces", "j_Omega is non-decreasing in Omega")
def check_cutoff_monotone(ctx: SuiteContext) -> Outcome:
    rng = ctx.rng("cutoff_monotone")
    violations = 0
    trials = 50
    for _ in range(trials):
        prefix = rng.uniform(0.0, 1.0, 30) * (rng.uniform(size=30) < 0.7)
        if not np.any(prefix):
            prefix[0] = 1.0
        low, high = sorted(rng.uniform(1.1, 5.0, 2))
        beta = CoefficientSequence(prefix)
        first = cutoff_time(ParamSeq(float(low), beta=beta)).j_omega
        second = cutoff_time(ParamSeq(float(high), beta=beta)).j_omega
        violations += int(first > second)
    return Outcome(violations == 0, {"trials": trials, "violations": violations})


@register_check("a3_reproducible", "params-and-spaces", "A3 passes and reruns bit-exactly")
def check_a3_reproducible(ctx: SuiteContext) -> Outcome:
    kwargs = dict(sample_count=100, rng_seed=ctx.seed, solution=ctx.solution)
    first = check_A3(ctx.instance.model, ctx.scheme, ctx.params, **kwargs)
    second = check_A3(ctx.instance.model, ctx.scheme, ctx.params, **kwargs)
    same = first.to_dict() == second.to_dict()
    return Outcome(
        first.passed and same,
        {"kappa_hat": first.kappa_hat, "R_hat": first.R_hat, "M_hat": first.M_hat, "reproducible": same},
    )


# quadratic-flow


@register_check("forward_residual", "quadratic-flow", "V-bar solves the forward recursion")
def check_forward_residual(ctx: SuiteContext) -> Outcome:
    residual = forward_residual(ctx.solution, ctx.params)
    return Outcome(residual <= 1e-13, {"residual": residual}, 1e-13)


@register_check("beta_monotonicity", "quadratic-flow", "raising one beta_k never raises g-bar")
def check_beta_monotonicity(ctx: SuiteContext) -> Outcome:
    report = beta_monotonicity(
        ctx.instance.g0,
        ctx.params,
        ctx.instance.quadratic_horizon,
        ctx.rng("beta_monotonicity"),
        trials=20,
    )
    increase = report["max_relative_increase"]
    return Outcome(increase <= 1e-14, {"max_relative_increase": increase}, 1e-14)


@register_check(
    "initial_condition_stability", "quadratic-flow", "fitted C stable for delta in {0.01, 0.1}"
)
def check_initial_condition_stability(ctx: SuiteContext) -> Outcome:
    horizon = ctx.instance.quadratic_horizon
    measured = {}
    passed = True
    for delta in (0.01, 0.1):
        first = initial_condition_stability(ctx.instance.g0, delta, ctx.params, horizon)
        second = initial_condition_stability(ctx.instance.g0, delta, ctx.params, 2 * horizon)
        measured[f"C_{delta}"] = first["fitted_C"]
        measured[f"C_{delta}_doubled"] = second["fitted_C"]
        passed &= math.isfinite(first["fitted_C"]) and _stable(first["fitted_C"], second["fitted_C"])
    return Outcome(passed, measured, STABILITY_TOL)


@register_check("riemann_sum", "quadratic-flow", "sums of beta psi(g) g^2 match the integral")
def check_riemann_sum(ctx: SuiteContext) -> Outcome:
    reports = [riemann_sum_check(n, ctx.solution, ctx.params) for n in (1, 2, 3)]
    measured = {f"n{r.n}_difference": r.difference for r in reports}
    measured.update({f"n{r.n}_bound": r.correction_bound for r in reports})
    return Outcome(all(r.passed for r in reports), measured)


@register_check("zeta_product", "quadratic-flow", "prod (1 - zeta g)^-1 bounded independent of range")
def check_zeta_product(ctx: SuiteContext) -> Outcome:
    first = zeta_product_bound(ctx.solution.gbar, ctx.params)
    second = zeta_product_bound(ctx.doubled.gbar, ctx.params)
    passed = math.isfinite(first) and _stable(first, second)
    return Outcome(passed, {"bound": first, "bound_doubled": second}, STABILITY_TOL)


@register_check("zbar_envelope", "quadratic-flow", "sup |z-bar|/(chi g-bar) stable under doubling")
def check_zbar_envelope(ctx: SuiteContext) -> Outcome:
    report = envelope_stability(
        ctx.instance.g0,
        ctx.params,
        ctx.instance.quadratic_horizon,
        enforce_assumptions=ctx.instance.enforce_assumptions,
    )
    return Outcome(report.change < 0.05, report.to_dict(), 0.05)


@register_check("derivative_envelopes", "quadratic-flow", "g0-derivative constants stable in J")
def check_derivative_envelopes(ctx: SuiteContext) -> Outcome:
    first = gbar_derivatives(ctx.solution, ctx.params).envelope_constants(ctx.solution)
    second = gbar_derivatives(ctx.doubled, ctx.params).envelope_constants(ctx.doubled)
    measured = dict(first)
    measured.update({f"{k}_doubled": v for k, v in second.items()})
    passed = all(math.isfinite(first[k]) and _stable(first[k], second[k]) for k in first)
    return Outcome(passed, measured, STABILITY_TOL)


@register_check("abrupt_cutoff", "quadratic-flow", "g-bar constant after the last nonzero beta")
def check_abrupt_cutoff(ctx: SuiteContext) -> Outcome:
    report = abrupt_cutoff_check(ctx.solution, ctx.params)
    if report is None:
        return not_applicable("beta has no finite last index on the horizon")
    tolerance = ctx.instance.plateau_tolerance
    passed = report.bit_exact and (tolerance is None or report.relative_deviation <= tolerance)
    return Outcome(passed, report.to_dict(), tolerance)


def _requested(ctx: SuiteContext, name: str) -> bool:
    return ctx.instance.checks is not None and name in ctx.instance.checks


def _ratio_growth(ctx: SuiteContext):
    J = ctx.instance.quadratic_horizon
    return zbar_ratio_growth(
        ctx.instance.g0,
        ctx.params,
        [J, 2 * J, 4 * J, 8 * J],
        enforce_assumptions=ctx.instance.enforce_assumptions,
    )


@register_check("zbar_ratio_growth", "quadratic-flow", "sup |z-bar|/g-bar grows with J and passes 3")
def check_zbar_ratio_growth(ctx: SuiteContext) -> Outcome:
    if not _requested(ctx, "zbar_ratio_growth"):
        return not_applicable("only run on instances that request it")
    report = _ratio_growth(ctx)
    return Outcome(report.increasing and report.ratios[-1] > 3.0, report.to_dict(), 3.0)


@register_check("zbar_ratio_bounded", "quadratic-flow", "sup |z-bar|/g-bar stays below 1 for every J")
def check_zbar_ratio_bounded(ctx: SuiteContext) -> Outcome:
    if not _requested(ctx, "zbar_ratio_bounded"):
        return not_applicable("only run on instances that request it")
    report = _ratio_growth(ctx)
    return Outcome(max(report.ratios) < 1.0, report.to_dict(), 1.0)


@register_check("constant_beta_asymptotics", "quadratic-flow", "g-bar ~ g0 / (1 + g0 b j)")
def check_constant_beta_asymptotics(ctx: SuiteContext) -> Outcome:
    report = asymptotic_ratio_report(ctx.solution, ctx.params)
    if report is None:
        return not_applicable("beta is not constant")
    return Outcome(report.passed, report.to_dict())


# perturbation-model


@register_check("kbar_containment", "perturbation-model", "||K-bar_j|| <= a* chi g-bar^3")
def check_kbar_containment(ctx: SuiteContext) -> Outcome:
    context = ctx.homotopy
    ratio = float(np.max(kbar_ratios(context.xbar.K, context.solution)))
    return Outcome(ratio <= context.a_star, {"max_ratio": ratio}, context.a_star)


def _sampled_scales(horizon: int, count: int = 8) -> list:
    return sorted({int(j) for j in np.linspace(0, horizon - 1, count)})


def _at_scale(func, j: int, K: np.ndarray, V: np.ndarray) -> np.ndarray:
    """
    Evaluate psi or rho row by row, every sample at the same scale j.
    """
    return np.array([func(j, k, v) for k, v in zip(K, V)])


@register_check("psi_contraction", "perturbation-model", "psi is kappa-Lipschitz in K on D_j")
def check_psi_contraction(ctx: SuiteContext) -> Outcome:
    rng = ctx.rng("psi_contraction")
    solution, model = ctx.solution, ctx.model
    dom = DomainSpec(solution, ctx.instance.a, ctx.instance.h)
    width = model.k_dims.width(solution.horizon)
    kappa = model.envelope.kappa
    worst = 0.0
    for j in _sampled_scales(solution.horizon):
        K, V = dom.sample(j, 100, width, rng)
        delta = rng.uniform(-1.0, 1.0, K.shape) * 1e-3 * dom.radii()[j, 0]
        change = _at_scale(model.psi, j, K + delta, V) - _at_scale(model.psi, j, K, V)
        ratio = np.max(np.abs(change), axis=1) / np.max(np.abs(delta), axis=1)
        worst = max(worst, float(np.max(ratio)))
    return Outcome(worst <= kappa * (1.0 + 1e-8), {"kappa_observed": worst, "kappa": kappa}, kappa)


@register_check("rho_envelope", "perturbation-model", "||rho_j|| <= M chi_{j+1} g-bar_{j+1}^3")
def check_rho_envelope(ctx: SuiteContext) -> Outcome:
    rng = ctx.rng("rho_envelope")
    solution, model = ctx.solution, ctx.model
    dom = DomainSpec(solution, ctx.instance.a, ctx.instance.h)
    width = model.k_dims.width(solution.horizon)
    worst = 0.0
    for j in _sampled_scales(solution.horizon):
        K, V = dom.sample(j, 200, width, rng)
        rho = _at_scale(model.rho, j, K, V)
        envelope = solution.chi[j + 1] * solution.gbar[j + 1] ** 3
        worst = max(worst, float(np.max(np.abs(rho))) / envelope)
    M = model.envelope.M
    return Outcome(worst <= M, {"M_observed": worst, "M": M}, M)


@register_check("rho_weighted_norm", "perturbation-model", "||rho(x)||_v <= M/h on the unit w-ball")
def check_rho_weighted_norm(ctx: SuiteContext) -> Outcome:
    rng = ctx.rng("rho_weighted_norm")
    context = ctx.homotopy
    centre = context.xbar.stacked()
    scale = expand_weights(context.scheme.weights("w"), context.width)
    worst = 0.0
    for _ in range(20):
        x = FlowSequence.from_stacked(centre + rng.uniform(-1.0, 1.0, centre.shape) * scale, context.width)
        worst = max(worst, residual_norm(rho_sequence(x, context.model), context.scheme))
    bound = context.model.envelope.M / context.h
    return Outcome(worst <= bound, {"norm": worst, "bound": bound}, bound)


# linear-solver


@register_check("a_product_bound", "linear-solver", "A_j...A_l <= C (g_{j+1}/g_l)^2")
def check_a_product_bound(ctx: SuiteContext) -> Outcome:
    rng = ctx.rng("a_product_bound")
    blocks = ctx.homotopy.blocks
    g = blocks.xring.g
    horizon = blocks.horizon
    early = late = 0.0
    for _ in range(200):
        l, j = sorted(int(v) for v in rng.integers(0, horizon, 2))
        ratio = abs(blocks.a_product(l, j)) / (g[j + 1] / g[l]) ** 2
        if j < horizon // 2:
            early = max(early, ratio)
        late = max(late, ratio)
    passed = math.isfinite(late) and late <= (1.0 + STABILITY_TOL) * max(early, 1e-300)
    return Outcome(passed, {"C_first_half": early, "C": late}, STABILITY_TOL)


@register_check("c_inverse_structure", "linear-solver", "bounded zz, alpha-decaying mu-mu, chi-bounded mu-z")
def check_c_inverse_structure(ctx: SuiteContext) -> Outcome:
    rng = ctx.rng("c_inverse_structure")
    blocks = ctx.homotopy.blocks
    chi = ctx.homotopy.scheme.chi
    horizon = blocks.horizon
    constants = {"zz": 0.0, "mumu": 0.0, "muz": 0.0}
    for _ in range(100):
        j, l = sorted(int(v) for v in rng.integers(0, horizon, 2))
        product = blocks.c_inverse_product(j, l)
        constants["zz"] = max(constants["zz"], abs(product[0, 0]))
        constants["mumu"] = max(constants["mumu"], abs(product[1, 1]) / blocks.alpha ** (l - j + 1))
        constants["muz"] = max(constants["muz"], abs(product[1, 0]) / chi[j])
    passed = all(math.isfinite(v) for v in constants.values())
    return Outcome(passed, constants)


@register_check("s0_exactness", "linear-solver", "S0 r solves y_{j+1} - L_j y_j = r_j")
def check_s0_exactness(ctx: SuiteContext) -> Outcome:
    rng = ctx.rng("s0_exactness")
    blocks = ctx.homotopy.blocks
    worst = 0.0
    for _ in range(5):
        r = _random_forcing(ctx, rng)
        y = apply_S0(r, blocks)
        worst = max(worst, float(np.max(s0_equation_residual(y, r, blocks))))
    return Outcome(worst <= 1e-12, {"max_relative_residual": worst}, 1e-12)


@register_check("s0_block_diagonal", "linear-solver", "K-only forcing gives zero V response")
def check_s0_block_diagonal(ctx: SuiteContext) -> Outcome:
    y = apply_S0(_random_forcing(ctx, ctx.rng("s0_block_diagonal"), k_only=True), ctx.homotopy.blocks)
    largest = float(np.max(np.abs(y.V)))
    return Outcome(largest == 0.0, {"max_abs_V": largest}, 0.0)


@register_check("s0_oracle_agreement", "linear-solver", "S0 matches the banded direct solve")
def check_s0_oracle_agreement(ctx: SuiteContext) -> Outcome:
    rng = ctx.rng("s0_oracle_agreement")
    context = ctx.homotopy
    worst = 0.0
    for _ in range(3):
        r = _random_forcing(ctx, rng)
        gap = weighted_norm(apply_S0(r, context.blocks) - solve_frozen(r, context.blocks), context.scheme)
        worst = max(worst, gap)
    return Outcome(worst <= 1e-9, {"max_gap": worst}, 1e-9)


@register_check("neumann_consistency", "linear-solver", "(1 - S0 W) y = S0 r with contraction <= 1/2")
def check_neumann_consistency(ctx: SuiteContext) -> Outcome:
    context = ctx.homotopy
    blocks, scheme = context.blocks, context.scheme
    tol = context.config.s_tol
    r = _random_forcing(ctx, ctx.rng("neumann_consistency"))
    W = build_W(1.0, context.xbar, context.model, context.params, context.xbar)
    y, report = apply_S(1.0, context.xbar, r, blocks, W, scheme, tol=tol)
    lhs = y - apply_S0(W.apply(y), blocks)
    gap = weighted_norm(lhs - apply_S0(r, blocks), scheme)
    passed = gap <= 10.0 * tol and report.contraction <= 0.5
    return Outcome(
        passed,
        {"gap": gap, "contraction": report.contraction, "iterations": report.iterations},
        10.0 * tol,
    )


@register_check("s0_norm_independence", "linear-solver", "||S0||_{v->w} independent of (a, h)")
def check_s0_norm_independence(ctx: SuiteContext) -> Outcome:
    context = ctx.homotopy
    blocks, base = context.blocks, context.scheme
    estimates = []
    for fa in (0.5, 1.0, 2.0):
        for fh in (0.5, 1.0, 2.0):
            scheme = base.with_parameters(a=base.a * fa, a_star=base.a_star * fa, h=base.h * fh)
            estimates.append(
                operator_norm_estimate(
                    lambda r: apply_S0(r, blocks),
                    scheme,
                    in_norm="v",
                    out_norm="w",
                    probes=50,
                    seed=ctx.seed,
                    k_dim=blocks.width,
                )
            )
    low, high = min(estimates), max(estimates)
    spread = (high - low) / low if low > 0.0 else math.inf
    return Outcome(spread < 0.1, {"min": low, "max": high, "spread": spread}, 0.1)


# homotopy-flow


@register_check("rho_zero_reduction", "homotopy-flow", "rho = 0 leaves x-bar fixed")
def check_rho_zero_reduction(ctx: SuiteContext) -> Outcome:
    context = ctx.build_context(model=ZeroPerturbation(), K0=np.zeros(1))
    result = integrate_homotopy(context.xbar, None, context)
    gap = flow_gap(result.x, context.xbar, context)
    return Outcome(gap <= 1e-8, {"gap": gap}, 1e-8)


@register_check("homotopy_ball", "homotopy-flow", "flow inside the ball clauses with residual below tol")
def check_homotopy_ball(ctx: SuiteContext) -> Outcome:
    result = ctx.flow
    measured = {f"ratio_{k}": v for k, v in result.ball_ratios.items()}
    measured.update({f"bound_{k}": v for k, v in result.ball_bounds.items()})
    measured.update({"residual": result.residual, "path_ball_max": result.path_ball_max})
    return Outcome(result.passed, measured, result.residual_tol)


@register_check("boundary_conditions", "homotopy-flow", "u0 exact and certified tail at J")
def check_boundary_conditions(ctx: SuiteContext) -> Outcome:
    context, x = ctx.homotopy, ctx.flow.x
    exact = bool(
        np.array_equal(x.K[0], pad_k0(ctx.K0, context.width)) and x.g[0] == ctx.instance.g0
    )
    tail = max(abs(x.z[-1]), abs(x.mu[-1]))
    tol = context.config.tail_tol
    passed = exact and context.tail_certified and tail <= tol
    return Outcome(
        passed,
        {"u0_exact": exact, "tail": tail, "tail_certified": context.tail_certified},
        tol,
    )


@register_check("backward_uniqueness", "homotopy-flow", "integrating back recovers x-bar")
def check_backward_uniqueness(ctx: SuiteContext) -> Outcome:
    report = integrate_backward(ctx.flow, ctx.homotopy)
    return Outcome(bool(report["passed"]), {"gap": report["gap"]}, report["tolerance"])


@register_check("oracle_triangle", "homotopy-flow", "homotopy, shooting and sweep agree")
def check_oracle_triangle(ctx: SuiteContext) -> Outcome:
    inst = ctx.instance
    horizon = inst.oracle_horizon
    context = ctx.build_context(horizon=horizon)
    homotopy = integrate_homotopy(context.xbar, None, context).x
    common = dict(solution=context.solution, enforce_assumptions=inst.enforce_assumptions)
    swept = sweep_solve(
        ctx.K0, inst.g0, inst.params, inst.model, horizon, a=inst.a, a_star=inst.a_star, h=inst.h, **common
    ).trajectory
    shot = shooting_solve(ctx.K0, inst.g0, inst.params, inst.model, horizon, h=inst.h, **common).trajectory
    gaps = {
        "homotopy_sweep": flow_gap(homotopy, swept, context),
        "homotopy_shooting": flow_gap(homotopy, shot, context),
        "sweep_shooting": flow_gap(swept, shot, context),
    }
    return Outcome(max(gaps.values()) <= 1e-7, gaps, 1e-7)


@register_check("derivative_boundedness", "homotopy-flow", "d(z0, mu0)/dg0 bounded as g0 decreases", slow=True)
def check_derivative_boundedness(ctx: SuiteContext) -> Outcome:
    inst = ctx.instance
    options = SolveOptions(
        solver="sweep", a=inst.a, a_star=inst.a_star, h=inst.h, enforce_assumptions=inst.enforce_assumptions
    )
    grid = [0.1 * 2.0**-k for k in range(6)]
    reports = [
        sensitivity(np.zeros(1), g0, inst.params, inst.model, 0.01 * g0, options) for g0 in grid
    ]
    fit = derivative_bound_fit(reports)
    passed = all(
        math.isfinite(fit[name]["sup"]) and fit[name]["log_slope"] >= -0.25 and fit[name]["spread"] < 0.5
        for name in ("z", "mu")
    )
    return Outcome(passed, fit, 0.5)


@register_check("continuity_refinement", "homotopy-flow", "differences shrink under grid halving", slow=True)
def check_continuity_refinement(ctx: SuiteContext) -> Outcome:
    inst = ctx.instance
    options = SolveOptions(
        solver="sweep", a=inst.a, a_star=inst.a_star, h=inst.h, enforce_assumptions=inst.enforce_assumptions
    )
    family = beta_scaling_family(inst.params, inst.model)
    params, _ = family(1.0)
    horizon, _ = select_horizon(inst.g0, params, options.config.tail_tol, options.config.max_horizon)
    report = refinement_study(
        family, 0.9, 1.1, 3, np.zeros(1), inst.g0, options, horizon=horizon
    )
    return Outcome(report.passed, report.to_dict(), report.min_shrink)
