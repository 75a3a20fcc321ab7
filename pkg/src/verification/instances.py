# src/verification/instances.py
"""
Built-in problem instances for the verification suite.
"""

from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Tuple

from ..models.base import PerturbationModel
from ..models.builtin import CubicMonomial, LinearContraction, ZeroPerturbation
from ..params.sequences import CoefficientSequence, ParamSeq


@dataclass
class VerificationInstance:
    """
    One problem the suite runs its checks on.

    checks restricts the instance to the named checks (None runs all);
    expected_failures are checks that must fail on this instance.
    plateau_tolerance, when set, bounds the relative distance of the
    post-cut-off g-bar plateau from 1/(b L).
    """

    name: str
    params: ParamSeq
    model: PerturbationModel
    g0: float = 0.02
    K0: Tuple[float, ...] = (0.0,)
    a: float = 1.0
    a_star: float = 0.5
    h: float = 1.0
    quadratic_horizon: int = 200
    oracle_horizon: int = 40
    enforce_assumptions: bool = True
    checks: Optional[Tuple[str, ...]] = None
    expected_failures: FrozenSet[str] = field(default_factory=frozenset)
    plateau_tolerance: Optional[float] = None

    def runs(self, check: str) -> bool:
        return self.checks is None or check in self.checks


def standard_params(
    omega: float = 2.0,
    last: int = 40,
    lam: float = 1.5,
    coupling: float = 0.5,
) -> ParamSeq:
    """
    beta = 1 up to `last` and 0 afterwards; eta, gamma, theta and -zeta are
    coupling * chi_j for the resulting cut-off j_omega = last.
    """

    def enveloped(c: float) -> CoefficientSequence:
        return CoefficientSequence.enveloped(c, last, omega)

    return ParamSeq(
        omega,
        beta=CoefficientSequence.cut(1.0, last),
        eta=enveloped(coupling),
        gamma=enveloped(coupling),
        lam=CoefficientSequence.constant(lam),
        theta=enveloped(coupling),
        zeta=enveloped(-coupling),
    )


def builtin_instances() -> List[VerificationInstance]:
    """
    The default instance set: cubic, linear and zero perturbations on standard_params.
    """
    params = standard_params()
    return [
        VerificationInstance("cubic", params, CubicMonomial()),
        VerificationInstance("linear", params, LinearContraction(), K0=(1e-7,)),
        VerificationInstance("zero", params, ZeroPerturbation()),
    ]


def counterexample_instance() -> VerificationInstance:
    """
    zeta = theta = beta = 1: z-bar / g-bar grows with the horizon, so the z-bar
    envelope check must fail and sup |z-bar| / g-bar must pass 3.
    """
    params = ParamSeq.from_constants(omega=2.0, beta=1.0, zeta=1.0, theta=1.0, lam=2.0)
    return VerificationInstance(
        "counterexample",
        params,
        ZeroPerturbation(),
        g0=0.05,
        quadratic_horizon=1000,
        enforce_assumptions=False,
        checks=("forward_residual", "zbar_envelope", "zbar_ratio_growth"),
        expected_failures=frozenset({"zbar_envelope"}),
    )


def bounded_ratio_instance() -> VerificationInstance:
    """
    The counterexample with zeta = -1: sup |z-bar| / g-bar stays below 1.
    """
    params = ParamSeq.from_constants(omega=2.0, beta=1.0, zeta=-1.0, theta=1.0, lam=2.0)
    return VerificationInstance(
        "bounded_ratio",
        params,
        ZeroPerturbation(),
        g0=0.05,
        quadratic_horizon=1000,
        enforce_assumptions=False,
        checks=("forward_residual", "zbar_ratio_bounded"),
    )


def abrupt_cutoff_instance() -> VerificationInstance:
    """
    beta = 1 up to 100 and 0 afterwards at g0 = 0.1: g-bar is constant past 100
    and within 20% of 1/100.
    """
    return VerificationInstance(
        "abrupt_cutoff",
        standard_params(last=100),
        ZeroPerturbation(),
        g0=0.1,
        quadratic_horizon=300,
        enforce_assumptions=False,
        checks=("forward_residual", "abrupt_cutoff"),
        plateau_tolerance=0.2,
    )


def special_instances() -> List[VerificationInstance]:
    """Instances that each target a few checks."""
    return [counterexample_instance(), bounded_ratio_instance(), abrupt_cutoff_instance()]


def instance_by_name(name: str) -> VerificationInstance:
    """
    Raises:
        KeyError: On an unknown instance name
    """
    for instance in builtin_instances() + special_instances():
        if instance.name == name:
            return instance
    raise KeyError(f"Unknown instance '{name}'")
