# src/models/domain.py
"""
The per-scale domains D_j(g0, a, h) around the quadratic solution:

    ||K_j||         <= a chi_j gbar_j^3
    |g_j - gbar_j|   <= h gbar_j^2 |log gbar_j|
    |z_j - zbar_j|   <= h chi_j gbar_j^2 |log gbar_j|
    |mu_j - mubar_j| <= h chi_j gbar_j^2 |log gbar_j|
"""

from typing import Optional, Tuple

import numpy as np

from .flow_sequence import FlowSequence, VTriple
from ..quadratic.bvp import QuadraticSolution
from ..utils.errors import InvalidParametersError

DOMAIN_CLAUSES = ("K", "g", "z", "mu")


class DomainSpec:
    """
    Radii of D_j for every j on the horizon of a reference solution.
    """

    def __init__(
        self,
        solution: QuadraticSolution,
        a: float,
        h: float,
        a_star: Optional[float] = None,
    ) -> None:
        """
        Initialize the domain.

        Args:
            solution: Reference quadratic solution (gbar, zbar, mubar)
            a: K radius parameter
            h: V radius parameter
            a_star: Inner K radius for the K-bar containment (default a)

        Raises:
            InvalidParametersError: On non-positive radii or a_star > a
        """
        if not (a > 0.0 and h > 0.0):
            raise InvalidParametersError(f"Domain radii must be positive (a={a}, h={h})")
        a_star = a if a_star is None else a_star
        if not 0.0 < a_star <= a:
            raise InvalidParametersError(f"a_star must lie in (0, a] (a_star={a_star}, a={a})")
        self.solution = solution
        self.a = float(a)
        self.h = float(h)
        self.a_star = float(a_star)

        gbar, chi = solution.gbar, solution.chi
        square_log = gbar**2 * np.abs(np.log(gbar))
        self._radii = np.column_stack(
            [self.a * chi * gbar**3, self.h * square_log, self.h * chi * square_log, self.h * chi * square_log]
        )
        self._radii.setflags(write=False)

    @property
    def horizon(self) -> int:
        return self.solution.horizon

    def radii(self) -> np.ndarray:
        """
        Array (J+1, 4) with the K, g, z and mu radii.
        """
        return self._radii

    def k_envelope(self, j: int, inner: bool = False) -> float:
        """
        a chi_j gbar_j^3 (a_star when inner).
        """
        scale = self.a_star if inner else self.a
        return scale * float(self.solution.chi[j] * self.solution.gbar[j] ** 3)

    def clause_ratios(self, K: np.ndarray, V: np.ndarray, j: int) -> np.ndarray:
        """
        Ratios of each clause's left side to its radius at scale j.
        """
        k_norm = float(np.max(np.abs(K))) if np.size(K) else 0.0
        centre = self.solution.vbar[j]
        deviations = np.abs(np.asarray(V, dtype=float) - centre)
        return np.concatenate([[k_norm], deviations]) / self._radii[j]

    def trajectory_ratios(self, x: FlowSequence) -> np.ndarray:
        """
        Clause ratios (J+1, 4) for a whole trajectory on the same horizon.
        """
        if x.horizon != self.horizon:
            raise ValueError(f"Horizon mismatch: {x.horizon} vs {self.horizon}")
        k_norm = np.max(np.abs(x.K), axis=1) if x.k_dim else np.zeros(x.horizon + 1)
        deviations = np.abs(x.V - self.solution.vbar)
        return np.column_stack([k_norm, deviations]) / self._radii

    def first_violation(self, x: FlowSequence) -> Optional[Tuple[int, str, float]]:
        """
        (j, clause, ratio) of the first clause above 1, or None.
        """
        ratios = self.trajectory_ratios(x)
        bad = np.argwhere(ratios > 1.0)
        if not len(bad):
            return None
        j, column = bad[0]
        return int(j), DOMAIN_CLAUSES[column], float(ratios[j, column])

    def sample(
        self, j: int, count: int, width: int, rng: np.random.Generator, active: Optional[np.ndarray] = None
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Uniform samples in D_j: K in the sup-ball, V in the box around V-bar_j.

        Returns:
            (K, V) arrays of shapes (count, width) and (count, 3)
        """
        radii = self._radii[j]
        K = rng.uniform(-radii[0], radii[0], size=(count, width))
        if active is not None:
            K = K * active
        V = self.solution.vbar[j] + rng.uniform(-1.0, 1.0, size=(count, 3)) * radii[1:]
        return K, V


def in_domain(x_j: Tuple[np.ndarray, VTriple], j: int, dom: DomainSpec) -> bool:
    """
    True iff all four clauses of D_j hold (closed inequalities).
    """
    K, V = x_j
    K = np.asarray(K, dtype=float)
    k_norm = float(np.max(np.abs(K))) if K.size else 0.0
    deviations = np.abs(V.as_array() - dom.solution.vbar[j])
    radii = dom.radii()[j]
    return bool(k_norm <= radii[0] and np.all(deviations <= radii[1:]))
