# src/models/base.py
"""
Base class for perturbation models (psi_j, rho_j).

Provides shared functionality:
- Per-scale K dimensions with zero padding to a common width
- Vectorized evaluation over a trajectory
- Finite-difference Jacobians when a model supplies no analytic ones
"""

from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..params.cutoff import CutoffData

# Relative step of the central finite-difference fallback, per unit of domain radius
FD_RELATIVE_STEP = 1e-6


@dataclass(frozen=True)
class ModelEnvelope:
    """
    Declared constants: kappa bounds D_K psi, R the K-free part of psi, M the rest.
    """

    kappa: float
    R: float
    M: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class KDims:
    """
    Dimension d_K(j) of the K block: a default plus per-scale overrides.
    """

    default: int = 1
    overrides: Dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.default < 0 or any(d < 0 for d in self.overrides.values()):
            raise ValueError("K dimensions must be non-negative")

    def dim(self, j: int) -> int:
        return self.overrides.get(j, self.default)

    def width(self, horizon: int) -> int:
        """Padded width covering scales 0..horizon + 1."""
        dims = [self.default] + [d for j, d in self.overrides.items() if j <= horizon + 1]
        return max(max(dims), 1)

    def mask(self, horizon: int, width: Optional[int] = None) -> np.ndarray:
        """
        Boolean array (J+2, width), True on active coordinates of scale j.
        """
        width = width or self.width(horizon)
        active = np.zeros((horizon + 2, width), dtype=bool)
        for j in range(horizon + 2):
            active[j, : self.dim(j)] = True
        return active


class PerturbationModel(ABC):
    """
    Generic perturbation Phi_j = (psi_j, phi_bar_j + rho_j).

    K blocks are passed padded to a common width; inactive coordinates are
    zero on input and are zeroed on output.
    """

    name = "base"

    def __init__(
        self,
        envelope: ModelEnvelope,
        k_dims: Optional[KDims] = None,
        cutoff: Optional[CutoffData] = None,
    ) -> None:
        """
        Initialize the model.

        Args:
            envelope: Declared (kappa, R, M)
            k_dims: K dimensions per scale (default d_K = 1)
            cutoff: Cut-off providing chi; chi = 1 everywhere when omitted
        """
        self.envelope = envelope
        self.k_dims = k_dims or KDims()
        self.cutoff = cutoff

    def with_cutoff(self, cutoff: CutoffData) -> "PerturbationModel":
        """
        The same model bound to another cut-off.
        """
        clone = object.__new__(type(self))
        clone.__dict__.update(self.__dict__)
        clone.cutoff = cutoff
        return clone

    def chi_next(self, start: int, count: int) -> np.ndarray:
        """
        chi_{j+1} for j = start .. start + count - 1.
        """
        if self.cutoff is None:
            return np.ones(count)
        return self.cutoff.chi_values(start + count + 1)[start + 1 :]

    def _output_mask(self, start: int, count: int, width: int) -> np.ndarray:
        mask = self.k_dims.mask(start + count, width)
        return mask[start + 1 : start + count + 1]

    @abstractmethod
    def psi(self, j: int, K: np.ndarray, V: np.ndarray) -> np.ndarray:
        """
        K block at scale j + 1 (same padded width as K).
        Must be implemented by subclasses.
        """
        pass

    @abstractmethod
    def rho(self, j: int, K: np.ndarray, V: np.ndarray) -> np.ndarray:
        """
        Perturbation of (g, z, mu) at scale j + 1, shape (3,).
        Must be implemented by subclasses.
        """
        pass

    def analytic_jacobian(
        self, start: int, K: np.ndarray, V: np.ndarray
    ) -> Optional[np.ndarray]:
        """
        Jacobians of (psi, rho) in (K, V), shape (n, w + 3, w + 3), or None.

        Override when derivatives are known in closed form.
        """
        return None

    def psi_all(self, K: np.ndarray, V: np.ndarray, start: int = 0) -> np.ndarray:
        """
        psi_j(K_j, V_j) for rows j = start, start + 1, ...
        """
        out = np.array([self.psi(start + i, K[i], V[i]) for i in range(len(V))])
        return out.reshape(K.shape) * self._output_mask(start, len(V), K.shape[1])

    def rho_all(self, K: np.ndarray, V: np.ndarray, start: int = 0) -> np.ndarray:
        """
        rho_j(K_j, V_j) for rows j = start, start + 1, ..., shape (n, 3).
        """
        return np.array([self.rho(start + i, K[i], V[i]) for i in range(len(V))]).reshape(
            len(V), 3
        )

    def evaluate(self, K: np.ndarray, V: np.ndarray, start: int = 0) -> np.ndarray:
        """
        Stacked [psi, rho], shape (n, w + 3).
        """
        return np.hstack([self.psi_all(K, V, start), self.rho_all(K, V, start)])

    def jacobians(
        self,
        K: np.ndarray,
        V: np.ndarray,
        start: int = 0,
        radii: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """
        Jacobians of (psi_j, rho_j) at each row, shape (n, w + 3, w + 3).

        Rows/columns are ordered [K..., g, z, mu]. Analytic derivatives are
        used when available, central finite differences otherwise.

        Args:
            K: Array (n, w)
            V: Array (n, 3)
            start: Scale of the first row
            radii: Per-row, per-coordinate scales (n, w + 3) for the step size

        Returns:
            Array of Jacobians
        """
        analytic = self.analytic_jacobian(start, K, V)
        if analytic is not None:
            return analytic
        return self.fd_jacobian(K, V, start, radii)

    def fd_jacobian(
        self,
        K: np.ndarray,
        V: np.ndarray,
        start: int = 0,
        radii: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """
        Central finite-difference Jacobians with step FD_RELATIVE_STEP * radius.
        """
        n, width = K.shape
        x = np.hstack([K, V])
        if radii is None:
            radii = np.maximum(np.abs(x), 1e-3)
        steps = FD_RELATIVE_STEP * radii
        active_in = np.hstack(
            [self._output_mask(start - 1, n, width), np.ones((n, 3), dtype=bool)]
        )
        jac = np.zeros((n, width + 3, width + 3))
        for p in range(width + 3):
            step = np.where(active_in[:, p], steps[:, p], 0.0)
            if not np.any(step):
                continue
            shifted_up = x.copy()
            shifted_down = x.copy()
            shifted_up[:, p] += step
            shifted_down[:, p] -= step
            up = self.evaluate(shifted_up[:, :width], shifted_up[:, width:], start)
            down = self.evaluate(shifted_down[:, :width], shifted_down[:, width:], start)
            with np.errstate(invalid="ignore", divide="ignore"):
                column = (up - down) / (2.0 * step[:, None])
            jac[:, :, p] = np.where(step[:, None] > 0, column, 0.0)
        return jac

    def describe(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "envelope": self.envelope.to_dict(),
            "k_dim_default": self.k_dims.default,
        }

    def __repr__(self) -> str:
        return f"{type(self).__name__}(envelope={self.envelope})"


def split_jacobian(jac: np.ndarray, width: int) -> Tuple[np.ndarray, ...]:
    """
    (D_K psi, D_V psi, D_K rho, D_V rho) blocks of stacked Jacobians.
    """
    return (
        jac[..., :width, :width],
        jac[..., :width, width:],
        jac[..., width:, :width],
        jac[..., width:, width:],
    )
