# src/models/builtin.py
"""
Built-in perturbation models.
"""

from typing import Any, Dict, Optional

import numpy as np

from .base import KDims, ModelEnvelope, PerturbationModel
from ..params.cutoff import CutoffData


class ZeroPerturbation(PerturbationModel):
    """
    psi = 0 and rho = 0.
    """

    name = "zero"

    def __init__(
        self,
        envelope: Optional[ModelEnvelope] = None,
        k_dims: Optional[KDims] = None,
        cutoff: Optional[CutoffData] = None,
    ) -> None:
        super().__init__(envelope or ModelEnvelope(0.1, 0.1, 0.1), k_dims, cutoff)

    def psi(self, j: int, K: np.ndarray, V: np.ndarray) -> np.ndarray:
        return np.zeros_like(K, dtype=float)

    def rho(self, j: int, K: np.ndarray, V: np.ndarray) -> np.ndarray:
        return np.zeros(3)

    def psi_all(self, K: np.ndarray, V: np.ndarray, start: int = 0) -> np.ndarray:
        return np.zeros_like(K, dtype=float)

    def rho_all(self, K: np.ndarray, V: np.ndarray, start: int = 0) -> np.ndarray:
        return np.zeros((len(V), 3))

    def analytic_jacobian(self, start: int, K: np.ndarray, V: np.ndarray) -> np.ndarray:
        width = K.shape[1]
        return np.zeros((len(V), width + 3, width + 3))


class LinearContraction(PerturbationModel):
    """
    psi_j(K, V) = kappa0 K, rho = 0.
    """

    name = "linear"

    def __init__(
        self,
        kappa0: float = 0.15,
        R: float = 0.1,
        M: float = 0.1,
        k_dims: Optional[KDims] = None,
        cutoff: Optional[CutoffData] = None,
    ) -> None:
        super().__init__(ModelEnvelope(kappa0, R, M), k_dims, cutoff)
        self.kappa0 = float(kappa0)

    def psi(self, j: int, K: np.ndarray, V: np.ndarray) -> np.ndarray:
        return self.kappa0 * np.asarray(K, dtype=float)

    def rho(self, j: int, K: np.ndarray, V: np.ndarray) -> np.ndarray:
        return np.zeros(3)

    def psi_all(self, K: np.ndarray, V: np.ndarray, start: int = 0) -> np.ndarray:
        return self.kappa0 * K * self._output_mask(start, len(V), K.shape[1])

    def rho_all(self, K: np.ndarray, V: np.ndarray, start: int = 0) -> np.ndarray:
        return np.zeros((len(V), 3))

    def analytic_jacobian(self, start: int, K: np.ndarray, V: np.ndarray) -> np.ndarray:
        n, width = K.shape
        jac = np.zeros((n, width + 3, width + 3))
        out_mask = self._output_mask(start, n, width)
        in_mask = self._output_mask(start - 1, n, width)
        jac[:, :width, :width] = self.kappa0 * (
            np.eye(width)[None, :, :] * (out_mask[:, :, None] & in_mask[:, None, :])
        )
        return jac


class CubicMonomial(PerturbationModel):
    """
    Third-order model built on the envelope e_j(g) = chi_{j+1} g^3:

        rho_j(K, V) = (c_rho e_j(g) s(z, mu), 0, 0),   s = 1 / (1 + z^2 + mu^2)
        psi_j(K, V) = kappa0 K + c_psi e_j(g) (1, ..., 1)
    """

    name = "cubic"

    def __init__(
        self,
        c_rho: float = 0.1,
        c_psi: float = 0.1,
        kappa0: float = 0.15,
        k_dims: Optional[KDims] = None,
        cutoff: Optional[CutoffData] = None,
    ) -> None:
        envelope = ModelEnvelope(kappa0, 2.0 * abs(c_psi), 5.0 * max(abs(c_rho), abs(c_psi)))
        super().__init__(envelope, k_dims, cutoff)
        self.c_rho = float(c_rho)
        self.c_psi = float(c_psi)
        self.kappa0 = float(kappa0)

    @staticmethod
    def _shape(V: np.ndarray) -> np.ndarray:
        return 1.0 / (1.0 + V[..., 1] ** 2 + V[..., 2] ** 2)

    def psi(self, j: int, K: np.ndarray, V: np.ndarray) -> np.ndarray:
        return self.psi_all(np.atleast_2d(K), np.atleast_2d(V), j)[0]

    def rho(self, j: int, K: np.ndarray, V: np.ndarray) -> np.ndarray:
        return self.rho_all(np.atleast_2d(K), np.atleast_2d(V), j)[0]

    def psi_all(self, K: np.ndarray, V: np.ndarray, start: int = 0) -> np.ndarray:
        chi = self.chi_next(start, len(V))
        source = self.c_psi * chi * V[:, 0] ** 3
        mask = self._output_mask(start, len(V), K.shape[1])
        return (self.kappa0 * K + source[:, None]) * mask

    def rho_all(self, K: np.ndarray, V: np.ndarray, start: int = 0) -> np.ndarray:
        chi = self.chi_next(start, len(V))
        out = np.zeros((len(V), 3))
        out[:, 0] = self.c_rho * chi * V[:, 0] ** 3 * self._shape(V)
        return out

    def analytic_jacobian(self, start: int, K: np.ndarray, V: np.ndarray) -> np.ndarray:
        n, width = K.shape
        chi = self.chi_next(start, n)
        g, z, mu = V[:, 0], V[:, 1], V[:, 2]
        s = self._shape(V)
        out_mask = self._output_mask(start, n, width)
        in_mask = self._output_mask(start - 1, n, width)

        jac = np.zeros((n, width + 3, width + 3))
        jac[:, :width, :width] = self.kappa0 * (
            np.eye(width)[None, :, :] * (out_mask[:, :, None] & in_mask[:, None, :])
        )
        jac[:, :width, width] = (3.0 * self.c_psi * chi * g**2)[:, None] * out_mask
        envelope = self.c_rho * chi * g**3
        jac[:, width, width] = 3.0 * self.c_rho * chi * g**2 * s
        jac[:, width, width + 1] = -2.0 * envelope * z * s**2
        jac[:, width, width + 2] = -2.0 * envelope * mu * s**2
        return jac

    def describe(self) -> Dict[str, Any]:
        data = super().describe()
        data.update({"c_rho": self.c_rho, "c_psi": self.c_psi, "kappa0": self.kappa0})
        return data


class RandomPolynomial(PerturbationModel):
    """
    Seeded polynomial model of degree <= 3 scaled to the third-order envelopes:

        psi_j(K, V) = diag(kappa) K + chi_{j+1} (p g^3 + q g^2 z) (1, ..., 1)
        rho_j(K, V)_alpha = chi_{j+1} (a_alpha g^3 + b_alpha g^2 z + c_alpha g^2 mu)
                            + e_alpha sum(K)
    """

    name = "random-polynomial"

    def __init__(
        self,
        seed: int = 0,
        scale: float = 0.1,
        kappa0: float = 0.15,
        coupling: float = 1e-3,
        k_dims: Optional[KDims] = None,
        cutoff: Optional[CutoffData] = None,
    ) -> None:
        """
        Initialize the model.

        Args:
            seed: Seed of the coefficient draw
            scale: Coefficients of the V monomials are uniform in [-scale, scale]
            kappa0: Diagonal K contractions are uniform in [0, kappa0]
            coupling: The K -> rho coefficients e are uniform in [-coupling, coupling]
            k_dims: K dimensions per scale
            cutoff: Cut-off providing chi
        """
        k_dims = k_dims or KDims()
        rng = np.random.default_rng(seed)
        width = max([k_dims.default] + list(k_dims.overrides.values()) + [1])
        self.seed = seed
        self.kappa = rng.uniform(0.0, kappa0, size=width)
        self.p, self.q = rng.uniform(-scale, scale, size=2)
        self.a, self.b, self.c = rng.uniform(-scale, scale, size=(3, 3))
        self.e = rng.uniform(-coupling, coupling, size=3)

        R = 2.0 * (abs(self.p) + abs(self.q))
        M = 5.0 * float(
            np.max(np.abs(self.a) + np.abs(self.b) + np.abs(self.c) + width * np.abs(self.e))
        )
        M = max(M, 5.0 * R)
        super().__init__(ModelEnvelope(float(kappa0), R, M), k_dims, cutoff)

    def psi(self, j: int, K: np.ndarray, V: np.ndarray) -> np.ndarray:
        return self.psi_all(np.atleast_2d(K), np.atleast_2d(V), j)[0]

    def rho(self, j: int, K: np.ndarray, V: np.ndarray) -> np.ndarray:
        return self.rho_all(np.atleast_2d(K), np.atleast_2d(V), j)[0]

    def _kappa(self, width: int) -> np.ndarray:
        return np.resize(self.kappa, width)

    def psi_all(self, K: np.ndarray, V: np.ndarray, start: int = 0) -> np.ndarray:
        chi = self.chi_next(start, len(V))
        g, z = V[:, 0], V[:, 1]
        source = chi * (self.p * g**3 + self.q * g**2 * z)
        mask = self._output_mask(start, len(V), K.shape[1])
        return (self._kappa(K.shape[1]) * K + source[:, None]) * mask

    def rho_all(self, K: np.ndarray, V: np.ndarray, start: int = 0) -> np.ndarray:
        chi = self.chi_next(start, len(V))
        g, z, mu = V[:, 0], V[:, 1], V[:, 2]
        monomials = np.column_stack([g**3, g**2 * z, g**2 * mu]) * chi[:, None]
        coefficients = np.column_stack([self.a, self.b, self.c])
        return monomials @ coefficients.T + np.outer(K.sum(axis=1), self.e)

    def analytic_jacobian(self, start: int, K: np.ndarray, V: np.ndarray) -> np.ndarray:
        n, width = K.shape
        chi = self.chi_next(start, n)
        g, z, mu = V[:, 0], V[:, 1], V[:, 2]
        out_mask = self._output_mask(start, n, width)
        in_mask = self._output_mask(start - 1, n, width)

        jac = np.zeros((n, width + 3, width + 3))
        jac[:, :width, :width] = np.diag(self._kappa(width))[None, :, :] * (
            out_mask[:, :, None] & in_mask[:, None, :]
        )
        d_source_g = chi * (3.0 * self.p * g**2 + 2.0 * self.q * g * z)
        d_source_z = chi * self.q * g**2
        jac[:, :width, width] = d_source_g[:, None] * out_mask
        jac[:, :width, width + 1] = d_source_z[:, None] * out_mask

        jac[:, width:, :width] = self.e[None, :, None] * in_mask[:, None, :]
        d_g = chi[:, None] * (
            3.0 * g[:, None] ** 2 * self.a
            + 2.0 * (g * z)[:, None] * self.b
            + 2.0 * (g * mu)[:, None] * self.c
        )
        jac[:, width:, width] = d_g
        jac[:, width:, width + 1] = chi[:, None] * g[:, None] ** 2 * self.b
        jac[:, width:, width + 2] = chi[:, None] * g[:, None] ** 2 * self.c
        return jac

    def describe(self) -> Dict[str, Any]:
        data = super().describe()
        data["seed"] = self.seed
        return data
