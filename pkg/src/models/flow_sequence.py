# src/models/flow_sequence.py
"""
Trajectories x = (K_j, V_j), j = 0..J.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np

# Column order of the V block
V_COLUMNS = ("g", "z", "mu")


class VTriple:
    """
    The state V = (g, z, mu) at one scale.
    """

    __slots__ = ("g", "z", "mu")

    def __init__(self, g: float, z: float, mu: float) -> None:
        self.g = float(g)
        self.z = float(z)
        self.mu = float(mu)

    def as_array(self) -> np.ndarray:
        return np.array([self.g, self.z, self.mu])

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "VTriple":
        return cls(values[0], values[1], values[2])

    def __iter__(self):
        return iter((self.g, self.z, self.mu))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VTriple):
            return NotImplemented
        return (self.g, self.z, self.mu) == (other.g, other.z, other.mu)

    def __repr__(self) -> str:
        return f"VTriple(g={self.g!r}, z={self.z!r}, mu={self.mu!r})"


class FlowSequence:
    """
    Immutable trajectory with a zero-padded K block of width max d_K.

    Residual-shaped sequences use the same container; entry j then holds the
    term that feeds scale j, and entry 0 is unused.
    """

    def __init__(self, K: np.ndarray, V: np.ndarray) -> None:
        """
        Initialize a trajectory.

        Args:
            K: Array (J+1, d) of K blocks (a 1-D array is read as d = 1)
            V: Array (J+1, 3) with columns g, z, mu

        Raises:
            ValueError: On shape mismatch or non-finite entries
        """
        K = np.array(K, dtype=float)
        V = np.array(V, dtype=float)
        if K.ndim == 1:
            K = K.reshape(-1, 1)
        if V.ndim != 2 or V.shape[1] != 3:
            raise ValueError(f"V must have shape (J+1, 3), got {V.shape}")
        if K.ndim != 2 or K.shape[0] != V.shape[0]:
            raise ValueError(f"K shape {K.shape} does not match V shape {V.shape}")
        if V.shape[0] == 0:
            raise ValueError("FlowSequence needs at least one entry")
        if not (np.all(np.isfinite(K)) and np.all(np.isfinite(V))):
            raise ValueError("FlowSequence entries must be finite")
        K.setflags(write=False)
        V.setflags(write=False)
        self._K = K
        self._V = V

    @classmethod
    def zeros(cls, horizon: int, k_dim: int = 1) -> "FlowSequence":
        return cls(np.zeros((horizon + 1, k_dim)), np.zeros((horizon + 1, 3)))

    @classmethod
    def from_stacked(cls, data: np.ndarray, k_dim: int) -> "FlowSequence":
        """
        Inverse of stacked(): columns [K..., g, z, mu].
        """
        data = np.asarray(data, dtype=float)
        return cls(data[:, :k_dim], data[:, k_dim:])

    @classmethod
    def from_flat(cls, flat: np.ndarray, horizon: int, k_dim: int) -> "FlowSequence":
        return cls.from_stacked(np.reshape(flat, (horizon + 1, k_dim + 3)), k_dim)

    @property
    def K(self) -> np.ndarray:
        return self._K

    @property
    def V(self) -> np.ndarray:
        return self._V

    @property
    def g(self) -> np.ndarray:
        return self._V[:, 0]

    @property
    def z(self) -> np.ndarray:
        return self._V[:, 1]

    @property
    def mu(self) -> np.ndarray:
        return self._V[:, 2]

    @property
    def horizon(self) -> int:
        return self._V.shape[0] - 1

    @property
    def k_dim(self) -> int:
        return self._K.shape[1]

    def entry(self, j: int) -> Tuple[np.ndarray, VTriple]:
        return self._K[j].copy(), VTriple.from_array(self._V[j])

    def stacked(self) -> np.ndarray:
        """
        Array (J+1, d+3) with columns [K..., g, z, mu].
        """
        return np.hstack([self._K, self._V])

    def flat(self) -> np.ndarray:
        return self.stacked().ravel()

    def replace(
        self, K: Optional[np.ndarray] = None, V: Optional[np.ndarray] = None
    ) -> "FlowSequence":
        return FlowSequence(self._K if K is None else K, self._V if V is None else V)

    def truncate(self, horizon: int) -> "FlowSequence":
        return FlowSequence(self._K[: horizon + 1], self._V[: horizon + 1])

    def _check_compatible(self, other: "FlowSequence") -> None:
        if self._K.shape != other._K.shape:
            raise ValueError(
                f"Incompatible trajectories: K {self._K.shape} vs {other._K.shape}"
            )

    def __add__(self, other: "FlowSequence") -> "FlowSequence":
        self._check_compatible(other)
        return FlowSequence(self._K + other._K, self._V + other._V)

    def __sub__(self, other: "FlowSequence") -> "FlowSequence":
        self._check_compatible(other)
        return FlowSequence(self._K - other._K, self._V - other._V)

    def __mul__(self, scalar: float) -> "FlowSequence":
        return FlowSequence(self._K * scalar, self._V * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "FlowSequence":
        return FlowSequence(-self._K, -self._V)

    def csv_header(self) -> List[str]:
        return ["j"] + [f"K{i}" for i in range(self.k_dim)] + list(V_COLUMNS)

    def csv_rows(self) -> List[List[float]]:
        data = self.stacked()
        return [[j] + list(map(float, row)) for j, row in enumerate(data)]

    def __repr__(self) -> str:
        return f"FlowSequence(horizon={self.horizon}, k_dim={self.k_dim})"
