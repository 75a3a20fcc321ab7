# src/params/sequences.py
"""
Coefficient sequences of the triangular flow.

Each coefficient is an infinite sequence stored as a finite prefix plus a tail
rule that determines every later entry exactly. All tail quantities (sup, sums,
sign counts) are resolved in closed form.
"""

import math
from dataclasses import dataclass, fields
from enum import Enum
from typing import Any, Dict, Iterable, Optional

import numpy as np

from ..utils.errors import InvalidParametersError


class TailKind(Enum):
    """
    Supported tail rules.
    """

    ZERO = "zero"
    CONSTANT = "constant"
    GEOMETRIC = "geometric"


@dataclass(frozen=True)
class TailRule:
    """
    Entry at offset n >= 0 past the prefix: 0, c, or c * r**n.
    """

    kind: TailKind = TailKind.ZERO
    c: float = 0.0
    r: float = 0.0

    @classmethod
    def zero(cls) -> "TailRule":
        return cls(TailKind.ZERO)

    @classmethod
    def constant(cls, c: float) -> "TailRule":
        return cls(TailKind.CONSTANT, float(c))

    @classmethod
    def geometric(cls, c: float, r: float) -> "TailRule":
        return cls(TailKind.GEOMETRIC, float(c), float(r))

    @property
    def vanishes(self) -> bool:
        """True when every tail entry is zero."""
        return self.kind is TailKind.ZERO or self.c == 0.0

    @property
    def is_bounded(self) -> bool:
        if self.kind is TailKind.GEOMETRIC:
            return self.c == 0.0 or abs(self.r) <= 1.0
        return True

    def values(self, start: int, count: int) -> np.ndarray:
        """
        Tail entries for offsets start .. start + count - 1.
        """
        if count <= 0:
            return np.zeros(0)
        if self.vanishes:
            return np.zeros(count)
        if self.kind is TailKind.CONSTANT:
            return np.full(count, self.c)
        offsets = np.arange(start, start + count, dtype=float)
        if self.r == 0.0:
            return np.where(offsets == 0, self.c, 0.0)
        return self.c * np.power(self.r, offsets)

    def value(self, offset: int) -> float:
        return float(self.values(offset, 1)[0])

    def sup_abs(self, start: int = 0) -> float:
        """
        sup over offsets n >= start of |entry|.
        """
        if self.vanishes:
            return 0.0
        if self.kind is TailKind.CONSTANT:
            return abs(self.c)
        if not self.is_bounded:
            return math.inf
        if self.r == 0.0:
            return abs(self.c) if start == 0 else 0.0
        return abs(self.c) * abs(self.r) ** start

    def sum_abs(self, start: int = 0) -> float:
        """
        Sum over offsets n >= start of |entry| (inf when divergent).
        """
        if self.vanishes:
            return 0.0
        if self.kind is TailKind.CONSTANT or abs(self.r) >= 1.0:
            return math.inf
        if self.r == 0.0:
            return abs(self.c) if start == 0 else 0.0
        return abs(self.c) * abs(self.r) ** start / (1.0 - abs(self.r))

    def infimum(self, start: int = 0) -> float:
        """
        inf over offsets n >= start of the (signed) entry.
        """
        if self.vanishes:
            return 0.0
        if self.kind is TailKind.CONSTANT:
            return self.c
        if self.r == 0.0:
            return min(self.c, 0.0) if start == 0 else 0.0
        if self.r == 1.0:
            return self.c
        if self.r < 0.0:
            return -abs(self.c) * abs(self.r) ** start
        # 0 < r < 1: monotone towards zero
        first = self.c * self.r**start
        return min(first, 0.0)

    def positive_count(self, start: int = 0) -> float:
        """
        Number of strictly positive entries at offsets >= start (may be inf).
        """
        if self.vanishes:
            return 0
        if self.kind is TailKind.CONSTANT:
            return math.inf if self.c > 0 else 0
        if self.r == 0.0:
            return 1 if (start == 0 and self.c > 0) else 0
        if self.r < 0.0:
            return math.inf
        return math.inf if self.c > 0 else 0

    def to_dict(self) -> Dict[str, Any]:
        if self.kind is TailKind.ZERO:
            return {"rule": "zero"}
        if self.kind is TailKind.CONSTANT:
            return {"rule": "constant", "c": self.c}
        return {"rule": "geometric", "c": self.c, "r": self.r}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TailRule":
        rule = data.get("rule", "zero")
        try:
            kind = TailKind(rule)
        except ValueError:
            raise InvalidParametersError(f"Unknown tail rule: {rule!r}")
        return cls(kind, float(data.get("c", 0.0)), float(data.get("r", 0.0)))


class CoefficientSequence:
    """
    One coefficient sequence j -> real: finite prefix plus tail rule.
    """

    def __init__(self, prefix: Iterable[float] = (), tail: Optional[TailRule] = None):
        """
        Initialize a sequence.

        Args:
            prefix: Explicit entries for j = 0 .. len(prefix) - 1
            tail: Rule for entries j >= len(prefix) (default: zero)
        """
        values = np.array(list(prefix), dtype=float)
        if values.ndim != 1:
            raise InvalidParametersError("Sequence prefix must be one-dimensional")
        if not np.all(np.isfinite(values)):
            raise InvalidParametersError("Sequence prefix contains non-finite entries")
        values.setflags(write=False)
        self._prefix = values
        self._tail = tail if tail is not None else TailRule.zero()

    @classmethod
    def constant(cls, c: float) -> "CoefficientSequence":
        return cls((), TailRule.constant(c))

    @classmethod
    def zeros(cls) -> "CoefficientSequence":
        return cls()

    @classmethod
    def cut(cls, b: float, last: int) -> "CoefficientSequence":
        """
        b for j <= last, 0 afterwards.
        """
        return cls([b] * (last + 1), TailRule.zero())

    @classmethod
    def enveloped(cls, c: float, j_omega: int, omega: float) -> "CoefficientSequence":
        """
        c * chi_j for the cut-off j_omega: constant up to j_omega, then decaying like omega^{-1}.
        """
        return cls([c] * (j_omega + 1), TailRule.geometric(c / omega, 1.0 / omega))

    @property
    def prefix(self) -> np.ndarray:
        return self._prefix

    @property
    def tail(self) -> TailRule:
        return self._tail

    @property
    def stored_length(self) -> int:
        return len(self._prefix)

    def __getitem__(self, j: int) -> float:
        if j < 0:
            raise IndexError(f"Negative sequence index {j}")
        if j < self.stored_length:
            return float(self._prefix[j])
        return self._tail.value(j - self.stored_length)

    def extended(self, length: int) -> "CoefficientSequence":
        """
        The same sequence with at least `length` entries stored explicitly.
        """
        if length <= self.stored_length:
            return self
        tail = self._tail
        if tail.kind is TailKind.GEOMETRIC and not tail.vanishes:
            tail = TailRule.geometric(tail.value(length - self.stored_length), tail.r)
        return CoefficientSequence(self.values(length), tail)

    def with_entry(self, j: int, value: float) -> "CoefficientSequence":
        """
        Copy with entry j replaced; every other entry is unchanged.
        """
        seq = self.extended(j + 1)
        prefix = seq.prefix.copy()
        prefix[j] = value
        return CoefficientSequence(prefix, seq.tail)

    def values(self, count: int) -> np.ndarray:
        """
        Entries for j = 0 .. count - 1.
        """
        head = self._prefix[:count]
        rest = self._tail.values(max(0, len(head) - self.stored_length), count - len(head))
        return np.concatenate([head, rest]) if len(rest) else head.copy()

    def window(self, start: int, stop: int) -> np.ndarray:
        """
        Entries for j = start .. stop - 1.
        """
        return self.values(stop)[start:]

    def sup_abs(self, start: int = 0) -> float:
        """
        sup over j >= start of |entry|, resolved analytically on the tail.
        """
        head = self._prefix[start:]
        head_sup = float(np.max(np.abs(head))) if len(head) else 0.0
        return max(head_sup, self._tail.sup_abs(max(0, start - self.stored_length)))

    def tail_sum_abs(self, start: int) -> float:
        """
        Sum over j >= start of |entry| (inf when divergent).
        """
        head = self._prefix[start:]
        return float(np.sum(np.abs(head))) + self._tail.sum_abs(
            max(0, start - self.stored_length)
        )

    def infimum(self, start: int = 0) -> float:
        head = self._prefix[start:]
        head_inf = float(np.min(head)) if len(head) else math.inf
        return min(head_inf, self._tail.infimum(max(0, start - self.stored_length)))

    def positive_count(self, stop: Optional[int] = None) -> float:
        """
        Number of j <= stop with entry > 0; stop=None counts all j (may be inf).
        """
        if stop is not None:
            return int(np.count_nonzero(self.values(stop + 1) > 0.0))
        return int(np.count_nonzero(self._prefix > 0.0)) + self._tail.positive_count(0)

    @property
    def is_bounded(self) -> bool:
        return self._tail.is_bounded

    def to_dict(self) -> Dict[str, Any]:
        return {"prefix": [float(v) for v in self._prefix], "tail": self._tail.to_dict()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CoefficientSequence":
        return cls(data.get("prefix", []), TailRule.from_dict(data.get("tail", {})))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CoefficientSequence):
            return NotImplemented
        return self._tail == other._tail and np.array_equal(self._prefix, other._prefix)

    def __repr__(self) -> str:
        return f"CoefficientSequence(prefix_len={self.stored_length}, tail={self._tail})"


@dataclass(frozen=True)
class CoefficientTable:
    """
    Vectorized slice of all coefficients for j = 0 .. count - 1.
    """

    beta: np.ndarray
    eta: np.ndarray
    gamma: np.ndarray
    lam: np.ndarray
    theta: np.ndarray
    zeta: np.ndarray
    ups_gg: np.ndarray
    ups_gz: np.ndarray
    ups_gmu: np.ndarray
    ups_zz: np.ndarray
    ups_zmu: np.ndarray

    def at(self, j: int) -> "StepCoefficients":
        return StepCoefficients(
            **{f.name: float(getattr(self, f.name)[j]) for f in fields(self)}
        )

    def __len__(self) -> int:
        return len(self.beta)


@dataclass(frozen=True)
class StepCoefficients:
    """
    Coefficients of the quadratic map at a single scale j.
    """

    beta: float = 0.0
    eta: float = 0.0
    gamma: float = 0.0
    lam: float = 2.0
    theta: float = 0.0
    zeta: float = 0.0
    ups_gg: float = 0.0
    ups_gz: float = 0.0
    ups_gmu: float = 0.0
    ups_zz: float = 0.0
    ups_zmu: float = 0.0


# Attribute names in ParamSeq order; "lam" is serialized as "lambda"
PARAM_NAMES = (
    "beta",
    "eta",
    "gamma",
    "lam",
    "theta",
    "zeta",
    "ups_gg",
    "ups_gz",
    "ups_gmu",
    "ups_zz",
    "ups_zmu",
)

# Sequences required to be O(chi_j)
ENVELOPE_NAMES = (
    "eta",
    "gamma",
    "theta",
    "zeta",
    "ups_gg",
    "ups_gz",
    "ups_gmu",
    "ups_zz",
    "ups_zmu",
)


def _external_name(name: str) -> str:
    return "lambda" if name == "lam" else name


class ParamSeq:
    """
    The full set of coefficient sequences plus Omega.
    """

    def __init__(
        self,
        omega: float,
        beta: Optional[CoefficientSequence] = None,
        eta: Optional[CoefficientSequence] = None,
        gamma: Optional[CoefficientSequence] = None,
        lam: Optional[CoefficientSequence] = None,
        theta: Optional[CoefficientSequence] = None,
        zeta: Optional[CoefficientSequence] = None,
        ups_gg: Optional[CoefficientSequence] = None,
        ups_gz: Optional[CoefficientSequence] = None,
        ups_gmu: Optional[CoefficientSequence] = None,
        ups_zz: Optional[CoefficientSequence] = None,
        ups_zmu: Optional[CoefficientSequence] = None,
    ) -> None:
        """
        Initialize the parameter set.

        Args:
            omega: Cut-off base, must exceed 1
            beta .. ups_zmu: Coefficient sequences (zero when omitted; lam defaults to 2)

        Raises:
            InvalidParametersError: If Omega <= 1 or a sequence is unbounded
        """
        if not (isinstance(omega, (int, float)) and math.isfinite(omega) and omega > 1.0):
            raise InvalidParametersError(f"omega must be a real number > 1, got {omega!r}")
        self.omega = float(omega)
        supplied = {
            "beta": beta,
            "eta": eta,
            "gamma": gamma,
            "lam": lam,
            "theta": theta,
            "zeta": zeta,
            "ups_gg": ups_gg,
            "ups_gz": ups_gz,
            "ups_gmu": ups_gmu,
            "ups_zz": ups_zz,
            "ups_zmu": ups_zmu,
        }
        self._sequences: Dict[str, CoefficientSequence] = {}
        for name in PARAM_NAMES:
            seq = supplied[name]
            if seq is None:
                seq = (
                    CoefficientSequence.constant(2.0)
                    if name == "lam"
                    else CoefficientSequence.zeros()
                )
            if not seq.is_bounded:
                raise InvalidParametersError(
                    f"{_external_name(name)} is unbounded (geometric tail with |r| > 1)"
                )
            self._sequences[name] = seq

    @classmethod
    def from_constants(cls, omega: float = 2.0, **constants: float) -> "ParamSeq":
        """
        Build a ParamSeq whose sequences are all constant.
        """
        unknown = set(constants) - set(PARAM_NAMES)
        if unknown:
            raise InvalidParametersError(f"Unknown coefficient names: {sorted(unknown)}")
        return cls(
            omega,
            **{name: CoefficientSequence.constant(c) for name, c in constants.items()},
        )

    def sequence(self, name: str) -> CoefficientSequence:
        key = "lam" if name == "lambda" else name
        return self._sequences[key]

    def __getattr__(self, name: str) -> CoefficientSequence:
        sequences = self.__dict__.get("_sequences")
        if sequences is not None and name in sequences:
            return sequences[name]
        raise AttributeError(name)

    def replace(self, **changes: Any) -> "ParamSeq":
        """
        Copy with some sequences (or omega) replaced.
        """
        current: Dict[str, Any] = dict(self._sequences)
        omega = changes.pop("omega", self.omega)
        for key, value in changes.items():
            key = "lam" if key == "lambda" else key
            if key not in current:
                raise InvalidParametersError(f"Unknown coefficient name: {key}")
            current[key] = value
        return ParamSeq(omega, **current)

    @property
    def stored_length(self) -> int:
        """Largest prefix length; every tail rule applies beyond it."""
        return max(seq.stored_length for seq in self._sequences.values())

    @property
    def beta_sup(self) -> float:
        return self._sequences["beta"].sup_abs()

    def table(self, count: int) -> CoefficientTable:
        """
        All coefficients for j = 0 .. count - 1 as arrays.
        """
        return CoefficientTable(
            **{name: self._sequences[name].values(count) for name in PARAM_NAMES}
        )

    def at(self, j: int) -> StepCoefficients:
        return StepCoefficients(
            **{name: self._sequences[name][j] for name in PARAM_NAMES}
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"omega": self.omega}
        for name in PARAM_NAMES:
            data[_external_name(name)] = self._sequences[name].to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ParamSeq":
        kwargs: Dict[str, CoefficientSequence] = {}
        for name in PARAM_NAMES:
            key = _external_name(name)
            if key in data:
                kwargs[name] = CoefficientSequence.from_dict(data[key])
        if "omega" not in data:
            raise InvalidParametersError("omega is required")
        return cls(data["omega"], **kwargs)

    def __repr__(self) -> str:
        return f"ParamSeq(omega={self.omega}, stored_length={self.stored_length})"
