"""Finite probability spaces, functions on them, and operators between them.

All scalars are complex double precision; real input is embedded.  Objects are
immutable after construction and every operation is a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidExponentError, ShapeError

__all__ = [
    "FiniteProbabilitySpace",
    "FunctionVector",
    "OperatorMatrix",
    "lp_norm",
    "apply",
    "compose",
]

_WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class FiniteProbabilitySpace:
    """Atoms with strictly positive weights summing to one."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.ndim != 1 or w.size == 0:
            raise ShapeError("weights must be a nonempty 1-d array")
        if np.any(w <= 0):
            raise DomainError("every atom weight must be > 0")
        if abs(w.sum() - 1.0) > _WEIGHT_SUM_TOL:
            raise DomainError(
                f"weights must sum to 1 within {_WEIGHT_SUM_TOL}; got {w.sum()!r}"
            )

    @property
    def size(self) -> int:
        return self.weights.size

    @classmethod
    def uniform(cls, n_atoms: int) -> "FiniteProbabilitySpace":
        if n_atoms < 1:
            raise DomainError("need at least one atom")
        return cls(np.full(n_atoms, 1.0 / n_atoms))

    def __hash__(self):
        return hash((self.weights.size, self.weights.tobytes()))

    def __eq__(self, other):
        if not isinstance(other, FiniteProbabilitySpace):
            return NotImplemented
        return self.weights.shape == other.weights.shape and np.array_equal(
            self.weights, other.weights
        )


@dataclass(frozen=True)
class FunctionVector:
    """A complex-valued function given by one value per atom."""

    values: np.ndarray
    space: FiniteProbabilitySpace

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", v)
        if v.ndim != 1:
            raise ShapeError("values must be a 1-d array")
        if v.size != self.space.size:
            raise ShapeError(
                f"function has {v.size} values but the space has {self.space.size} atoms"
            )


@dataclass(frozen=True)
class OperatorMatrix:
    """A dense operator in atom coordinates, rows indexed by the output space."""

    entries: np.ndarray
    domain: FiniteProbabilitySpace
    codomain: FiniteProbabilitySpace

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", m)
        if m.ndim != 2:
            raise ShapeError("entries must be a 2-d array")
        if m.shape != (self.codomain.size, self.domain.size):
            raise ShapeError(
                f"entries have shape {m.shape}, expected "
                f"({self.codomain.size}, {self.domain.size})"
            )

    @classmethod
    def on(cls, space: FiniteProbabilitySpace, entries) -> "OperatorMatrix":
        """Operator from a space to itself."""
        return cls(np.asarray(entries, dtype=complex), space, space)

    @classmethod
    def identity(cls, space: FiniteProbabilitySpace) -> "OperatorMatrix":
        return cls.on(space, np.eye(space.size, dtype=complex))


def lp_norm(f: FunctionVector, p: float) -> float:
    """Weighted L_p norm of f; p may be any real >= 1 or math.inf."""
    if p != math.inf and (not p >= 1.0):
        raise InvalidExponentError(f"exponent must be >= 1 or inf, got {p}")
    absv = np.abs(f.values)
    if p == math.inf:
        return float(absv.max())
    return float(np.sum(f.space.weights * absv**p) ** (1.0 / p))


def apply(A: OperatorMatrix, f: FunctionVector) -> FunctionVector:
    """Matrix-vector product in atom coordinates."""
    if f.space.size != A.domain.size:
        raise ShapeError(
            f"operator expects {A.domain.size} atoms, function has {f.space.size}"
        )
    return FunctionVector(A.entries @ f.values, A.codomain)


def compose(A: OperatorMatrix, B: OperatorMatrix) -> OperatorMatrix:
    """The operator A after B."""
    if A.domain.size != B.codomain.size:
        raise ShapeError(
            f"inner dimensions differ: A expects {A.domain.size}, B outputs {B.codomain.size}"
        )
    return OperatorMatrix(A.entries @ B.entries, B.domain, A.codomain)
