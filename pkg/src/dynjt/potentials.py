"""Factor tables with exact counting of scalar additions and multiplications."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .network import BeliefNetwork, Cpt


class ZeroProbabilityError(ArithmeticError):
    """The evidence has probability zero, so nothing can be normalized."""


@dataclass
class OpCounter:
    additions: int = 0
    multiplications: int = 0

    @property
    def total(self) -> int:
        return self.additions + self.multiplications

    def snapshot(self) -> Tuple[int, int]:
        return self.additions, self.multiplications


class Potential:
    """A table over an ordered scope of variable ids.

    Values are held as an n-dimensional array whose axes follow ``scope``;
    ``flat`` gives the mixed-radix layout with the first scope variable most
    significant. An empty scope is a scalar.
    """

    __slots__ = ("scope", "values")

    def __init__(self, scope: Sequence[int], values) -> None:
        scope = tuple(int(v) for v in scope)
        if len(set(scope)) != len(scope):
            raise ValueError(f"duplicate variable in scope {scope}")
        arr = np.array(values, dtype=np.float64)
        if arr.ndim != len(scope):
            raise ValueError(f"values have {arr.ndim} axes for scope of size {len(scope)}")
        if np.any(arr < 0):
            raise ValueError("potential values must be non-negative")
        arr.setflags(write=False)
        self.scope = scope
        self.values = arr

    @classmethod
    def _wrap(cls, scope: Tuple[int, ...], arr: np.ndarray) -> "Potential":
        # trusted internal constructor: no copy, no checks
        obj = cls.__new__(cls)
        arr.setflags(write=False)
        obj.scope = scope
        obj.values = arr
        return obj

    @classmethod
    def from_flat(cls, scope: Sequence[int], cards: Sequence[int], flat) -> "Potential":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != math.prod(cards):
            raise ValueError(f"{flat.size} values for cards {tuple(cards)}")
        return cls(scope, flat.reshape(tuple(cards)))

    @property
    def cards(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def card_of(self, var: int) -> int:
        return self.values.shape[self.scope.index(var)]

    def is_unit(self) -> bool:
        return not self.scope and float(self.values) == 1.0

    def aligned(self, scope: Sequence[int]) -> np.ndarray:
        """Values transposed to ``scope`` (a permutation of this scope)."""
        if sorted(scope) != sorted(self.scope):
            raise ValueError(f"{tuple(scope)} is not a permutation of {self.scope}")
        return np.transpose(self.values, [self.scope.index(v) for v in scope])

    def allclose(self, other: "Potential", atol: float = 1e-12) -> bool:
        if set(self.scope) != set(other.scope):
            return False
        return bool(np.allclose(self.values, other.aligned(self.scope), rtol=0, atol=atol))

    def __repr__(self) -> str:
        return f"Potential(scope={self.scope}, values={self.flat.tolist()})"


def unit_potential() -> Potential:
    return Potential((), 1.0)


def from_cpt(cpt: Cpt, net: BeliefNetwork) -> Potential:
    scope = cpt.parents + (cpt.child,)
    return Potential.from_flat(scope, [net.card(v) for v in scope], cpt.table)


def multiply(p: Potential, q: Potential, counter: OpCounter) -> Potential:
    """Pointwise product; the result scope is p's order followed by q's new variables."""
    extra = tuple(v for v in q.scope if v not in p.scope)
    scope = p.scope + extra
    left = p.values.reshape(p.values.shape + (1,) * len(extra))
    # place q's axes at their positions in the result, size-1 elsewhere
    order = [v for v in scope if v in q.scope]
    qv = q.aligned(order)
    shape = [q.card_of(v) if v in q.scope else 1 for v in scope]
    out = left * qv.reshape(shape)
    counter.multiplications += out.size
    return Potential._wrap(scope, out)


def marginalize(p: Potential, keep: Sequence[int], counter: OpCounter) -> Potential:
    """Sum out every variable of ``p`` not in ``keep``; result axes follow ``keep``."""
    keep = tuple(keep)
    missing = [v for v in keep if v not in p.scope]
    if missing:
        raise ValueError(f"variables {missing} are not in scope {p.scope}")
    drop = tuple(ax for ax, v in enumerate(p.scope) if v not in keep)
    summed = p.values.sum(axis=drop) if drop else p.values
    remaining = [v for v in p.scope if v in keep]
    out = np.asarray(np.transpose(summed, [remaining.index(v) for v in keep]))
    if not out.flags.c_contiguous:
        out = out.copy()
    counter.additions += p.size - out.size
    return Potential._wrap(keep, out)


def reduce_evidence(p: Potential, var: int, state: int, counter: OpCounter) -> Potential:
    """Multiply ``p`` by the indicator likelihood vector of ``var = state``."""
    if var not in p.scope:
        raise ValueError(f"variable {var} not in scope {p.scope}")
    card = p.card_of(var)
    if not 0 <= state < card:
        raise ValueError(f"state {state} out of range for cardinality {card}")
    indicator = np.zeros(card)
    indicator[state] = 1.0
    return multiply(p, Potential((var,), indicator), counter)


def normalize(p: Potential) -> Tuple[Potential, float]:
    total = float(p.values.sum())
    if total <= 0.0:
        raise ZeroProbabilityError("evidence has probability zero")
    return Potential(p.scope, p.values / total), total
