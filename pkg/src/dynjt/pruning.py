"""Queries, barren-node pruning, and jointree reconfiguration."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Tuple

from .jointree import (
    BasicJointree,
    CliqueMap,
    SeparatorMap,
    cliques,
    effective_hypernodes,
    separators_fast,
)
from .network import BeliefNetwork, NetworkError


@dataclass(frozen=True)
class Query:
    """Hard evidence ``{node: state}`` plus the nodes to compute posteriors for."""

    evidence: Mapping[int, int] = field(default_factory=dict)
    targets: FrozenSet[int] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "evidence", dict(self.evidence))
        object.__setattr__(self, "targets", frozenset(self.targets))

    def __hash__(self) -> int:
        return hash((tuple(sorted(self.evidence.items())), self.targets))

    @property
    def relevant(self) -> FrozenSet[int]:
        return frozenset(self.evidence) | self.targets

    def check(self, net: BeliefNetwork) -> None:
        for v, s in self.evidence.items():
            if not 0 <= v < net.n:
                raise NetworkError(f"evidence on unknown node {v}")
            if not 0 <= s < net.card(v):
                raise NetworkError(
                    f"state {s} out of range for {net.variables[v].name}"
                )
        for t in self.targets:
            if not 0 <= t < net.n:
                raise NetworkError(f"unknown target node {t}")


def parse_query(net: BeliefNetwork, evidence: str = "", targets: str = "") -> Query:
    """Build a query from ``"A=1,B=0"`` and ``"C,D"`` style strings."""
    ev: Dict[int, int] = {}
    for item in filter(None, (x.strip() for x in evidence.split(","))):
        name, _, state = item.partition("=")
        if not state:
            raise NetworkError(f"evidence item {item!r} is not NAME=STATE")
        ev[net.index(name.strip())] = int(state)
    tg = frozenset(net.index(t.strip()) for t in targets.split(",") if t.strip())
    q = Query(ev, tg)
    q.check(net)
    return q


@dataclass(frozen=True)
class PrunedState:
    pruned: FrozenSet[int]
    flags: Tuple[bool, ...]
    steps: int = 0

    def __contains__(self, i: int) -> bool:
        return self.flags[i]


def prune_dag(net: BeliefNetwork, q: Query) -> PrunedState:
    """Remove barren leaves (not in E or Q) until none remain; linear time."""
    keep = q.relevant
    remaining = [len(net.children(i)) for i in range(net.n)]
    flags = [False] * net.n
    stack = [i for i in range(net.n) if remaining[i] == 0 and i not in keep]
    steps = net.n
    while stack:
        i = stack.pop()
        flags[i] = True
        for p in net.parents(i):
            steps += 1
            remaining[p] -= 1
            if remaining[p] == 0 and p not in keep:
                stack.append(p)
    pruned = frozenset(i for i, f in enumerate(flags) if f)
    return PrunedState(pruned, tuple(flags), steps)


def no_pruning(net: BeliefNetwork) -> PrunedState:
    return PrunedState(frozenset(), (False,) * net.n)


@dataclass(frozen=True)
class ReconfiguredJointree:
    bjt: BasicJointree
    pruned: PrunedState
    hypernodes: Tuple[FrozenSet[int], ...]
    separators: SeparatorMap
    cliques: CliqueMap

    def max_separator(self) -> int:
        return max((len(s) for s in self.separators.values()), default=0)


def reconfigure(bjt: BasicJointree, pruned: PrunedState) -> ReconfiguredJointree:
    """Empty the hypernodes of pruned nodes and rederive separators and cliques."""
    hyper = tuple(effective_hypernodes(bjt, pruned.pruned))
    seps = separators_fast(bjt, pruned.pruned)
    return ReconfiguredJointree(bjt, pruned, hyper, seps, cliques(bjt, seps, hyper))

