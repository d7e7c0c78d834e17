"""Message passing on dynamically reconfigured jointrees, with message reuse.

An :class:`InferenceEngine` answers a stream of queries. For each query it
prunes the network, reconfigures the basic jointree, works out which nodes'
local potentials changed since the previous query, and then pulls only the
messages the targets need. A stored message is reused unchanged when nothing
on its source side changed and its separator is the same, summed down to the
new separator when that separator shrank, and recomputed otherwise.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Set, Tuple

from .jointree import BasicJointree, Edge, build_family_graph, edge_key, spanning_tree
from .network import BeliefNetwork
from .potentials import (
    OpCounter,
    Potential,
    from_cpt,
    marginalize,
    multiply,
    normalize,
    reduce_evidence,
    unit_potential,
)
from .pruning import PrunedState, Query, ReconfiguredJointree, no_pruning, prune_dag
from .pruning import reconfigure as reconfigure_jointree

REUSE = "reuse"
MARGINALIZE = "marginalize"
RECOMPUTE = "recompute"


@dataclass(frozen=True)
class LocalPotential:
    node: int
    potential: Potential
    evidence_state: Optional[int] = None


@dataclass
class CachedMessage:
    edge: Edge
    message: Potential
    separator: FrozenSet[int]
    epoch: int


@dataclass
class QueryStats:
    additions: int = 0
    multiplications: int = 0
    messages_computed: int = 0
    messages_reused: int = 0
    messages_marginalized: int = 0
    max_separator_size: int = 0
    reconfig_micros: float = 0.0
    inference_micros: float = 0.0
    reconfig_steps: int = 0

    def as_dict(self) -> Dict[str, float]:
        return {
            "additions": self.additions,
            "multiplications": self.multiplications,
            "messages_computed": self.messages_computed,
            "messages_reused": self.messages_reused,
            "messages_marginalized": self.messages_marginalized,
            "max_separator_size": self.max_separator_size,
            "reconfig_micros": self.reconfig_micros,
            "inference_micros": self.inference_micros,
        }

    def add(self, other: "QueryStats") -> None:
        for name in self.__dataclass_fields__:
            if name == "max_separator_size":
                self.max_separator_size = max(self.max_separator_size, other.max_separator_size)
            else:
                setattr(self, name, getattr(self, name) + getattr(other, name))


@dataclass(frozen=True)
class CacheEvent:
    epoch: int
    edge: Edge
    action: str
    message: Potential


def compute_dirty_set(
    old_evidence: Mapping[int, int],
    old_pruned: PrunedState,
    new_evidence: Mapping[int, int],
    new_pruned: PrunedState,
) -> FrozenSet[int]:
    """Nodes whose local potential may differ between two consecutive queries."""
    dirty = {v for v in set(old_evidence) | set(new_evidence)
             if old_evidence.get(v) != new_evidence.get(v)}
    dirty |= old_pruned.pruned ^ new_pruned.pruned
    return frozenset(dirty)


def side_dirty_flags(bjt: BasicJointree, dirty: FrozenSet[int]) -> Dict[Edge, bool]:
    """For every directed tree edge (i, j): does the i-side hold a dirty node?

    One bottom-up pass counts dirty nodes per rooted subtree; the complement
    count gives the other direction.
    """
    parent = bjt.tree_parent
    count = [1 if u in dirty else 0 for u in range(bjt.n)]
    for u in reversed(bjt.order):
        if parent[u] >= 0:
            count[parent[u]] += count[u]
    total = len(dirty)
    flags: Dict[Edge, bool] = {}
    for u in bjt.order:
        p = parent[u]
        if p >= 0:
            flags[(u, p)] = count[u] > 0
            flags[(p, u)] = total - count[u] > 0
    return flags


class InferenceEngine:
    """Answers queries on one network; stateful across queries.

    Parameters
    ----------
    net : BeliefNetwork
    bjt : BasicJointree, optional
        Built with ``strategy`` when omitted.
    reconfigure : bool
        ``False`` gives the static-jointree baseline: nothing is pruned and
        separators never change.
    cache : bool
        Keep messages across queries.
    trace : bool
        Record a :class:`CacheEvent` for every reuse and marginalization.
    """

    def __init__(
        self,
        net: BeliefNetwork,
        bjt: Optional[BasicJointree] = None,
        *,
        strategy: str = "minimize-lost-nodes",
        reconfigure: bool = True,
        cache: bool = True,
        trace: bool = False,
    ) -> None:
        self.net = net
        self.bjt = bjt if bjt is not None else spanning_tree(build_family_graph(net), strategy)
        self.reconfigure_enabled = reconfigure
        self.cache_enabled = cache
        self.counter = OpCounter()
        self.totals = QueryStats()
        self.last_stats = QueryStats()
        self.events: Optional[List[CacheEvent]] = [] if trace else None
        self.epoch = 0
        self._cpt = [from_cpt(net.cpts[i], net) for i in range(net.n)]
        self.jt: ReconfiguredJointree = reconfigure_jointree(self.bjt, no_pruning(net))
        self.query: Optional[Query] = None
        self._local: List[Optional[LocalPotential]] = [None] * net.n
        self._cache: Dict[Edge, CachedMessage] = {}
        self._fresh: Dict[Edge, Potential] = {}
        self._side_dirty: Dict[Edge, bool] = {}
        self._stats = QueryStats()

    # -- query lifecycle -------------------------------------------------

    def answer_query(self, q: Query) -> Dict[int, Potential]:
        """Posterior of every target; ``self.evidence_probability`` holds Pr(e)."""
        q.check(self.net)
        self._begin(q)
        t0 = time.perf_counter_ns()
        a0, m0 = self.counter.snapshot()
        answers = {}
        z = None
        try:
            for t in sorted(q.targets):
                answers[t], z = self._distribution(t)
        finally:
            self._stats.inference_micros += (time.perf_counter_ns() - t0) / 1000.0
            a1, m1 = self.counter.snapshot()
            self._stats.additions += a1 - a0
            self._stats.multiplications += m1 - m0
            self.last_stats = self._stats
            self.totals.add(self._stats)
        self.evidence_probability = z
        return answers

    def prepare(self, q: Query) -> None:
        """Reconfigure and invalidate for ``q`` without computing anything."""
        q.check(self.net)
        self._begin(q)
        self.last_stats = self._stats
        self.totals.add(self._stats)

    def _begin(self, q: Query) -> None:
        self.epoch += 1
        stats = QueryStats()
        old_query, old_pruned = self.query, self.jt.pruned

        t0 = time.perf_counter_ns()
        if self.reconfigure_enabled:
            pruned = prune_dag(self.net, q)
            self.jt = reconfigure_jointree(self.bjt, pruned)
            stats.reconfig_micros = (time.perf_counter_ns() - t0) / 1000.0
            stats.reconfig_steps = pruned.steps + self.jt_steps()
        t1 = time.perf_counter_ns()

        if old_query is None:
            dirty = frozenset(range(self.net.n))
        else:
            dirty = compute_dirty_set(old_query.evidence, old_pruned, q.evidence, self.jt.pruned)
        self.dirty = dirty
        self._side_dirty = side_dirty_flags(self.bjt, dirty)
        if self.cache_enabled:
            for e, flag in self._side_dirty.items():
                if flag:
                    self._cache.pop(e, None)
        else:
            self._cache.clear()
        self.query = q
        a0, m0 = self.counter.snapshot()
        for k in dirty:
            self._local[k] = None
        for k in range(self.net.n):
            if self._local[k] is None:
                self._local[k] = self._make_local(k, q)
        a1, m1 = self.counter.snapshot()
        stats.additions += a1 - a0
        stats.multiplications += m1 - m0
        self._fresh = {}
        stats.max_separator_size = self.jt.max_separator()
        stats.inference_micros += (time.perf_counter_ns() - t1) / 1000.0
        self._stats = stats

    def jt_steps(self) -> int:
        # work units of the fast separator pass: one per node and edge, plus
        # one tree sweep per unpruned lost node
        live_lost = sum(1 for s in self.bjt.lost if s not in self.jt.pruned)
        return self.bjt.n + len(self.bjt.fg.edges) + live_lost * self.bjt.n

    # -- local potentials ------------------------------------------------

    def _make_local(self, i: int, q: Query) -> LocalPotential:
        if i in self.jt.pruned:
            return LocalPotential(i, unit_potential())
        state = q.evidence.get(i)
        pot = self._cpt[i]
        if state is not None:
            pot = reduce_evidence(pot, i, state, self.counter)
        return LocalPotential(i, pot, state)

    def local_potential(self, i: int) -> LocalPotential:
        return self._local[i]

    # -- messages --------------------------------------------------------

    def separator(self, i: int, j: int) -> FrozenSet[int]:
        return self.jt.separators[edge_key(i, j)]

    def cache_probe(self, i: int, j: int, new_sep: FrozenSet[int]) -> str:
        slot = self._cache.get((i, j))
        if slot is None or self._side_dirty.get((i, j), True):
            return RECOMPUTE
        if new_sep == slot.separator:
            return REUSE
        if new_sep < slot.separator:
            return MARGINALIZE
        return RECOMPUTE

    def message(self, i: int, j: int) -> Potential:
        """Message from tree node ``i`` to neighbour ``j`` under the current query."""
        if self.query is None:
            raise RuntimeError("no query has been prepared")
        if (i, j) in self._fresh:
            return self._fresh[(i, j)]
        stack = [(i, j)]
        while stack:
            a, b = stack[-1]
            if (a, b) in self._fresh:
                stack.pop()
                continue
            sep = self.separator(a, b)
            if self.cache_enabled:
                action = self.cache_probe(a, b, sep)
                if action != RECOMPUTE:
                    self._take_cached(a, b, sep, action)
                    stack.pop()
                    continue
            pending = [(k, a) for k in self.bjt.neighbors[a]
                       if k != b and (k, a) not in self._fresh]
            if pending:
                stack.extend(pending)
                continue
            stack.pop()
            incoming = [self._fresh[(k, a)] for k in self.bjt.neighbors[a] if k != b]
            msg = self._combine(self._local[a].potential, incoming, sorted(sep))
            self._stats.messages_computed += 1
            self._store(a, b, msg, sep)
        return self._fresh[(i, j)]

    def _take_cached(self, a: int, b: int, sep: FrozenSet[int], action: str) -> None:
        slot = self._cache[(a, b)]
        if action == REUSE:
            msg = slot.message
            self._stats.messages_reused += 1
        else:
            msg = marginalize(slot.message, sorted(sep), self.counter)
            self._stats.messages_marginalized += 1
        if self.events is not None:
            self.events.append(CacheEvent(self.epoch, (a, b), action, msg))
        self._store(a, b, msg, sep)

    def _store(self, a: int, b: int, msg: Potential, sep: FrozenSet[int]) -> None:
        self._fresh[(a, b)] = msg
        if self.cache_enabled:
            self._cache[(a, b)] = CachedMessage((a, b), msg, sep, self.epoch)

    def _combine(self, phi: Potential, incoming: Sequence[Potential], keep: Sequence[int]) -> Potential:
        # multiplying by the unit potential is the identity; it costs nothing
        factors = [f for f in [phi, *incoming] if not f.is_unit()]
        if not factors:
            return marginalize(unit_potential(), keep, self.counter)
        acc = factors[0]
        for f in factors[1:]:
            acc = multiply(acc, f, self.counter)
        return marginalize(acc, keep, self.counter)

    # -- distributions ---------------------------------------------------

    def _distribution(self, i: int) -> Tuple[Potential, float]:
        if i in self.jt.pruned:
            raise ValueError(f"node {i} is pruned under the current query")
        incoming = [self.message(k, i) for k in self.bjt.neighbors[i]]
        joint = self._combine(self._local[i].potential, incoming, (i,))
        return normalize(joint)

    def node_distribution(self, i: int) -> Tuple[Potential, float]:
        """Posterior of ``i`` and Pr(e) under the current query."""
        return self._distribution(i)

    # -- introspection ---------------------------------------------------

    def cached(self, i: int, j: int) -> Optional[CachedMessage]:
        return self._cache.get((i, j))


def answer_query(engine: InferenceEngine, q: Query) -> Dict[int, Potential]:
    return engine.answer_query(q)
