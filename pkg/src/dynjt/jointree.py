"""Basic jointrees built as spanning trees of the family graph.

Every network node owns one tree node whose hypernode is the node's family.
Separators and cliques are derived quantities; two separator routines are
provided: :func:`separators_direct` intersects side unions literally and
serves as the reference, :func:`separators_fast` only looks at lost nodes and
tree-local occurrences and is what the inference engine uses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .network import BeliefNetwork, family

Edge = Tuple[int, int]
SeparatorMap = Dict[Edge, FrozenSet[int]]
CliqueMap = List[FrozenSet[int]]

STRATEGIES = ("minimize-lost-nodes", "random", "loop-cutset-guided")


def edge_key(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class FamilyGraph:
    n: int
    edges: Tuple[Edge, ...]
    labels: Tuple[FrozenSet[int], ...]
    children: Tuple[Tuple[int, ...], ...]


def build_family_graph(net: BeliefNetwork) -> FamilyGraph:
    return FamilyGraph(
        n=net.n,
        edges=tuple(net.edges()),
        labels=tuple(family(net, i) for i in range(net.n)),
        children=tuple(net.children(i) for i in range(net.n)),
    )


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


@dataclass(frozen=True)
class BasicJointree:
    """Spanning tree of a family graph with one family per hypernode.

    ``tree_edges`` are kept family-graph edges (parent, child); when the
    network is disconnected, ``virtual_edges`` join the component trees into
    a single tree and always carry empty separators.
    """

    fg: FamilyGraph
    tree_edges: Tuple[Edge, ...]
    virtual_edges: Tuple[Edge, ...]
    hypernodes: Tuple[FrozenSet[int], ...]
    lost: FrozenSet[int]
    strategy: str
    cutset: Optional[FrozenSet[int]] = None
    neighbors: Tuple[Tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    order: Tuple[int, ...] = field(init=False, repr=False, compare=False)
    tree_parent: Tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        adj: List[List[int]] = [[] for _ in range(self.fg.n)]
        for a, b in self.all_edges():
            adj[a].append(b)
            adj[b].append(a)
        object.__setattr__(self, "neighbors", tuple(tuple(sorted(x)) for x in adj))
        # preorder from node 0; parents precede children
        parent = [-1] * self.fg.n
        order = []
        if self.fg.n:
            seen = [False] * self.fg.n
            stack = [0]
            seen[0] = True
            while stack:
                u = stack.pop()
                order.append(u)
                for v in self.neighbors[u]:
                    if not seen[v]:
                        seen[v] = True
                        parent[v] = u
                        stack.append(v)
        object.__setattr__(self, "order", tuple(order))
        object.__setattr__(self, "tree_parent", tuple(parent))

    @property
    def n(self) -> int:
        return self.fg.n

    def all_edges(self) -> Tuple[Edge, ...]:
        return self.tree_edges + self.virtual_edges

    def directed_edges(self) -> List[Edge]:
        out = []
        for a, b in self.all_edges():
            out.append((a, b))
            out.append((b, a))
        return out


def lost_set(fg: FamilyGraph, tree_edges: Iterable[Edge]) -> FrozenSet[int]:
    kept = set(tree_edges)
    return frozenset(i for (i, j) in fg.edges if (i, j) not in kept)


def loop_cutset(fg: FamilyGraph) -> FrozenSet[int]:
    """Greedy cutset whose outgoing edges, once removed, leave a forest.

    Repeatedly strips the skeleton down to its 2-core and moves the core node
    with the most outgoing core edges (ties: core degree, then lower id) into
    the cutset. A cutset of this kind intercepts every loop at a node the
    loop leaves through, so dropping only cutset out-edges is always enough.
    """
    cut: Set[int] = set()
    while True:
        active = [e for e in fg.edges if e[0] not in cut]
        core = _two_core(fg.n, active)
        if not core:
            return frozenset(cut)
        out_deg: Dict[int, int] = {}
        deg: Dict[int, int] = {}
        for a, b in core:
            out_deg[a] = out_deg.get(a, 0) + 1
            deg[a] = deg.get(a, 0) + 1
            deg[b] = deg.get(b, 0) + 1
        pick = max(out_deg, key=lambda v: (out_deg[v], deg[v], -v))
        cut.add(pick)


def _two_core(n: int, edges: Sequence[Edge]) -> List[Edge]:
    adj: List[Set[int]] = [set() for _ in range(n)]
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    stack = [v for v in range(n) if len(adj[v]) <= 1]
    removed = [False] * n
    while stack:
        v = stack.pop()
        if removed[v]:
            continue
        removed[v] = True
        for u in adj[v]:
            adj[u].discard(v)
            if len(adj[u]) <= 1 and not removed[u]:
                stack.append(u)
        adj[v].clear()
    return [(a, b) for a, b in edges if not removed[a] and not removed[b]]


def spanning_tree(
    fg: FamilyGraph, strategy: str = "minimize-lost-nodes", seed: int = 0
) -> BasicJointree:
    """Pick a spanning tree of the family graph's skeleton.

    Strategies:

    ``minimize-lost-nodes``
        Visit nodes by descending out-degree (ties by id) and keep as many of
        each node's out-edges as possible without closing a cycle.
    ``random``
        Kruskal over a seeded uniform shuffle of the edges.
    ``loop-cutset-guided``
        Keep every edge not leaving a greedy loop cutset, then fill in from
        the cutset's out-edges. Only cutset nodes can lose edges.
    """
    dsu = _DisjointSet(fg.n)
    kept: List[Edge] = []
    cutset = None

    def offer(edges: Iterable[Edge]) -> None:
        for a, b in edges:
            if dsu.union(a, b):
                kept.append((a, b))

    if strategy == "minimize-lost-nodes":
        out_deg = [len(c) for c in fg.children]
        for i in sorted(range(fg.n), key=lambda v: (-out_deg[v], v)):
            offer((i, c) for c in fg.children[i])
    elif strategy == "random":
        rng = np.random.default_rng(seed)
        edges = list(fg.edges)
        offer(edges[k] for k in rng.permutation(len(edges)))
    elif strategy == "loop-cutset-guided":
        cutset = loop_cutset(fg)
        free = [e for e in fg.edges if e[0] not in cutset]
        before = len(kept)
        offer(free)
        assert len(kept) - before == len(free), "cutset left a cycle"
        offer(e for e in fg.edges if e[0] in cutset)
    else:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")

    return _assemble(fg, kept, dsu, strategy, cutset)


def jointree_from_edges(fg: FamilyGraph, tree_edges: Iterable[Edge]) -> BasicJointree:
    """Basic jointree over a caller-chosen forest of family-graph edges."""
    known = set(fg.edges)
    dsu = _DisjointSet(fg.n)
    kept = []
    for a, b in tree_edges:
        if (a, b) not in known:
            raise ValueError(f"({a}, {b}) is not a family-graph edge")
        if not dsu.union(a, b):
            raise ValueError(f"({a}, {b}) closes a cycle")
        kept.append((a, b))
    return _assemble(fg, kept, dsu, "given", None)


def _assemble(fg, kept, dsu, strategy, cutset) -> BasicJointree:
    roots = sorted({dsu.find(v) for v in range(fg.n)})
    virtual = tuple((roots[0], r) for r in roots[1:])
    kept_sorted = tuple(sorted(kept, key=lambda e: (e[1], e[0])))
    return BasicJointree(
        fg=fg,
        tree_edges=kept_sorted,
        virtual_edges=virtual,
        hypernodes=fg.labels,
        lost=lost_set(fg, kept_sorted),
        strategy=strategy,
        cutset=cutset,
    )


def effective_hypernodes(bjt: BasicJointree, pruned: Iterable[int] = ()) -> List[FrozenSet[int]]:
    pruned = set(pruned)
    return [frozenset() if i in pruned else h for i, h in enumerate(bjt.hypernodes)]


def separators_direct(
    bjt: BasicJointree, hypernodes: Optional[Sequence[FrozenSet[int]]] = None
) -> SeparatorMap:
    """Separators as the literal intersection of the two side unions.

    Reference routine: one bottom-up pass collects subtree unions, one
    top-down pass collects the complementary unions.
    """
    hyper = list(bjt.hypernodes if hypernodes is None else hypernodes)
    parent = bjt.tree_parent
    down: List[FrozenSet[int]] = list(hyper)
    for u in reversed(bjt.order):
        if parent[u] >= 0:
            down[parent[u]] = down[parent[u]] | down[u]
    up: List[FrozenSet[int]] = [frozenset()] * bjt.n
    for u in bjt.order:
        kids = [v for v in bjt.neighbors[u] if parent[v] == u]
        for v in kids:
            rest = up[u] | hyper[u]
            for w in kids:
                if w != v:
                    rest = rest | down[w]
            up[v] = rest
    seps: SeparatorMap = {}
    for u in bjt.order:
        if parent[u] >= 0:
            seps[edge_key(u, parent[u])] = down[u] & up[u]
    return seps


def separators_fast(bjt: BasicJointree, pruned: Iterable[int] = ()) -> SeparatorMap:
    """Separators from occurrence subtrees, touching only lost nodes globally.

    A variable occurs exactly in its own hypernode and its children's, so a
    variable that kept all of its out-edges can only sit on the tree edges to
    its unpruned children; only lost variables need a pass over the tree.
    """
    pruned = pruned if isinstance(pruned, (set, frozenset)) else set(pruned)
    fg = bjt.fg
    acc: Dict[Edge, Set[int]] = {edge_key(a, b): set() for a, b in bjt.all_edges()}

    for s in range(fg.n):
        if s in pruned or s in bjt.lost:
            continue
        for c in fg.children[s]:
            if c not in pruned:
                acc[edge_key(s, c)].add(s)

    if bjt.lost:
        parent = bjt.tree_parent
        order = bjt.order
        for s in bjt.lost:
            if s in pruned:
                continue
            occ = [s] + [c for c in fg.children[s] if c not in pruned]
            if len(occ) < 2:
                continue
            count = [0] * fg.n
            for k in occ:
                count[k] = 1
            total = len(occ)
            for u in reversed(order):
                p = parent[u]
                if p < 0:
                    continue
                if 0 < count[u] < total:
                    acc[edge_key(u, p)].add(s)
                count[p] += count[u]
    return {e: frozenset(v) for e, v in acc.items()}


def cliques(
    bjt: BasicJointree,
    seps: SeparatorMap,
    hypernodes: Optional[Sequence[FrozenSet[int]]] = None,
) -> CliqueMap:
    hyper = bjt.hypernodes if hypernodes is None else hypernodes
    out = []
    for i in range(bjt.n):
        c = set(hyper[i])
        for j in bjt.neighbors[i]:
            c |= seps[edge_key(i, j)]
        out.append(frozenset(c))
    return out


def validate_jointree(
    tree_edges: Iterable[Edge],
    clique_map: Sequence[FrozenSet[int]],
    net: BeliefNetwork,
    pruned: Iterable[int] = (),
) -> List[str]:
    """Check family coverage and running intersection; return violations.

    ``pruned`` removes nodes (and so their families) from the dag being
    covered.
    """
    pruned = set(pruned)
    n = len(clique_map)
    adj: List[List[int]] = [[] for _ in range(n)]
    edges = list(tree_edges)
    problems = []
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    if len(edges) != n - 1 or not _connected(range(n), adj, n):
        problems.append("tree edges do not form a spanning tree")

    for i in range(net.n):
        if i in pruned:
            continue
        fam = frozenset((i,) + tuple(p for p in net.parents(i) if p not in pruned))
        if not any(fam <= c for c in clique_map):
            problems.append(f"family of {net.variables[i].name} is in no clique")

    holders: Dict[int, List[int]] = {}
    for k, c in enumerate(clique_map):
        for v in c:
            holders.setdefault(v, []).append(k)
    for v, nodes in sorted(holders.items()):
        if not _connected(nodes, adj, n):
            problems.append(f"running intersection fails for {net.variables[v].name}")
    return problems


def _connected(nodes, adj, n) -> bool:
    nodes = list(nodes)
    if not nodes:
        return True
    inside = [False] * n
    for k in nodes:
        inside[k] = True
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if inside[w] and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(nodes)


def format_jointree(
    net: BeliefNetwork,
    bjt: BasicJointree,
    seps: SeparatorMap,
    clique_map: CliqueMap,
    hypernodes: Optional[Sequence[FrozenSet[int]]] = None,
) -> str:
    """Text dump: lost set, one line per tree edge, one line per node."""
    hyper = bjt.hypernodes if hypernodes is None else hypernodes

    def names(s):
        return "{" + ", ".join(net.names(sorted(s))) + "}"

    lines = [f"strategy {bjt.strategy}", f"lost {names(bjt.lost)}"]
    if bjt.cutset is not None:
        lines.append(f"cutset {names(bjt.cutset)}")
    virtual = set(bjt.virtual_edges)
    for a, b in bjt.all_edges():
        kind = "virtual" if (a, b) in virtual else "edge"
        lines.append(
            f"{kind} {net.variables[a].name} -> {net.variables[b].name} "
            f"sep {names(seps[edge_key(a, b)])}"
        )
    for i in range(bjt.n):
        lines.append(
            f"node {net.variables[i].name} hyper {names(hyper[i])} clique {names(clique_map[i])}"
        )
    return "\n".join(lines) + "\n"
