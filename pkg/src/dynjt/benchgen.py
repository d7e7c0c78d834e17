"""Seeded random belief networks for benchmarks and property tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .network import BeliefNetwork, Cpt, Variable

DEFAULT_FAMILY_DIST = (0.20, 0.10, 0.25, 0.35, 0.10)


@dataclass(frozen=True)
class GenSpec:
    """Parameters of the generator.

    ``family_dist[k]`` is the probability that a node asks for ``k`` parents.
    Parents come from the ``width`` most recently created nodes, so a small
    width keeps the graph banded and a large one lets it reach far back.
    When ``max_cardinality`` is set, each node's cardinality is drawn
    uniformly from ``cardinality..max_cardinality``.
    """

    node_count: int
    width: int
    seed: int = 0
    family_dist: Tuple[float, ...] = DEFAULT_FAMILY_DIST
    cardinality: int = 2
    max_cardinality: Optional[int] = None

    def check(self) -> None:
        dist = np.asarray(self.family_dist, dtype=float)
        if dist.ndim != 1 or dist.size == 0 or np.any(dist < 0) or abs(dist.sum() - 1.0) > 1e-9:
            raise ValueError(f"invalid family distribution {self.family_dist}")
        if self.width < 1:
            raise ValueError("width must be >= 1")
        if self.node_count <= 4:
            raise ValueError("node_count must exceed 4")
        hi = self.max_cardinality or self.cardinality
        if self.cardinality < 2 or hi < self.cardinality:
            raise ValueError("invalid cardinality range")


def generate_network(spec: GenSpec) -> BeliefNetwork:
    """Draw a network; identical specs give identical networks on any platform.

    Every node gets its own PCG64 stream spawned from the seed, so node ``t``
    is unaffected by how many numbers earlier nodes consumed.
    """
    spec.check()
    dist = np.asarray(spec.family_dist, dtype=float)
    root = np.random.SeedSequence(spec.seed)
    streams = [np.random.Generator(np.random.PCG64(s)) for s in root.spawn(spec.node_count)]
    hi = spec.max_cardinality or spec.cardinality

    cards = [
        int(rng.integers(spec.cardinality, hi + 1)) if hi > spec.cardinality else spec.cardinality
        for rng in streams
    ]
    variables = tuple(Variable(i, f"X{i}", cards[i]) for i in range(spec.node_count))
    cpts = []
    for i, rng in enumerate(streams):
        wanted = int(rng.choice(dist.size, p=dist))
        pool = np.arange(max(0, i - spec.width), i)
        k = min(wanted, pool.size)
        parents = tuple(sorted(int(p) for p in rng.choice(pool, size=k, replace=False))) if k else ()
        rows = int(np.prod([cards[p] for p in parents])) if parents else 1
        raw = rng.uniform(0.0, 1.0, size=(rows, cards[i]))
        table = raw / raw.sum(axis=1, keepdims=True)
        cpts.append(Cpt(i, parents, tuple(float(x) for x in table.ravel())))
    return BeliefNetwork(variables, tuple(cpts))

