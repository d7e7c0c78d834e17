"""Brute-force joint enumeration, used as ground truth in tests."""

from __future__ import annotations

import math

import numpy as np

from .network import BeliefNetwork
from .potentials import Potential, ZeroProbabilityError

MAX_JOINT_STATES = 2 ** 24


class StateSpaceTooLarge(ValueError):
    pass


def enumerate_joint(net: BeliefNetwork) -> Potential:
    """The full joint over all variables, axes in id order."""
    cards = [v.cardinality for v in net.variables]
    if math.prod(cards) > MAX_JOINT_STATES:
        raise StateSpaceTooLarge(f"{math.prod(cards)} joint states exceed {MAX_JOINT_STATES}")
    joint = np.ones(cards)
    for cpt in net.cpts:
        scope = cpt.parents + (cpt.child,)
        table = np.asarray(cpt.table).reshape([net.card(v) for v in scope])
        # move CPT axes into id order and broadcast over the rest
        order = sorted(range(len(scope)), key=lambda a: scope[a])
        table = np.transpose(table, order)
        shape = [1] * net.n
        for v in scope:
            shape[v] = net.card(v)
        joint = joint * table.reshape(shape)
    return Potential(range(net.n), joint)


def oracle_posterior(net: BeliefNetwork, q, target: int, joint: Potential = None):
    """Posterior of ``target`` given ``q.evidence`` and Pr(e), by enumeration."""
    if joint is None:
        joint = enumerate_joint(net)
    values = joint.values
    index = [slice(None)] * net.n
    for v, s in q.evidence.items():
        index[v] = slice(s, s + 1)
    conditioned = values[tuple(index)]
    axes = tuple(a for a in range(net.n) if a != target)
    marginal = conditioned.sum(axis=axes)
    full = np.zeros(net.card(target))
    if target in q.evidence:
        full[q.evidence[target]] = marginal[0]
    else:
        full[:] = marginal
    z = float(full.sum())
    if z <= 0.0:
        raise ZeroProbabilityError("evidence has probability zero")
    return Potential((target,), full / z), z
