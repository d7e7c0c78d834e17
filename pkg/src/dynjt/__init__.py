"""Exact belief-network inference on jointrees that reconfigure as queries change."""

from .benchgen import GenSpec, generate_network
from .inference import InferenceEngine
from .jointree import build_family_graph, spanning_tree
from .network import BeliefNetwork, make_network, parse_network, read_network, serialize_network
from .potentials import OpCounter, Potential
from .pruning import Query, prune_dag, reconfigure

__all__ = [
    "BeliefNetwork",
    "GenSpec",
    "InferenceEngine",
    "OpCounter",
    "Potential",
    "Query",
    "build_family_graph",
    "generate_network",
    "make_network",
    "parse_network",
    "prune_dag",
    "read_network",
    "reconfigure",
    "serialize_network",
    "spanning_tree",
]
