import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dynjt.benchgen import GenSpec, generate_network
from dynjt.jointree import (
    STRATEGIES,
    build_family_graph,
    cliques,
    edge_key,
    effective_hypernodes,
    format_jointree,
    jointree_from_edges,
    lost_set,
    loop_cutset,
    separators_direct,
    separators_fast,
    spanning_tree,
    validate_jointree,
)
from dynjt.network import make_network
from dynjt.pruning import Query, prune_dag

from graph_oracles import brute_separators

A, B, C, D = range(4)


@pytest.fixture
def diamond_tree(diamond):
    # tree 2-1-3-4 of the figure: drop B -> D
    return jointree_from_edges(build_family_graph(diamond), [(A, B), (A, C), (C, D)])


@pytest.fixture
def looped_chain_chain(looped_chain):
    return jointree_from_edges(build_family_graph(looped_chain), [(A, B), (B, C), (C, D)])


def random_case(seed, n=None, width=None):
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(5, 40))
    width = width or int(rng.integers(1, 9))
    return generate_network(GenSpec(n, width, seed))


def random_query(net, rng):
    k = int(rng.integers(0, 4))
    ev = {int(v): 0 for v in rng.choice(net.n, size=k, replace=False)}
    tg = {int(v) for v in rng.choice(net.n, size=int(rng.integers(1, 4)), replace=False)}
    return Query(ev, tg)


class TestFamilyGraph:
    def test_diamond_labels(self, diamond):
        fg = build_family_graph(diamond)
        assert fg.labels == ({A}, {A, B}, {A, C}, {B, C, D})
        assert set(fg.edges) == {(A, B), (A, C), (B, D), (C, D)}

    def test_single_node(self):
        net = make_network([("X", 2)], {"X": ([], [0.5, 0.5])})
        fg = build_family_graph(net)
        assert fg.labels == (frozenset({0}),) and fg.edges == ()

    def test_chain(self, chain):
        assert build_family_graph(chain).labels == ({0}, {0, 1}, {1, 2})


class TestSpanningTree:
    def test_diamond_dropping_bd(self, diamond_tree):
        assert diamond_tree.lost == {B}
        assert diamond_tree.hypernodes == ({A}, {A, B}, {A, C}, {B, C, D})

    def test_tree_dag_keeps_everything(self, chain, star):
        for net in (chain, star):
            for strategy in STRATEGIES:
                bjt = spanning_tree(build_family_graph(net), strategy)
                assert set(bjt.tree_edges) == set(net.edges())
                assert bjt.lost == frozenset()

    def test_single_loop_loses_one_node(self):
        net = make_network(
            [("A", 2), ("B", 2), ("C", 2), ("D", 2)],
            {
                "A": ([], [0.5, 0.5]),
                "B": (["A"], [0.5, 0.5, 0.5, 0.5]),
                "C": (["A"], [0.5, 0.5, 0.5, 0.5]),
                "D": (["B", "C"], [0.5] * 8),
            },
        )
        for strategy in STRATEGIES:
            assert len(spanning_tree(build_family_graph(net), strategy).lost) == 1

    @pytest.mark.parametrize("strategy", STRATEGIES)
    def test_spanning(self, strategy):
        for seed in range(30):
            net = random_case(seed)
            bjt = spanning_tree(build_family_graph(net), strategy, seed=seed)
            assert len(bjt.all_edges()) == net.n - 1
            assert len(bjt.order) == net.n
            assert set(bjt.tree_edges) <= set(net.edges())
            assert bjt.hypernodes == build_family_graph(net).labels

    def test_random_is_seeded(self):
        fg = build_family_graph(random_case(5, n=30, width=6))
        a = spanning_tree(fg, "random", seed=1)
        assert a == spanning_tree(fg, "random", seed=1)

    def test_unknown_strategy(self, diamond):
        with pytest.raises(ValueError):
            spanning_tree(build_family_graph(diamond), "best")

    def test_forest_joined_by_virtual_edges(self):
        net = make_network(
            [("A", 2), ("B", 2), ("C", 2)],
            {"A": ([], [0.5, 0.5]), "B": ([], [0.2, 0.8]), "C": (["B"], [0.5, 0.5, 0.1, 0.9])},
        )
        bjt = spanning_tree(build_family_graph(net))
        assert bjt.virtual_edges == ((0, 1),)
        seps = separators_fast(bjt)
        assert seps[(0, 1)] == frozenset()

    def test_explicit_edges_must_be_a_forest(self, diamond):
        fg = build_family_graph(diamond)
        with pytest.raises(ValueError):
            jointree_from_edges(fg, [(A, B), (A, C), (B, D), (C, D)])
        with pytest.raises(ValueError):
            jointree_from_edges(fg, [(B, A)])


class TestLostSet:
    def test_all_kept(self, diamond):
        fg = build_family_graph(diamond)
        assert lost_set(fg, fg.edges) == frozenset()

    def test_drop_bd(self, diamond):
        fg = build_family_graph(diamond)
        assert lost_set(fg, [(A, B), (A, C), (C, D)]) == {B}

    def test_drop_both_into_d(self, diamond):
        fg = build_family_graph(diamond)
        assert lost_set(fg, [(A, B), (A, C)]) == {B, C}


class TestSeparators:
    def test_diamond_direct(self, diamond_tree):
        seps = separators_direct(diamond_tree)
        assert seps[edge_key(C, D)] == {B, C}
        assert seps[edge_key(A, C)] == {A, B}
        assert seps[edge_key(A, B)] == {A, B}

    def test_diamond_fast_matches_direct(self, diamond_tree):
        assert separators_fast(diamond_tree) == separators_direct(diamond_tree)

    def test_empty_leaf_hypernode(self, diamond_tree):
        hyper = effective_hypernodes(diamond_tree, {D})
        assert separators_direct(diamond_tree, hyper)[edge_key(C, D)] == frozenset()

    def test_looped_chain_pruning_shrinks_bc(self, looped_chain, looped_chain_chain):
        assert separators_fast(looped_chain_chain)[edge_key(B, C)] == {A, B}
        pruned = prune_dag(looped_chain, Query({}, {C}))
        assert pruned.pruned == {D}
        assert separators_fast(looped_chain_chain, pruned.pruned)[edge_key(B, C)] == {B}

    def test_tree_dag_separators_are_the_parent(self, star):
        bjt = spanning_tree(build_family_graph(star))
        for (a, b) in bjt.tree_edges:
            assert separators_fast(bjt)[edge_key(a, b)] <= {a}

    def test_direct_matches_edge_removal_oracle(self):
        for seed in range(20):
            net = random_case(seed)
            bjt = spanning_tree(build_family_graph(net), "random", seed=seed)
            rng = np.random.default_rng(seed)
            pruned = prune_dag(net, random_query(net, rng)).pruned
            hyper = effective_hypernodes(bjt, pruned)
            assert separators_direct(bjt, hyper) == brute_separators(bjt, hyper)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32), strategy=st.sampled_from(STRATEGIES))
    def test_fast_equals_direct_under_pruning(self, seed, strategy):
        net = random_case(seed)
        bjt = spanning_tree(build_family_graph(net), strategy, seed=seed)
        rng = np.random.default_rng(seed)
        for _ in range(3):
            pruned = prune_dag(net, random_query(net, rng)).pruned
            hyper = effective_hypernodes(bjt, pruned)
            assert separators_fast(bjt, pruned) == separators_direct(bjt, hyper)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32), strategy=st.sampled_from(STRATEGIES))
    def test_lost_set_bounds(self, seed, strategy):
        net = random_case(seed)
        bjt = spanning_tree(build_family_graph(net), strategy, seed=seed)
        seps = separators_fast(bjt)
        for (i, j) in bjt.tree_edges:
            s = seps[edge_key(i, j)]
            assert s - {i} <= bjt.lost
            assert len(s) <= len(bjt.lost) + 1
            assert s == {i} | (bjt.lost & s)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32))
    def test_cutset_bound(self, seed):
        net = random_case(seed)
        bjt = spanning_tree(build_family_graph(net), "loop-cutset-guided")
        assert bjt.lost <= bjt.cutset
        worst = max((len(s) for s in separators_fast(bjt).values()), default=0)
        assert worst <= len(bjt.cutset) + 1


class TestLoopCutset:
    def test_tree_needs_none(self, star):
        assert loop_cutset(build_family_graph(star)) == frozenset()

    def test_dropping_cutset_out_edges_leaves_forest(self):
        for seed in range(30):
            fg = build_family_graph(random_case(seed))
            cut = loop_cutset(fg)
            kept = [e for e in fg.edges if e[0] not in cut]
            # a forest has no 2-core
            jointree_from_edges(fg, kept)


class TestCliques:
    def test_diamond(self, diamond_tree):
        cl = cliques(diamond_tree, separators_direct(diamond_tree))
        assert cl[C] == {A, B, C}
        assert cl[D] == {B, C, D}

    def test_fully_pruned_isolated(self, diamond_tree):
        hyper = effective_hypernodes(diamond_tree, {A, B, C, D})
        seps = separators_fast(diamond_tree, {A, B, C, D})
        assert all(c == frozenset() for c in cliques(diamond_tree, seps, hyper))

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32), strategy=st.sampled_from(STRATEGIES))
    def test_induced_clique_tree_is_a_jointree(self, seed, strategy):
        net = random_case(seed)
        bjt = spanning_tree(build_family_graph(net), strategy, seed=seed)
        seps = separators_fast(bjt)
        cl = cliques(bjt, seps)
        assert validate_jointree(bjt.all_edges(), cl, net) == []
        for a, b in bjt.all_edges():
            assert cl[a] & cl[b] == seps[edge_key(a, b)]


class TestValidateJointree:
    def test_running_intersection_violation(self, diamond, diamond_tree):
        bad = [frozenset({A, B, D}), frozenset({A, B}), frozenset({A, B, C}), frozenset({B, C, D})]
        problems = validate_jointree(diamond_tree.all_edges(), bad, diamond)
        assert problems == ["running intersection fails for D"]

    def test_missing_family(self, diamond, diamond_tree):
        bad = [frozenset({A}), frozenset({A, B}), frozenset({A, C}), frozenset({C, D})]
        assert any("family of D" in p for p in validate_jointree(diamond_tree.all_edges(), bad, diamond))

    def test_not_a_tree(self, diamond):
        cl = [frozenset({A, B, C, D})] * 4
        assert validate_jointree([(0, 1), (1, 2)], cl, diamond)


class TestFormat:
    def test_dump_lines(self, diamond, diamond_tree):
        seps = separators_fast(diamond_tree)
        text = format_jointree(diamond, diamond_tree, seps, cliques(diamond_tree, seps))
        assert "lost {B}" in text
        assert "edge C -> D sep {B, C}" in text
        assert "node C hyper {A, C} clique {A, B, C}" in text
