import itertools

import pytest

from multilayer import exact_general, feasibility
from multilayer.model import BaseGraph, LinkConfiguration, ModelError, ModelParams, SizeCapError

K3, K4 = BaseGraph.complete(3), BaseGraph.complete(4)


def cfg(g, links):
    return LinkConfiguration(tuple(int(l in links or l[::-1] in links) for l in g.links))


def brute_cover_size(g):
    """Smallest number of cliques (any size >= 2) covering all links, by trying every clique family."""
    cliques = []
    for r in range(2, g.n + 1):
        for nodes in itertools.combinations(range(g.n), r):
            if all(_has(g, u, v) for u, v in itertools.combinations(nodes, 2)):
                cliques.append(frozenset(nodes))
    links = {frozenset(l) for l in g.links}
    for k in range(0, len(links) + 1):
        for family in itertools.combinations(cliques, k):
            covered = {frozenset(p) for c in family for p in itertools.combinations(sorted(c), 2)}
            if links <= covered:
                return k
    raise AssertionError


def _has(g, u, v):
    return (u, v) in g.links or (v, u) in g.links


def check_cover(g, cover):
    for c in cover.cliques:
        assert all(_has(g, u, v) for u, v in itertools.combinations(sorted(c), 2))
    covered = {frozenset(p) for c in cover.cliques for p in itertools.combinations(sorted(c), 2)}
    assert {frozenset(l) for l in g.links} <= covered


def test_induced_subgraph_examples():
    assert feasibility.induced_subgraph(K3, LinkConfiguration.zeros(3)).n_links == 0
    assert feasibility.induced_subgraph(K3, LinkConfiguration.ones(3)).links == K3.links
    sub = feasibility.induced_subgraph(K3, LinkConfiguration((1, 1, 0)))
    assert sub.links == ((0, 1), (0, 2)) and sub.n == 3


def test_min_cover_examples():
    assert len(feasibility.min_clique_edge_cover(K3)) == 1
    assert len(feasibility.min_clique_edge_cover(BaseGraph.path(2))) == 2
    c4 = BaseGraph(4, ((0, 1), (1, 2), (2, 3), (0, 3)))
    cover = feasibility.min_clique_edge_cover(c4)
    assert len(cover) == brute_cover_size(c4) == 4
    check_cover(c4, cover)


def test_min_cover_all_small_graphs():
    for n in (3, 4, 5):
        pairs = list(itertools.combinations(range(n), 2))
        for r in range(len(pairs) + 1):
            for links in itertools.combinations(pairs, r):
                if n == 5 and r not in (4, 6, 7):
                    continue
                g = BaseGraph(n, links)
                cover = feasibility.min_clique_edge_cover(g)
                check_cover(g, cover)
                assert len(cover) == brute_cover_size(g)


def test_triangle_free_cover_is_link_count():
    g = BaseGraph(6, ((0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)))
    assert len(feasibility.min_clique_edge_cover(g)) == g.n_links


def test_maximal_cliques():
    cliques = feasibility.maximal_cliques(BaseGraph(5, ((0, 1), (1, 2), (0, 2), (2, 3))))
    assert sorted(cliques) == sorted([0b00111, 0b01100])


def test_mcc_single_layer_requires_clique():
    for mask in range(1 << K4.n_links):
        x = LinkConfiguration.from_mask(mask, K4.n_links)
        sub = feasibility.induced_subgraph(K4, x)
        touched = {v for l in sub.links for v in l}
        is_clique = all(_has(sub, u, v) for u, v in itertools.combinations(sorted(touched), 2))
        assert feasibility.mcc_feasible(x, 1, K4) == is_clique


def test_mcc_many_layers_always_feasible():
    for mask in range(1 << K4.n_links):
        x = LinkConfiguration.from_mask(mask, K4.n_links)
        assert feasibility.mcc_feasible(x, K4.n_links, K4)


def test_mcc_five_edge_subgraph():
    x = LinkConfiguration((1, 1, 1, 1, 1, 0))  # K4 minus the link (2, 3)
    sub = feasibility.induced_subgraph(K4, x)
    assert brute_cover_size(sub) == 2
    assert feasibility.mcc_feasible(x, 2, K4)
    assert not feasibility.mcc_feasible(x, 1, K4)
    w = feasibility.feasibility_witness(x, 2, K4)
    assert len(w) <= 2
    check_cover(sub, w)


def test_feasibility_monotone_in_m():
    for mask in range(1 << K4.n_links):
        x = LinkConfiguration.from_mask(mask, K4.n_links)
        prev = False
        for M in range(1, 7):
            cur = feasibility.mcc_feasible(x, M, K4)
            assert cur or not prev
            prev = cur


@pytest.mark.parametrize("g", [K3, K4], ids=["K3", "K4"])
def test_feasibility_matches_brute_force(g):
    for M in (1, 2, 3):
        dist = exact_general.brute_force_dist(g, ModelParams.uniform(g, M, 1, 1.0, 0.6))
        for mask in range(1 << g.n_links):
            x = LinkConfiguration.from_mask(mask, g.n_links)
            assert feasibility.mcc_feasible(x, M, g) == (dist[mask] > 0.0)


def test_witness_examples():
    w = feasibility.feasibility_witness(LinkConfiguration((1, 0, 0)), 1, K3)
    assert w.cliques == (frozenset({0, 1}),)
    c4 = cfg(K4, {(0, 1), (1, 2), (2, 3), (0, 3)})
    assert feasibility.feasibility_witness(c4, 1, K4) is None
    assert feasibility.feasibility_witness(c4, 2, K4) is None
    assert len(feasibility.feasibility_witness(c4, 4, K4)) == 4


def test_errors():
    with pytest.raises(ModelError):
        feasibility.mcc_feasible(LinkConfiguration((1, 1)), 1, BaseGraph.path(2))
    big = BaseGraph.complete(7)  # 21 links
    x = LinkConfiguration.ones(21)
    with pytest.raises(SizeCapError):
        feasibility.mcc_feasible(x, 2, big)
