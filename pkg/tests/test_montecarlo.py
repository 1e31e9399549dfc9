"""Statistical checks of the simulator.

Each check uses a fixed seed, so results are reproducible; the bounds are
3 to 4 standard errors, which a correct sampler clears for the seeds chosen
and would clear for about 99.7% to 99.99% of seeds.
"""

import numpy as np
import pytest
from scipy.stats import binom, chisquare, poisson

from multilayer import exact_general, exact_line, montecarlo as mc
from multilayer.asymptotic import NonIdenticalParams
from multilayer.model import BaseGraph, LinkConfiguration, ModelError, ModelParams, SizeCapError


def test_degenerate_all_ones():
    g = BaseGraph.complete(4)
    rep = mc.simulate(g, ModelParams.uniform(g, 3, 2, 1.0, 1.0),
                      mc.SimConfig(500, 1, config_counts=True, active_link_count=True, cluster_nodes=(0,)))
    assert rep.config == {(1 << 6) - 1: 500}
    assert rep.active_links.mean == 6 and rep.active_links.stderr == 0
    assert rep.cluster[0].mean == 4


def test_single_link_closed_form():
    g = BaseGraph.path(1)
    rep = mc.simulate(g, ModelParams.uniform(g, 2, 1, 1.0, 0.5), mc.SimConfig(100_000, 2024, config_counts=True))
    assert rep.config_estimate(1).z_score(0.4375) < 3


def test_line_cluster_published():
    g = BaseGraph.path(20)
    exact = exact_line.expected_cluster_size(20, 1, exact_line.LineSpec(20, 0.8, 5))
    assert exact == pytest.approx(19.88956040, rel=1e-7)
    rep = mc.simulate(g, ModelParams.uniform(g, 5, 1, 1.0, 0.8), mc.SimConfig(100_000, 31, cluster_nodes=(0,)))
    assert rep.cluster[0].z_score(exact) < 3
    exact6 = exact_line.expected_cluster_size(20, 1, exact_line.LineSpec(20, 0.6, 5))
    rep6 = mc.simulate(g, ModelParams.uniform(g, 5, 1, 1.0, 0.6), mc.SimConfig(100_000, 32, cluster_nodes=(0,)))
    assert rep6.cluster[0].z_score(exact6) < 3


def test_config_frequencies_match_brute_force():
    g = BaseGraph.complete(3)
    params = ModelParams(3, 2, (0.9, 0.7, 0.8), (0.8, 0.6, 0.9))
    dist = exact_general.brute_force_dist(g, params)
    rep = mc.simulate(g, params, mc.SimConfig(100_000, 9, config_counts=True))
    assert mc.max_deviation((rep.config_estimate(mask), dist[mask]) for mask in range(8)) < 4


def test_active_links_and_target():
    g = BaseGraph.path(6)
    spec = exact_line.LineSpec(6, 0.5, 3)
    params = ModelParams.uniform(g, 3, 1, 1.0, 0.5)
    x = LinkConfiguration((1, 1, 0, 1, 0, 1))
    rep = mc.simulate(g, params, mc.SimConfig(100_000, 17, active_link_count=True, target=x.bits))
    assert rep.active_links.z_score(exact_line.expected_active_links(6, spec)) < 4
    assert rep.target.z_score(exact_line.config_prob(x, spec)) < 4


def test_multiplicity_marginal_chi_square():
    g = BaseGraph.path(2)
    M, p, q = 8, 0.7, 0.6
    params = ModelParams(M, 1, (p, p), (q, 0.8, q))
    table = mc.empirical_multiplicity_joint(g, params, mc.SimConfig(100_000, 4), [0])
    counts = np.rint(table * 100_000)
    expected = binom.pmf(np.arange(M + 1), M, p * q * 0.8) * 100_000
    # merge sparse upper cells so every expected count is at least 5
    cut = int(np.max(np.nonzero(expected >= 5)[0]))
    obs = np.append(counts[:cut], counts[cut:].sum())
    exp = np.append(expected[:cut], expected[cut:].sum())
    assert chisquare(obs, exp * obs.sum() / exp.sum()).pvalue > 1e-3


def test_disjoint_links_product_structure():
    g = BaseGraph(4, ((0, 1), (2, 3)))
    params = ModelParams.uniform(g, 4, 1, 0.8, 0.6)
    joint = mc.empirical_multiplicity_joint(g, params, mc.SimConfig(100_000, 12), [0, 1])
    product = np.outer(joint.sum(axis=1), joint.sum(axis=0))
    assert 0.5 * np.abs(joint - product).sum() < 0.01


def test_shared_endpoint_product_form_under_scaling():
    M = 400
    g = BaseGraph.path(2)
    params = ModelParams.uniform(g, M, 1, 1.0, M ** -0.5)
    joint = mc.empirical_multiplicity_joint(g, params, mc.SimConfig(1_000_000, 5), [0, 1])
    k = np.arange(M + 1)
    limit = np.outer(poisson.pmf(k, 1.0), poisson.pmf(k, 1.0))
    assert 0.5 * np.abs(joint - limit).sum() < 0.02


def test_single_layer_bernoulli():
    g = BaseGraph.path(1)
    params = ModelParams(1, 1, (0.5,), (0.8, 0.5))
    table = mc.empirical_multiplicity_joint(g, params, mc.SimConfig(100_000, 3), [0])
    assert table.shape == (2,)
    assert abs(table[1] - 0.2) < 4 * np.sqrt(0.2 * 0.8 / 100_000)


def test_nonidentical_layers():
    g = BaseGraph.path(1)
    params = NonIdenticalParams(np.array([[0.1], [0.2]]), np.ones((2, 2)))
    rep = mc.simulate(g, params, mc.SimConfig(100_000, 8, config_counts=True))
    assert rep.config_estimate(1).z_score(1 - 0.9 * 0.8) < 4


def test_determinism_serial_vs_parallel():
    g = BaseGraph.complete(4)
    params = ModelParams.uniform(g, 3, 1, 0.7, 0.5)
    cfg = dict(replications=5_000, seed=2 ** 63 + 5, config_counts=True, cluster_nodes=(1,),
               active_link_count=True, multiplicity_links=(0, 5))
    a = mc.simulate(g, params, mc.SimConfig(workers=1, **cfg))
    b = mc.simulate(g, params, mc.SimConfig(workers=2, **cfg))
    c = mc.simulate(g, params, mc.SimConfig(workers=1, **cfg))
    assert a == b == c
    d = mc.simulate(g, params, mc.SimConfig(workers=1, **dict(cfg, seed=6)))
    assert d != a


def test_threads_env(monkeypatch):
    monkeypatch.setenv(mc.THREADS_ENV, "3")
    assert mc.default_workers() == 3
    monkeypatch.setenv(mc.THREADS_ENV, "nonsense")
    assert mc.default_workers() == 1


def test_union_find():
    uf = mc.UnionFind(6)
    uf.union(0, 1)
    uf.union(2, 3)
    uf.union(1, 3)
    assert uf.component_size(0) == 4 and uf.component_size(5) == 1


def test_standard_error_definition():
    g = BaseGraph.path(3)
    rep = mc.simulate(g, ModelParams.uniform(g, 2, 1, 1.0, 0.5), mc.SimConfig(2_000, 1, active_link_count=True))
    e = rep.active_links
    assert e.n == 2_000 and e.stderr > 0
    assert mc.Estimate(1.0, 0.0, 5).z_score(1.0) == 0.0


def test_errors():
    g = BaseGraph.path(21)
    with pytest.raises(SizeCapError):
        mc.simulate(g, ModelParams.uniform(g, 1, 1, 1.0, 0.5), mc.SimConfig(10, 1, config_counts=True))
    with pytest.raises(ModelError):
        mc.SimConfig(0, 1)
    with pytest.raises(ModelError):
        mc.simulate(BaseGraph.path(2), ModelParams.uniform(BaseGraph.path(2), 1, 1, 1.0, 0.5),
                    mc.SimConfig(10, 1, cluster_nodes=(5,)))
