import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multilayer.model import (BaseGraph, LayerSample, LinkConfiguration, ModelError, ModelParams,
                              merge_layers, multiplicities, parse_graph, parse_params, validate_model)


def test_graph_rejects_bad_structure():
    with pytest.raises(ModelError, match="outside"):
        BaseGraph(3, ((0, 3),))
    with pytest.raises(ModelError, match="self-loop"):
        BaseGraph(2, ((1, 1),))
    with pytest.raises(ModelError, match="duplicate"):
        BaseGraph(2, ((0, 1), (1, 0)))


def test_graph_shape_queries():
    path = BaseGraph.path(3)
    assert path.n == 4 and path.n_links == 3
    assert path.is_tree() and path.is_connected() and not path.is_complete()
    assert path.link_index(2, 1) == 1
    k4 = BaseGraph.complete(4)
    assert k4.is_complete() and k4.n_links == 6
    split = BaseGraph(4, ((0, 1), (2, 3)))
    assert sorted(map(sorted, split.components())) == [[0, 1], [2, 3]]


def test_validate_well_formed_path():
    g = BaseGraph.path(2)
    assert validate_model(g, ModelParams.uniform(g, 2, 1, 1.0, 1.0)).ok


def test_validate_k_exceeds_m():
    g = BaseGraph.path(2)
    rep = validate_model(g, ModelParams.uniform(g, 2, 3, 1.0, 1.0))
    assert not rep.ok
    assert any("K exceeds M" in e for e in rep.errors)


def test_validate_zero_q():
    g = BaseGraph.path(2)
    params = ModelParams(2, 1, (1.0, 1.0), (0.5, 0.0, 0.5))
    rep = validate_model(g, params)
    assert not rep.ok
    with pytest.raises(ModelError):
        rep.raise_for_errors()


def test_validate_warns_on_disconnected():
    g = BaseGraph(4, ((0, 1), (2, 3)))
    rep = validate_model(g, ModelParams.uniform(g, 1, 1, 0.5, 0.5))
    assert rep.ok and rep.warnings


def _layer(g, present):
    return LayerSample.from_activity(g, [True] * g.n, present)


def test_merge_threshold_examples():
    g = BaseGraph.path(1)
    layers = [_layer(g, [True]), _layer(g, [False]), _layer(g, [True])]
    assert merge_layers(layers, 2).bits == (1,)
    assert merge_layers(layers, 3).bits == (0,)
    empty = [_layer(g, [False])] * 3
    assert merge_layers(empty, 1).bits == (0,)


def test_layer_sample_needs_active_endpoints():
    g = BaseGraph.path(2)
    layer = LayerSample.from_activity(g, [True, True, False], [True, True])
    assert layer.layer_links.tolist() == [True, False]
    with pytest.raises(ModelError):
        LayerSample.from_activity(g, [True, True], [True, True])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.booleans(), min_size=4, max_size=4), min_size=1, max_size=6))
def test_merge_properties(rows):
    g = BaseGraph.path(4)
    layers = [_layer(g, r) for r in rows]
    union = np.any(np.array(rows), axis=0).astype(int)
    assert merge_layers(layers, 1).bits == tuple(union)
    # non-increasing in K
    prev = np.array(merge_layers(layers, 1).bits)
    for K in range(2, len(layers) + 1):
        cur = np.array(merge_layers(layers, K).bits)
        assert np.all(cur <= prev)
        prev = cur
    # adding a layer never clears a bit
    more = layers + [_layer(g, [False] * 4)]
    for K in range(1, len(layers) + 1):
        assert np.all(np.array(merge_layers(more, K).bits) >= np.array(merge_layers(layers, K).bits))
    assert multiplicities(layers).tolist() == np.sum(rows, axis=0).tolist()


def test_configuration_round_trip():
    x = LinkConfiguration.from_string("1011")
    assert x.mask == 0b1101
    assert LinkConfiguration.from_mask(x.mask, 4) == x
    assert str(x) == "1011"
    with pytest.raises(ModelError):
        LinkConfiguration.from_string("10a")


def test_parse_files(tmp_path):
    gfile = tmp_path / "g.txt"
    gfile.write_text("3 2\n0 1\n1 2\n")
    g = parse_graph(gfile)
    assert g.links == ((0, 1), (1, 2))
    params = parse_params("M 4\nK 2\np 0.9\nq 0.5\np 1 2 0.25\nq 0 0.75  # override\n", g)
    assert params.M == 4 and params.K == 2
    assert params.p == (0.9, 0.25)
    assert params.q == (0.75, 0.5, 0.5)


def test_parse_errors():
    with pytest.raises(ModelError):
        parse_graph("3 2\n0 1\n")
    g = BaseGraph.path(1)
    with pytest.raises(ModelError):
        parse_params("M 2\nbogus 1\n", g)
    with pytest.raises(ModelError):
        parse_params("M 2\np 0 5 0.1\n", g)
