import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shapingcodes.channel_model import (ChannelError, CostGraph, NotStronglyConnected, SourceSpec,
                                        classify_cost_structure, has_zero_cost_cycle, max_cycle_mean,
                                        min_cycle_mean, parse_channel, parse_source, serialize_channel,
                                        serialize_source, split_parallel_edges)
from shapingcodes.oracle import count_paths_exact_cost
from shapingcodes.shaping_theory import modified_costs

from conftest import cost_graphs, random_cycle
from oracles import FLASH_EDGES, walks


def test_parse_flash_costs(flash):
    assert flash.vertices == ("00", "01", "10", "11")
    assert len(flash.edges) == 8
    for (a, b), c in FLASH_EDGES.items():
        assert flash.cost(flash.index(a), flash.index(b)) == c
    assert [c for _, _, c in flash.edges] == [1, 2, 4, 4, 2, 3, 4, 4]
    assert flash.is_integer and flash.start == 0


def test_parse_k2(k2):
    assert k2.n == 2 and np.all(k2.weights == 1)


def test_unreachable_vertex_rejected():
    with pytest.raises(NotStronglyConnected):
        parse_channel("vertex a\nvertex b\nedge a a 1\n")


@pytest.mark.parametrize("text, fragment", [
    ("vertex a\nedge a b 1\n", "unknown vertex"),
    ("vertex a\nedge a a -1\n", "cost"),
    ("vertex a\nedge a a 1\nedge a a 2\n", "duplicate"),
    ("vertex a\nvertex a\nedge a a 1\n", "duplicate"),
    ("vertex a\nedge a a x\n", "cost"),
    ("vertex a\nbogus a\n", "syntax"),
    ("", "no vertices"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ChannelError, match=fragment):
        parse_channel(text)


def test_parse_error_carries_line_number():
    with pytest.raises(ChannelError) as info:
        parse_channel("# c\nvertex a\nedge a a nope\n")
    assert info.value.lineno == 3


def test_start_line_and_comments():
    g = parse_channel("vertex a  # first\nvertex b\nstart b\nedge a b 1\nedge b a 2.5\n")
    assert g.start == 1 and g.cost(1, 0) == 2.5 and not g.is_integer


def test_serialize_roundtrip_builtins(flash, k2, plastic):
    for g in (flash, k2, plastic):
        again = parse_channel(serialize_channel(g))
        assert again.vertices == g.vertices and again.edges == g.edges and again.start == g.start


@given(cost_graphs())
def test_serialize_parse_identity(g):
    text = serialize_channel(g)
    again = parse_channel(text)
    assert again.edges == g.edges
    assert serialize_channel(again) == text


def test_source_parse_sorts_and_validates():
    src = parse_source("symbol x 0.1\nsymbol y 0.9\n")
    assert src.symbols == ("y", "x") and src.probs == (0.9, 0.1)
    assert parse_source(serialize_source(src)) == src
    with pytest.raises(ChannelError):
        parse_source("symbol a 0.5\nsymbol b 0.4\n")
    with pytest.raises(ChannelError):
        parse_source("symbol a 1.0\nsymbol b 0\n")
    assert SourceSpec.uniform(4).entropy == pytest.approx(2.0)


def test_split_parallel_smallest_case():
    g = split_parallel_edges(["a"], [("a", "a", 1), ("a", "a", 2)])
    assert g.n == 2
    a, x = 0, 1
    assert g.cost(a, a) == 1 and g.cost(a, x) == 2 and g.cost(x, a) == 0
    assert set((i, j) for i, j, _ in g.edges) == {(a, a), (a, x), (x, a)}


def test_split_simple_graph_unchanged(flash):
    g = split_parallel_edges(flash.vertices, [(flash.vertices[i], flash.vertices[j], c) for i, j, c in flash.edges])
    assert g.vertices == flash.vertices and g.edges == flash.edges


def _multigraph_counts(vertices, edges, v0, W):
    # walks over labelled multigraph edges, ending at original vertices
    memo = {}

    def rec(v, w):
        if w < 0:
            return 0
        if (v, w) not in memo:
            memo[(v, w)] = (1 if w == 0 else 0) + sum(rec(b, w - c) for a, b, c in edges if a == v)
        return memo[(v, w)]

    return rec(v0, W)


@pytest.mark.parametrize("edges", [
    [("a", "a", 1), ("a", "a", 2)],
    [("a", "b", 1), ("a", "b", 2), ("b", "a", 1), ("b", "b", 3), ("b", "b", 1)],
    [("a", "b", 2), ("b", "a", 1), ("b", "a", 1), ("a", "a", 3)],
])
def test_split_preserves_cost_counts(edges):
    vs = sorted({e[0] for e in edges} | {e[1] for e in edges})
    g = split_parallel_edges(vs, edges)
    orig = [g.index(v) for v in vs]
    for v in vs:
        for W in range(9):
            # count walks ending at an original vertex: total minus those ending on a split vertex
            total = count_paths_exact_cost(g, W, g.index(v))
            inner = sum(count_paths_exact_cost(g, W, g.index(v), end=k) for k in range(g.n) if k not in orig)
            assert total - inner == _multigraph_counts(vs, edges, v, W)


def test_classify_k2(k2):
    cls = classify_cost_structure(k2)
    assert cls.is_uniform and cls.alpha == -1
    assert cls.potentials == (0.0, 0.0)


def test_classify_two_cycle():
    g = CostGraph.from_named_edges(["a", "b"], [("a", "b", 2), ("b", "a", 0)])
    cls = classify_cost_structure(g)
    assert cls.is_uniform and cls.alpha == pytest.approx(-1.0)


def test_classify_flash_witness(flash):
    cls = classify_cost_structure(flash)
    assert cls.tag == "diverse"
    assert cls.witness == ((0, 0, 0, 0), (0, 1, 2, 0))
    assert cls.witness_costs == (3.0, 8.0)
    a, b = cls.witness
    assert flash.path_cost(a) == 3 and flash.path_cost(b) == 8


def _exhaustive_witness_length(g, max_len):
    # shortest length at which two same-endpoint walks differ in cost
    for n in range(1, max_len + 1):
        for v in range(g.n):
            costs = {}
            for w in walks([g.successors(i) for i in range(g.n)], v, n):
                costs.setdefault(w[-1], set()).add(round(g.path_cost(w), 9))
            if any(len(c) > 1 for c in costs.values()):
                return n
    return None


@settings(max_examples=60, deadline=None)
@given(cost_graphs(max_n=4, integer=True))
def test_classify_agrees_with_enumeration(g):
    cls = classify_cost_structure(g)
    n_witness = _exhaustive_witness_length(g, 7)
    if cls.is_uniform:
        assert n_witness is None
    else:
        a, b = cls.witness
        assert len(a) == len(b) and a[0] == b[0] and a[-1] == b[-1]
        assert g.path_cost(a) != g.path_cost(b)
        # the witness is a shortest one
        L = len(a) - 1
        assert n_witness == (L if L <= 7 else None)


@settings(max_examples=60, deadline=None)
@given(cost_graphs(max_n=5), st.integers(0, 2 ** 32 - 1))
def test_uniform_cycle_means_equal_alpha(g, seed):
    cls = classify_cost_structure(g)
    if not cls.is_uniform:
        return
    rng = np.random.default_rng(seed)
    for _ in range(10):
        cyc = random_cycle(g, rng)
        assert abs(g.path_cost(cyc) / (len(cyc) - 1) + cls.alpha) <= 1e-9


@given(cost_graphs(max_n=5))
def test_cycle_mean_bounds(g):
    lo, hi = min_cycle_mean(g), max_cycle_mean(g)
    mc = min(c for _, _, c in g.edges)
    assert lo <= hi + 1e-12
    assert lo >= mc - 1e-12
    assert hi <= max(c for _, _, c in g.edges) + 1e-12


def test_min_cycle_mean_flash(flash):
    assert min_cycle_mean(flash) == 1.0
    assert max_cycle_mean(flash) == 4.0


def test_zero_cost_cycles(flash, plastic):
    assert not has_zero_cost_cycle(flash)
    g = CostGraph.from_named_edges(["a", "b", "c"], [("a", "b", 0), ("b", "a", 0), ("b", "c", 1), ("c", "a", 2)])
    assert has_zero_cost_cycle(g)
    mp = modified_costs(plastic, "star")
    assert abs(mp.weights[1, 0]) < 1e-12
    assert not has_zero_cost_cycle(mp.graph())


def test_with_costs_clips_tiny_negatives(plastic):
    w = plastic.weights.copy()
    w[1, 0] = -1e-17
    assert plastic.with_costs(w).cost(1, 0) == 0.0


def test_named_lookup_errors(flash):
    with pytest.raises(ChannelError):
        flash.index("22")
    with pytest.raises(KeyError):
        flash.cost(0, 2)
    assert list(itertools.islice(flash.successors(0), 2)) == [0, 1]
