import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shapingcodes.channel_model import CostGraph, SourceSpec
from shapingcodes.code_analysis import analyze
from shapingcodes.errors import ZeroCostCycleError
from shapingcodes.oracle import (CostNotInteger, CostNotRational, NTooLarge, SearchSpaceTooLarge,
                                 _antichain_count, _antichains, count_paths_avg_cost, count_paths_exact_cost,
                                 enumerate_paths, exhaustive_small_code_search, integer_costs, rate_avg_cost,
                                 rate_exact_cost)
from shapingcodes.shaping_theory import modified_costs
from shapingcodes.spectral import solve_S_for_W, solve_S_star
from shapingcodes.varn_codec import build_varn, varn_upper_bound

from conftest import cost_graphs
from oracles import brute_exact_count, prefix_free, walks


def _succ(g):
    return [g.successors(i) for i in range(g.n)]


def test_avg_cost_examples(k2, flash):
    for n in (1, 5, 12):
        assert count_paths_avg_cost(k2, n, 1.0) == 2 ** n
    assert count_paths_avg_cost(flash, 3, 2.0, 0) == 2
    assert count_paths_avg_cost(flash, 4, 0.5) == 0


@settings(max_examples=40, deadline=None)
@given(cost_graphs(max_n=4, integer=True), st.integers(1, 6), st.floats(0.5, 4.0))
def test_avg_cost_matches_enumeration(g, n, W):
    ref = sum(1 for w in walks(_succ(g), 0, n) if g.path_cost(w) <= n * W + 1e-9)
    assert count_paths_avg_cost(g, n, W, 0) == ref


def test_avg_cost_rational_costs():
    g = CostGraph.from_named_edges(["a", "b"], [("a", "a", 0.5), ("a", "b", 1.25), ("b", "a", 0.75)])
    icost, scale = integer_costs(g)
    assert scale == 4 and icost[(0, 1)] == 5
    ref = sum(1 for w in walks(_succ(g), 0, 6) if g.path_cost(w) <= 6 * 0.7 + 1e-12)
    assert count_paths_avg_cost(g, 6, 0.7) == ref
    bad = CostGraph.from_named_edges(["a"], [("a", "a", 0.123456789123)])
    with pytest.raises(CostNotRational):
        count_paths_avg_cost(bad, 3, 4.0)
    with pytest.raises(NTooLarge):
        count_paths_avg_cost(g, 61, 1.0)


def test_exact_cost_examples(k2, plastic):
    for W in range(10):
        assert count_paths_exact_cost(k2, W) == 2 ** W
    seq = [count_paths_exact_cost(plastic, W, 0, end=0) for W in range(9)]
    assert seq == [1, 1, 1, 2, 3, 4, 6, 9, 13]
    assert all(seq[W] == seq[W - 1] + seq[W - 3] for W in range(3, 9))
    assert count_paths_exact_cost(plastic, -1) == 0


@settings(max_examples=40, deadline=None)
@given(cost_graphs(max_n=4, integer=True), st.integers(0, 9))
def test_exact_cost_matches_recursion(g, W):
    cost = {(i, j): int(c) for i, j, c in g.edges}
    assert count_paths_exact_cost(g, W, 0) == brute_exact_count(_succ(g), cost, 0, W)


def test_exact_cost_zero_edges_acyclic():
    g = CostGraph.from_named_edges(["a", "b"], [("a", "b", 0), ("b", "a", 1), ("b", "b", 2)])
    cost = {(0, 1): 0, (1, 0): 1, (1, 1): 2}
    for W in range(8):
        assert count_paths_exact_cost(g, W, 0) == brute_exact_count(_succ(g), cost, 0, W)


def test_exact_cost_errors(flash):
    g = CostGraph.from_named_edges(["a", "b"], [("a", "b", 0), ("b", "a", 0)])
    with pytest.raises(ZeroCostCycleError):
        count_paths_exact_cost(g, 3)
    with pytest.raises(CostNotInteger):
        count_paths_exact_cost(CostGraph.from_named_edges(["a"], [("a", "a", 1.5)]), 3)
    with pytest.raises(NTooLarge):
        count_paths_exact_cost(flash, 10 ** 5)


def test_exact_rate_converges_upward(plastic):
    S = solve_S_star(plastic)
    rates = [rate_exact_cost(plastic, W) for W in (50, 100, 200)]
    assert all(a <= b + 0.01 for a, b in zip(rates, rates[1:]))
    assert abs(rates[-1] - S) < 0.02


def test_avg_rate_near_capacity(flash):
    W = 2.75
    _, C = solve_S_for_W(flash, W)
    assert abs(rate_avg_cost(flash, 40, W) - C) < 0.05
    gaps = [C - rate_avg_cost(flash, n, W) for n in (10, 20, 40)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


def test_enumerate_paths(flash):
    paths = enumerate_paths(flash, 0, 3)
    assert len(paths) == 2 + 4 + 8
    assert len(set(paths)) == len(paths)


@pytest.mark.parametrize("depth, size", [(2, 2), (3, 2), (3, 3), (3, 4)])
def test_antichain_generator_matches_count(flash, depth, size):
    sets = list(_antichains(flash, (0,), depth, size))
    assert len(sets) == _antichain_count(flash, (0,), depth, size)[size]
    assert len(set(map(frozenset, sets))) == len(sets)
    for s in sets:
        assert len(s) == size and prefix_free(s)
    # brute force over subsets of the tree
    nodes = enumerate_paths(flash, 0, depth)
    ref = sum(1 for c in itertools.combinations(nodes, size) if prefix_free(c))
    assert ref == len(sets)


def _search_vs_varn(g, q, depth):
    mc = modified_costs(g, "star")
    res = exhaustive_small_code_search(mc.graph(), q, depth)
    varn = build_varn(mc, q, 2)
    T_varn = analyze(varn, SourceSpec.uniform(2), weights=mc.weights).T
    return mc, res, varn, T_varn


@pytest.mark.parametrize("name, q, depth", [("k2", 1, 2), ("plastic", 1, 3), ("plastic", 2, 4), ("flash", 1, 2)])
def test_search_respects_bounds(name, q, depth, request):
    g = request.getfixturevalue(name)
    mc, res, varn, T_varn = _search_vs_varn(g, q, depth)
    # total-cost floor on the modified channel is log2|X| = 1
    assert res.T >= 1.0 - 1e-12
    slack = varn_upper_bound(varn, mc) - 1.0
    assert T_varn - res.T <= slack + 1e-12
    if name == "k2":
        assert res.T == pytest.approx(T_varn, abs=1e-12)
    else:
        assert res.T <= T_varn + 1e-12


def test_search_guard(flash):
    mc = modified_costs(flash, "star")
    with pytest.raises(SearchSpaceTooLarge):
        exhaustive_small_code_search(mc.graph(), 1, 3)
