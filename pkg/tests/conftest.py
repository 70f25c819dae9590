import sys

import numpy as np
import pytest
from hypothesis import assume
from hypothesis import strategies as st

from shapingcodes.channel_model import CostGraph, builtin_channel, classify_cost_structure
from shapingcodes.shaping_theory import modified_costs
from shapingcodes.varn_codec import ShapingCode, build_varn


@pytest.fixture(scope="session")
def flash():
    return builtin_channel("flash")


@pytest.fixture(scope="session")
def k2():
    return builtin_channel("k2")


@pytest.fixture(scope="session")
def plastic():
    return builtin_channel("plastic")


@pytest.fixture(scope="session")
def flash_mc(flash):
    return modified_costs(flash, "star")


@pytest.fixture(scope="session")
def flash_varn(flash_mc):
    return {q: build_varn(flash_mc, q, 2) for q in (1, 2, 4, 8)}


def k2_identity_code(g):
    # q=1: symbol 0 -> edge to a, symbol 1 -> edge to b
    return ShapingCode(g, 1, 2, (((0, 0), (0, 1)), ((1, 0), (1, 1))))


@st.composite
def cost_graphs(draw, max_n=5, integer=False, min_cost=0.25):
    """Strongly connected graphs: a Hamiltonian cycle plus random extra edges."""
    n = draw(st.integers(1, max_n))
    perm = draw(st.permutations(range(n)))
    pairs = {(perm[k], perm[(k + 1) % n]) for k in range(n)}
    extra = draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=2 * n))
    pairs |= extra
    cost = st.integers(1, 5) if integer else st.floats(min_cost, 5.0, allow_nan=False)
    edges = tuple((i, j, float(draw(cost))) for i, j in sorted(pairs))
    return CostGraph(tuple(f"v{k}" for k in range(n)), edges)


@st.composite
def diverse_graphs(draw, max_n=4, integer=False):
    """Cost graphs with unequal cycle means (so S* and Varn designs exist)."""
    g = draw(cost_graphs(max_n=max_n, integer=integer))
    assume(not classify_cost_structure(g).is_uniform)
    return g


def random_cycle(g, rng, max_len=12):
    """Random closed walk: walk randomly, cut at the first revisit."""
    v = int(rng.integers(g.n))
    path = [v]
    for _ in range(max_len * 4):
        succ = g.successors(path[-1])
        nxt = int(succ[rng.integers(len(succ))])
        if nxt in path:
            return tuple(path[path.index(nxt):] + [nxt])
        path.append(nxt)
    return None


def edge_arrays(g):
    return np.array([[i, j] for i, j, _ in g.edges])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
