"""Brute-force ground truth: exact path counts and exhaustive code search."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .channel_model import CostGraph, SourceSpec, has_zero_cost_cycle
from .code_analysis import V0NotInIrreducibleComponent, analyze
from .errors import ZeroCostCycleError
from .varn_codec import ShapingCode

MAX_N = 60
MAX_W = 10 ** 4
MAX_DENOM = 10 ** 6
MAX_CODEBOOKS = 10 ** 7


class CostNotRational(ValueError):
    pass


class CostNotInteger(ValueError):
    pass


class NTooLarge(ValueError):
    pass


class SearchSpaceTooLarge(ValueError):
    pass


def integer_costs(g: CostGraph) -> tuple[dict[tuple[int, int], int], int]:
    """Edge costs scaled to integers by the LCM of their denominators."""
    fr = {}
    for i, j, c in g.edges:
        f = Fraction(c).limit_denominator(MAX_DENOM)
        if abs(float(f) - c) > 1e-12 * max(1.0, c):
            raise CostNotRational(f"cost {c!r} is not a rational with denominator <= {MAX_DENOM}")
        fr[(i, j)] = f
    scale = 1
    for f in fr.values():
        scale = math.lcm(scale, f.denominator)
        if scale > MAX_DENOM:
            raise CostNotRational("common cost denominator exceeds 10^6")
    return {e: int(f * scale) for e, f in fr.items()}, scale


def count_paths_avg_cost(g: CostGraph, n: int, W: float, v0: Optional[int] = None,
                         end: Optional[int] = None) -> int:
    """Number of length-n edge sequences from v0 with total cost <= n W."""
    if n > MAX_N:
        raise NTooLarge(f"n={n} exceeds {MAX_N}")
    v0 = g.start if v0 is None else v0
    icost, scale = integer_costs(g)
    budget = math.floor(Fraction(W).limit_denominator(MAX_DENOM) * n * scale)
    if budget < 0:
        return 0
    # cnt[v][c]: sequences so far ending at v with integer cost c
    cnt = [[0] * (budget + 1) for _ in range(g.n)]
    cnt[v0][0] = 1
    for _ in range(n):
        nxt = [[0] * (budget + 1) for _ in range(g.n)]
        for (i, j), w in icost.items():
            src, dst = cnt[i], nxt[j]
            for c in range(budget + 1 - w):
                if src[c]:
                    dst[c + w] += src[c]
        cnt = nxt
    rows = cnt if end is None else [cnt[end]]
    return sum(sum(r) for r in rows)


def count_paths_exact_cost(g: CostGraph, W: int, v0: Optional[int] = None,
                           end: Optional[int] = None) -> int:
    """Number of edge sequences (any length) from v0 with total cost exactly W,
    ending anywhere or, if given, at ``end``.  The empty sequence counts at W = 0."""
    if not g.is_integer:
        raise CostNotInteger("exact-cost counting needs integer costs")
    if has_zero_cost_cycle(g, tol=0.0):
        raise ZeroCostCycleError("infinitely many zero-cost sequences")
    if W > MAX_W:
        raise NTooLarge(f"W={W} exceeds {MAX_W}")
    if W < 0:
        return 0
    v0 = g.start if v0 is None else v0
    n = g.n
    # order vertices so zero-cost successors are finished first
    zero = {i: [j for j in g.successors(i) if g.cost(i, j) == 0] for i in range(n)}
    order: list[int] = []
    mark: dict[int, int] = {}

    def visit(u):
        mark[u] = 1
        for v in zero[u]:
            if v not in mark:
                visit(v)
        order.append(u)

    for u in range(n):
        if u not in mark:
            visit(u)
    # N[c][v]: sequences starting at v with cost exactly c
    N = [[0] * n for _ in range(W + 1)]
    for c in range(W + 1):
        row = N[c]
        for v in order:
            total = 1 if c == 0 and (end is None or v == end) else 0
            for u in g.successors(v):
                w = int(g.cost(v, u))
                if w <= c:
                    total += N[c - w][u] if w else row[u]
            row[v] = total
    return N[W][v0]


def rate_avg_cost(g: CostGraph, n: int, W: float, v0: Optional[int] = None) -> float:
    k = count_paths_avg_cost(g, n, W, v0)
    return math.log2(k) / n if k else -math.inf


def rate_exact_cost(g: CostGraph, W: int, v0: Optional[int] = None) -> float:
    k = count_paths_exact_cost(g, W, v0)
    return math.log2(k) / W if k else -math.inf


def enumerate_paths(g: CostGraph, v0: int, max_len: int):
    """All vertex paths from v0 with 1..max_len edges (brute force)."""
    out = []
    frontier = [(v0,)]
    for _ in range(max_len):
        frontier = [p + (j,) for p in frontier for j in g.successors(p[-1])]
        out.extend(frontier)
    return out


def _antichain_count(g: CostGraph, path, depth: int, size: int) -> list[int]:
    # coefficient list: number of prefix-free sets strictly below `path` by size
    poly = [1] + [0] * size
    if depth == 0:
        return poly
    for j in g.successors(path[-1]):
        child = _antichain_count(g, path + (j,), depth - 1, size)
        child[1] += 1
        new = [0] * (size + 1)
        for a, ca in enumerate(poly):
            if ca:
                for b, cb in enumerate(child[: size + 1 - a]):
                    new[a + b] += ca * cb
        poly = new
    return poly


def _antichains(g: CostGraph, path, depth: int, size: int):
    """Yield prefix-free path sets of exactly ``size`` strictly below ``path``."""
    if size == 0:
        yield ()
        return
    if depth == 0:
        return
    succ = g.successors(path[-1])

    def rec(k, need):
        if k == len(succ):
            if need == 0:
                yield ()
            return
        child = path + (succ[k],)
        yield from rec(k + 1, need)
        if need >= 1:
            for rest in rec(k + 1, need - 1):
                yield (child,) + rest
        for m in range(1, need + 1):
            for below in _antichains(g, child, depth - 1, m):
                for rest in rec(k + 1, need - m):
                    yield below + rest

    yield from rec(0, size)


@dataclass(frozen=True, eq=False)
class SearchResult:
    T: float  # least total cost per source symbol found
    code: ShapingCode
    n_candidates: int


def exhaustive_small_code_search(g: CostGraph, q: int, max_depth: int, alphabet_size: int = 2,
                                 v0: Optional[int] = None, limit: int = MAX_CODEBOOKS) -> SearchResult:
    """Minimum total cost (under g's costs, uniform source) over every code
    whose subcodebooks are prefix-free sets of alphabet_size^q paths of length
    <= max_depth.  Codes whose start state is transient are skipped."""
    N = alphabet_size ** q
    counts = [_antichain_count(g, (k,), max_depth, N)[N] for k in range(g.n)]
    total = math.prod(counts)
    if total > limit:
        raise SearchSpaceTooLarge(f"{total} candidate codebooks exceed the limit {limit}")
    if total == 0:
        raise ValueError("no prefix-free codebook of that size fits the depth limit")
    src = SourceSpec.uniform(alphabet_size)
    books = [list(_antichains(g, (k,), max_depth, N)) for k in range(g.n)]
    best = None
    for combo in itertools.product(*books):
        code = ShapingCode(g, q, alphabet_size, tuple(tuple(sorted(b)) for b in combo))
        try:
            T = analyze(code, src, v0).T
        except V0NotInIrreducibleComponent:
            continue
        if best is None or T < best[0] - 1e-15:
            best = (T, code)
    if best is None:
        raise ValueError("every candidate code leaves the start state transient")
    return SearchResult(best[0], best[1], total)
