"""Finite-state costly channels: the cost graph, the i.i.d. source, and
structural classification (cost-uniform vs cost-diverse, zero-cost cycles).

Channel file format (UTF-8 text)::

    # comment
    vertex 00
    vertex 01
    start 00            # optional; defaults to the first vertex
    edge 00 01 2

Source file format::

    symbol 0 0.9
    symbol 1 0.1
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

UNIFORM_TOL = 1e-9


class ChannelError(ValueError):
    """Invalid channel or source description."""

    def __init__(self, msg: str, lineno: Optional[int] = None):
        self.lineno = lineno
        if lineno is not None:
            msg = f"line {lineno}: {msg}"
        super().__init__(msg)


class NotStronglyConnected(ChannelError):
    pass


def _check_name(name: str, lineno: Optional[int] = None) -> None:
    if not name or any(ch.isspace() for ch in name) or ">" in name or "#" in name:
        raise ChannelError(f"invalid vertex name {name!r}", lineno)


def format_cost(c: float) -> str:
    """Shortest text that parses back to exactly ``c``."""
    if float(c).is_integer():
        return str(int(c))
    return repr(float(c))


@dataclass(frozen=True, eq=False)
class CostGraph:
    """Irreducible directed graph with at most one nonnegative-cost edge per
    ordered vertex pair.  Vertices are referred to by index internally."""

    vertices: tuple[str, ...]
    edges: tuple[tuple[int, int, float], ...]
    start: int = 0
    _weights: np.ndarray = field(init=False, repr=False)
    _succ: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.vertices)
        if n == 0:
            raise ChannelError("channel has no vertices")
        if len(set(self.vertices)) != n:
            raise ChannelError("duplicate vertex name")
        for v in self.vertices:
            _check_name(v)
        if not 0 <= self.start < n:
            raise ChannelError("start vertex out of range")
        w = np.full((n, n), np.nan)
        for i, j, c in self.edges:
            if not (0 <= i < n and 0 <= j < n):
                raise ChannelError(f"edge ({i}, {j}) references unknown vertex")
            if not math.isfinite(c) or c < 0:
                raise ChannelError(f"edge {self.vertices[i]}->{self.vertices[j]} has invalid cost {c}")
            if not np.isnan(w[i, j]):
                raise ChannelError(f"duplicate edge {self.vertices[i]}->{self.vertices[j]}")
            w[i, j] = c
        w.setflags(write=False)
        edges = tuple(sorted((int(i), int(j), float(c)) for i, j, c in self.edges))
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_weights", w)
        object.__setattr__(
            self, "_succ", tuple(tuple(int(j) for j in np.flatnonzero(~np.isnan(w[i]))) for i in range(n))
        )
        if not is_strongly_connected(self._succ):
            raise NotStronglyConnected("channel graph is not strongly connected")

    @classmethod
    def from_named_edges(cls, vertices: Sequence[str], edges: Iterable[tuple[str, str, float]],
                         start: Optional[str] = None) -> "CostGraph":
        index = {v: k for k, v in enumerate(vertices)}
        try:
            e = tuple((index[a], index[b], float(c)) for a, b, c in edges)
        except KeyError as exc:
            raise ChannelError(f"unknown vertex {exc.args[0]!r}") from None
        s = 0 if start is None else index[start]
        return cls(tuple(vertices), e, s)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def weights(self) -> np.ndarray:
        """n x n cost matrix, NaN where there is no edge."""
        return self._weights

    @property
    def adjacency(self) -> np.ndarray:
        return ~np.isnan(self._weights)

    def successors(self, i: int) -> tuple[int, ...]:
        return self._succ[i]

    def cost(self, i: int, j: int) -> float:
        c = self._weights[i, j]
        if np.isnan(c):
            raise KeyError(f"no edge {self.vertices[i]}->{self.vertices[j]}")
        return float(c)

    def has_edge(self, i: int, j: int) -> bool:
        return not np.isnan(self._weights[i, j])

    def index(self, name: str) -> int:
        try:
            return self.vertices.index(name)
        except ValueError:
            raise ChannelError(f"unknown vertex {name!r}") from None

    def edge_name(self, i: int, j: int) -> str:
        return f"{self.vertices[i]}>{self.vertices[j]}"

    @property
    def is_integer(self) -> bool:
        """True when every cost is an integer (enables exact path-count oracles)."""
        return all(float(c).is_integer() for _, _, c in self.edges)

    def with_costs(self, weights: np.ndarray) -> "CostGraph":
        """Same topology and start vertex, new costs (tiny negatives clipped to 0)."""
        e = tuple((i, j, max(0.0, float(weights[i, j]))) for i, j, _ in self.edges)
        return CostGraph(self.vertices, e, self.start)

    def path_cost(self, path: Sequence[int], weights: Optional[np.ndarray] = None) -> float:
        """Cost of a vertex sequence ``path`` (root first)."""
        w = self._weights if weights is None else weights
        return float(sum(w[a, b] for a, b in zip(path, path[1:])))


def is_strongly_connected(succ: Sequence[Sequence[int]]) -> bool:
    n = len(succ)
    if any(len(s) == 0 for s in succ):
        return False
    pred: list[list[int]] = [[] for _ in range(n)]
    for i, s in enumerate(succ):
        for j in s:
            pred[j].append(i)
    for adj in (succ, pred):
        seen = {0}
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        if len(seen) != n:
            return False
    return True


def _strip(line: str) -> list[str]:
    return line.split("#", 1)[0].split()


def parse_channel(text: str) -> CostGraph:
    vertices: list[str] = []
    edges: list[tuple[int, int, float]] = []
    seen_pairs: set[tuple[int, int]] = set()
    start: Optional[str] = None
    index: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        tok = _strip(line)
        if not tok:
            continue
        kw = tok[0]
        if kw == "vertex" and len(tok) == 2:
            _check_name(tok[1], lineno)
            if tok[1] in index:
                raise ChannelError(f"duplicate vertex {tok[1]!r}", lineno)
            index[tok[1]] = len(vertices)
            vertices.append(tok[1])
        elif kw == "start" and len(tok) == 2:
            if start is not None:
                raise ChannelError("multiple start lines", lineno)
            start = tok[1]
        elif kw == "edge" and len(tok) == 4:
            a, b = tok[1], tok[2]
            for v in (a, b):
                if v not in index:
                    raise ChannelError(f"unknown vertex {v!r}", lineno)
            try:
                c = float(tok[3])
            except ValueError:
                raise ChannelError(f"bad cost {tok[3]!r}", lineno) from None
            if not math.isfinite(c) or c < 0:
                raise ChannelError(f"negative or non-finite cost {tok[3]}", lineno)
            pair = (index[a], index[b])
            if pair in seen_pairs:
                raise ChannelError(f"duplicate edge {a}->{b}", lineno)
            seen_pairs.add(pair)
            edges.append((pair[0], pair[1], c))
        else:
            raise ChannelError(f"syntax error: {line.strip()!r}", lineno)
    if start is not None and start not in index:
        raise ChannelError(f"unknown start vertex {start!r}")
    return CostGraph(tuple(vertices), tuple(edges), 0 if start is None else index[start])


def serialize_channel(g: CostGraph) -> str:
    lines = [f"vertex {v}" for v in g.vertices]
    if g.start != 0:
        lines.append(f"start {g.vertices[g.start]}")
    lines += [f"edge {g.vertices[i]} {g.vertices[j]} {format_cost(c)}" for i, j, c in g.edges]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SourceSpec:
    """i.i.d. source; probabilities must be in non-increasing order."""

    symbols: tuple[str, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.symbols) != len(self.probs) or not self.symbols:
            raise ChannelError("source needs one probability per symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ChannelError("duplicate source symbol")
        if any(p <= 0 for p in self.probs):
            raise ChannelError("source probabilities must be positive")
        if abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise ChannelError(f"source probabilities sum to {math.fsum(self.probs)!r}, not 1")
        if any(a < b for a, b in zip(self.probs, self.probs[1:])):
            raise ChannelError("source probabilities must be non-increasing")

    @classmethod
    def uniform(cls, size: int) -> "SourceSpec":
        return cls(tuple(str(k) for k in range(size)), tuple([1.0 / size] * size))

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def entropy(self) -> float:
        return -math.fsum(p * math.log2(p) for p in self.probs)

    @property
    def is_uniform(self) -> bool:
        return all(p == self.probs[0] for p in self.probs)

    def index(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise ChannelError(f"unknown source symbol {symbol!r}") from None


def parse_source(text: str) -> SourceSpec:
    """Parse a source file; symbols are re-ordered by descending probability."""
    items: list[tuple[str, float]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        tok = _strip(line)
        if not tok:
            continue
        if tok[0] != "symbol" or len(tok) != 3:
            raise ChannelError(f"syntax error: {line.strip()!r}", lineno)
        try:
            p = float(tok[2])
        except ValueError:
            raise ChannelError(f"bad probability {tok[2]!r}", lineno) from None
        items.append((tok[1], p))
    items.sort(key=lambda t: -t[1])
    return SourceSpec(tuple(s for s, _ in items), tuple(p for _, p in items))


def serialize_source(src: SourceSpec) -> str:
    return "".join(f"symbol {s} {p!r}\n" for s, p in zip(src.symbols, src.probs))


def split_parallel_edges(vertices: Sequence[str], edges: Iterable[tuple[str, str, float]],
                         start: Optional[str] = None) -> CostGraph:
    """Turn a multigraph into a simple graph.

    Each parallel edge u->v beyond the first is replaced by u->x (same cost)
    and x->v (cost 0) through a fresh vertex x, so the path-cost multiset
    between original vertices is preserved; split edges have length 2.
    """
    names = list(vertices)
    taken = set(names)
    out: list[tuple[str, str, float]] = []
    seen: dict[tuple[str, str], int] = {}
    for a, b, c in edges:
        k = seen.get((a, b), 0)
        seen[(a, b)] = k + 1
        if k == 0:
            out.append((a, b, c))
            continue
        x = f"{a}~{b}~{k}"
        while x in taken:
            x += "'"
        taken.add(x)
        names.append(x)
        out.append((a, x, c))
        out.append((x, b, 0.0))
    return CostGraph.from_named_edges(names, out, start)


def min_cycle_mean(g: CostGraph, weights: Optional[np.ndarray] = None) -> float:
    """Karp's minimum mean cycle weight (graph is strongly connected)."""
    w = g.weights if weights is None else weights
    n = g.n
    w = np.where(np.isnan(w), np.inf, w)
    d = np.full((n + 1, n), np.inf)
    d[0, 0] = 0.0
    for k in range(1, n + 1):
        # d[k, v] = min_u d[k-1, u] + w[u, v]
        d[k] = np.min(d[k - 1][:, None] + w, axis=0)
    best = np.inf
    for v in range(n):
        if not np.isfinite(d[n, v]):
            continue
        worst = -np.inf
        for k in range(n):
            if np.isfinite(d[k, v]):
                worst = max(worst, (d[n, v] - d[k, v]) / (n - k))
        best = min(best, worst)
    return float(best)


def max_cycle_mean(g: CostGraph) -> float:
    return -min_cycle_mean(g, -g.weights)


@dataclass(frozen=True)
class CostClass:
    """``tag`` is "uniform" or "diverse".

    Uniform: every edge obeys w(i, j) = -mu[i] + mu[j] - alpha.
    Diverse: ``witness`` holds two equal-length vertex paths with the same
    endpoints and different costs, with their costs.
    """

    tag: str
    potentials: Optional[tuple[float, ...]] = None
    alpha: Optional[float] = None
    witness: Optional[tuple[tuple[int, ...], tuple[int, ...]]] = None
    witness_costs: Optional[tuple[float, float]] = None

    @property
    def is_uniform(self) -> bool:
        return self.tag == "uniform"


def _diverse_witness(g: CostGraph):
    # min/max-plus DP over walks of exact length; first length with a gap wins.
    n = g.n
    w = g.weights
    max_len = n * n + 2 * n + 1
    lo = np.full((n, n), np.inf)
    hi = np.full((n, n), -np.inf)
    np.fill_diagonal(lo, 0.0)
    np.fill_diagonal(hi, 0.0)
    back_lo, back_hi = [], []
    wi = np.where(np.isnan(w), np.inf, w)
    wx = np.where(np.isnan(w), -np.inf, w)
    for length in range(1, max_len + 1):
        # cand[s, u, v] = lo[s, u] + w[u, v]
        cand_lo = lo[:, :, None] + wi[None, :, :]
        cand_hi = hi[:, :, None] + wx[None, :, :]
        arg_lo = np.argmin(cand_lo, axis=1)
        arg_hi = np.argmax(cand_hi, axis=1)
        lo = np.take_along_axis(cand_lo, arg_lo[:, None, :], axis=1)[:, 0, :]
        hi = np.take_along_axis(cand_hi, arg_hi[:, None, :], axis=1)[:, 0, :]
        back_lo.append(arg_lo)
        back_hi.append(arg_hi)
        gap = np.isfinite(lo) & (hi - lo > UNIFORM_TOL)
        if gap.any():
            s, t = (int(x) for x in np.argwhere(gap)[0])

            def trace(back):
                path = [t]
                for b in reversed(back):
                    path.append(int(b[s, path[-1]]))
                return tuple(reversed(path))

            a, b = trace(back_lo), trace(back_hi)
            return (a, b), (float(lo[s, t]), float(hi[s, t]))
    return None


def classify_cost_structure(g: CostGraph) -> CostClass:
    mn, mx = min_cycle_mean(g), max_cycle_mean(g)
    if mx - mn > UNIFORM_TOL:
        found = _diverse_witness(g)
        assert found is not None, "unequal cycle means must yield a witness"
        return CostClass("diverse", witness=found[0], witness_costs=found[1])
    alpha = -mn
    mu = [math.nan] * g.n
    mu[0] = 0.0
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in g.successors(i):
            if math.isnan(mu[j]):
                mu[j] = mu[i] + g.cost(i, j) + alpha
                queue.append(j)
    for i, j, c in g.edges:
        if abs(-mu[i] + mu[j] - alpha - c) > UNIFORM_TOL * max(1.0, abs(c)):
            raise ArithmeticError("potential equation violated on a cost-uniform graph")
    return CostClass("uniform", potentials=tuple(mu), alpha=alpha)


def has_zero_cost_cycle(g: CostGraph, tol: float = 1e-12) -> bool:
    """True iff the subgraph of (near) zero-cost edges contains a cycle."""
    n = g.n
    zero = [[j for j in g.successors(i) if g.cost(i, j) <= tol] for i in range(n)]
    indeg = [0] * n
    for i in range(n):
        for j in zero[i]:
            indeg[j] += 1
    queue = deque(i for i in range(n) if indeg[i] == 0)
    removed = 0
    while queue:
        i = queue.popleft()
        removed += 1
        for j in zero[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                queue.append(j)
    return removed < n


FLASH_CHANNEL = """\
# SLC flash channel with inter-cell interference.
# Vertex = last two written bits; edge abc costs the damage to bit b.
vertex 00
vertex 01
vertex 10
vertex 11
edge 00 00 1
edge 00 01 2
edge 01 10 4
edge 01 11 4
edge 10 00 2
edge 10 01 3
edge 11 10 4
edge 11 11 4
"""

K2_CHANNEL = """\
# complete two-state graph, unit costs
vertex a
vertex b
edge a a 1
edge a b 1
edge b a 1
edge b b 1
"""

PLASTIC_CHANNEL = """\
# lambda(S) = 1 reduces to x^3 + x = 1 with x = 2^-S
vertex a
vertex b
edge a a 1
edge a b 2
edge b a 1
"""

BUILTIN_CHANNELS = {"flash": FLASH_CHANNEL, "k2": K2_CHANNEL, "plastic": PLASTIC_CHANNEL}


def builtin_channel(name: str) -> CostGraph:
    return parse_channel(BUILTIN_CHANNELS[name])


def debruijn_label(g: CostGraph, i: int, j: int) -> str:
    """flash-style edge label: '00'->'01' becomes '001'; falls back to 'a>b'."""
    a, b = g.vertices[i], g.vertices[j]
    if len(a) == len(b) and len(a) >= 1 and a[1:] == b[:-1]:
        return a + b[-1]
    return g.edge_name(i, j)
