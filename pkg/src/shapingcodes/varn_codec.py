"""Finite-state variable-length shaping codes and the generalized Varn
construction.

A code maps (state, source block) to a path in the channel graph that starts
at the state.  Paths are stored as vertex sequences, root first; the edge
path is the sequence of consecutive pairs.  Source blocks of q symbols over
an alphabet of size k are numbered 0..k^q-1 in lexicographic order (first
symbol most significant).
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .channel_model import ChannelError, CostGraph
from .shaping_theory import ModifiedChannel

TIE_TOL = 1e-12


class PrefixMismatch(ValueError):
    """Path cannot be parsed by the current state's subcodebook."""


class TrailingGarbage(ValueError):
    """Path ends inside a codeword."""


Path = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class CodeTree:
    root: int
    leaves: tuple[tuple[float, Path], ...]
    M: int  # leaf count when expansion stopped, before pruning
    expanded: tuple[float, ...]  # costs of expanded nodes, in order


@dataclass(frozen=True, eq=False)
class ShapingCode:
    """books[k][x] is the vertex path (starting at k) for source block x."""

    graph: CostGraph
    q: int
    alphabet_size: int
    books: tuple[tuple[Path, ...], ...]
    trees: Optional[tuple[CodeTree, ...]] = field(default=None, repr=False)

    def __post_init__(self):
        if self.q < 1 or self.alphabet_size < 2:
            raise ValueError("need q >= 1 and alphabet size >= 2")
        g = self.graph
        if len(self.books) != g.n:
            raise ValueError("one subcodebook per channel vertex required")
        books = tuple(tuple(tuple(int(v) for v in p) for p in book) for book in self.books)
        object.__setattr__(self, "books", books)
        for k, book in enumerate(books):
            if len(book) != self.n_blocks:
                raise ValueError(f"subcodebook {g.vertices[k]} has {len(book)} words, expected {self.n_blocks}")
            for p in book:
                if len(p) < 2 or p[0] != k:
                    raise ValueError(f"codeword {p} does not start at {g.vertices[k]} or is empty")
                for a, b in zip(p, p[1:]):
                    if not g.has_edge(a, b):
                        raise ValueError(f"codeword uses missing edge {g.edge_name(a, b)}")
            if not is_prefix_free(book):
                raise ValueError(f"subcodebook {g.vertices[k]} is not prefix-free")

    @property
    def n_blocks(self) -> int:
        return self.alphabet_size ** self.q

    def end(self, k: int, x: int) -> int:
        return self.books[k][x][-1]

    def length(self, k: int, x: int) -> int:
        return len(self.books[k][x]) - 1

    @property
    def min_length(self) -> int:
        return min(len(p) - 1 for book in self.books for p in book)

    @property
    def length_bound(self) -> int:
        """Smallest L with every codeword length < L."""
        return max(len(p) - 1 for book in self.books for p in book) + 1

    @property
    def leaf_count(self) -> int:
        """Pre-pruning leaf count M (largest over roots); n_blocks if unknown."""
        if self.trees is None:
            return self.n_blocks
        return max(t.M for t in self.trees)

    @cached_property
    def _tries(self):
        tries = []
        for book in self.books:
            root: dict = {}
            for x, p in enumerate(book):
                node = root
                for v in p[1:-1]:
                    node = node.setdefault(v, {})
                node[p[-1]] = x
            tries.append(root)
        return tries

    @cached_property
    def ends(self) -> np.ndarray:
        return np.array([[p[-1] for p in book] for book in self.books], dtype=np.int64)

    def block_index(self, symbols: Sequence[int]) -> int:
        x = 0
        for s in symbols:
            if not 0 <= s < self.alphabet_size:
                raise ValueError(f"unknown source symbol {s!r}")
            x = x * self.alphabet_size + int(s)
        return x

    def block_symbols(self, x: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.q):
            x, r = divmod(x, self.alphabet_size)
            out.append(r)
        return tuple(reversed(out))


def is_prefix_free(paths: Sequence[Path]) -> bool:
    # in sorted order a prefix sits directly before some extension of it
    s = sorted(paths)
    return all(b[: len(a)] != a for a, b in zip(s, s[1:]))


def snap_costs(w: np.ndarray, tol: float = TIE_TOL) -> np.ndarray:
    """Replace edge costs that agree within ``tol`` by one representative.

    Path costs are then exactly rounded sums (math.fsum) of snapped values,
    so paths using the same multiset of edge costs tie exactly and ties are
    broken by path order alone.
    """
    flat = sorted(float(c) for c in w[~np.isnan(w)])
    reps: list[float] = []
    for c in flat:
        if not reps or c - reps[-1] > tol:
            reps.append(c)
    out = w.copy()
    for idx in zip(*np.nonzero(~np.isnan(w))):
        c = float(w[idx])
        out[idx] = min(reps, key=lambda r: abs(r - c))
    return out


def _grow_tree(g: CostGraph, w: np.ndarray, root: int, N: int) -> CodeTree:
    def leaf(path):
        return math.fsum(w[a, b] for a, b in zip(path, path[1:])), path

    heap = [leaf((root, j)) for j in g.successors(root)]
    heapq.heapify(heap)
    expanded = []
    while len(heap) < N:
        cost, path = heapq.heappop(heap)
        expanded.append(cost)
        for j in g.successors(path[-1]):
            heapq.heappush(heap, leaf(path + (j,)))
    M = len(heap)
    # delete the most expensive leaves, lexicographically largest first on ties
    leaves = sorted(heap)[:N]
    return CodeTree(root, tuple(leaves), M, tuple(expanded))


def build_varn(mc: ModifiedChannel, q: int, alphabet_size: int = 2) -> ShapingCode:
    """Generalized Varn code: per root, expand the cheapest leaf under the
    modified costs until there are at least alphabet_size^q leaves, then drop
    the most expensive ones.  Blocks are assigned in (cost, path) order."""
    if alphabet_size < 2 or q < 1:
        raise ValueError("need alphabet_size >= 2 and q >= 1")
    g = mc.base
    N = alphabet_size ** q
    w = snap_costs(mc.weights)
    trees = tuple(_grow_tree(g, w, k, N) for k in range(g.n))
    books = tuple(tuple(p for _, p in t.leaves) for t in trees)
    return ShapingCode(g, q, alphabet_size, books, trees)


def varn_upper_bound(code: ShapingCode, mc: ModifiedChannel) -> float:
    """(log2 M)/q + max w'/q: bound on the modified-channel total cost."""
    return (math.log2(code.leaf_count) + mc.max_cost) / code.q


def hop_diameter(g: CostGraph) -> int:
    best = 0
    for s in range(g.n):
        dist = {s: 0}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in g.successors(u):
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        best = max(best, max(dist.values()))
    return best


def _cheapest_paths(g: CostGraph, w: np.ndarray, src: int) -> dict[int, tuple[float, Path]]:
    best: dict[int, tuple[float, Path]] = {}
    heap = [(0.0, (src,))]
    while heap:
        c, p = heapq.heappop(heap)
        if p[-1] in best:
            continue
        best[p[-1]] = (c, p)
        for j in g.successors(p[-1]):
            if j not in best:
                heapq.heappush(heap, (c + float(w[p[-1], j]), p + (j,)))
    return best


def complete_graph_extension(code: ShapingCode, weights: Optional[np.ndarray] = None) -> ShapingCode:
    """Extend codewords so that from every root every vertex is some
    codeword's end state; afterwards any vertex can be the start state.

    A codeword is only extended when another codeword of the same subcodebook
    shares its end state, so no end state is lost; extension appends the
    cheapest path (under ``weights``, default the channel costs).  Needs
    n_blocks >= number of vertices.
    """
    g = code.graph
    if code.n_blocks < g.n:
        raise ValueError("codebook smaller than the vertex set cannot reach every state")
    w = g.weights if weights is None else weights
    routes = [_cheapest_paths(g, w, s) for s in range(g.n)]
    books = []
    for k, book in enumerate(code.books):
        book = list(book)
        touched: set[int] = set()
        for v in range(g.n):
            ends = [p[-1] for p in book]
            if v in ends:
                continue
            counts = {e: ends.count(e) for e in ends}
            cands = [x for x, p in enumerate(book) if counts[p[-1]] >= 2 and x not in touched]
            # cheapest detour; ties go to the highest block (the costliest word)
            x = min(cands, key=lambda x: (routes[book[x][-1]][v][0], -x))
            book[x] = book[x] + routes[book[x][-1]][v][1][1:]
            touched.add(x)
        books.append(tuple(book))
    return ShapingCode(g, code.q, code.alphabet_size, tuple(books))


def encode(code: ShapingCode, symbols: Sequence[int], v0: Optional[int] = None) -> list[tuple[int, int]]:
    """Edge path for a flat symbol sequence (length a multiple of q)."""
    q = code.q
    if len(symbols) % q:
        raise ValueError(f"symbol count {len(symbols)} is not a multiple of q={q}")
    state = code.graph.start if v0 is None else v0
    out: list[tuple[int, int]] = []
    for i in range(0, len(symbols), q):
        p = code.books[state][code.block_index(symbols[i:i + q])]
        out.extend(zip(p, p[1:]))
        state = p[-1]
    return out


def decode(code: ShapingCode, path: Sequence[tuple[int, int]], v0: Optional[int] = None) -> list[int]:
    """Inverse of :func:`encode` by greedy prefix matching."""
    state = code.graph.start if v0 is None else v0
    tries = code._tries
    node = tries[state]
    at = state
    out: list[int] = []
    for pos, (a, b) in enumerate(path):
        if a != at:
            raise PrefixMismatch(f"edge {pos} starts at {a}, expected {at}")
        nxt = node.get(b) if isinstance(node, dict) else None
        if nxt is None:
            raise PrefixMismatch(f"edge {pos} ({code.graph.edge_name(a, b)}) is not in the codebook of state "
                                 f"{code.graph.vertices[state]}")
        at = b
        if isinstance(nxt, dict):
            node = nxt
        else:
            out.extend(code.block_symbols(nxt))
            state = b
            node = tries[state]
    if node is not tries[state]:
        raise TrailingGarbage("path ends inside a codeword")
    return out


def _block_text(code: ShapingCode, x: int) -> str:
    sym = code.block_symbols(x)
    if code.alphabet_size <= 10:
        return "".join(str(s) for s in sym)
    return ",".join(str(s) for s in sym)


def export_codebook(code: ShapingCode) -> str:
    g = code.graph
    lines = ["# shaping codebook", f"q {code.q}", f"alphabet {code.alphabet_size}"]
    for k, book in enumerate(code.books):
        lines.append(f"codebook {g.vertices[k]}")
        for x, p in enumerate(book):
            lines.append(f"map {_block_text(code, x)} {'>'.join(g.vertices[v] for v in p)} {g.vertices[p[-1]]}")
    return "\n".join(lines) + "\n"


def import_codebook(text: str, g: CostGraph) -> ShapingCode:
    q = alphabet = None
    books: dict[int, dict[int, Path]] = {}
    current = None
    for lineno, line in enumerate(text.splitlines(), 1):
        tok = line.split("#", 1)[0].split()
        if not tok:
            continue
        try:
            if tok[0] == "q" and len(tok) == 2:
                q = int(tok[1])
            elif tok[0] == "alphabet" and len(tok) == 2:
                alphabet = int(tok[1])
            elif tok[0] == "codebook" and len(tok) == 2:
                current = g.index(tok[1])
                books[current] = {}
            elif tok[0] == "map" and len(tok) == 4 and current is not None and q and alphabet:
                sym = tok[1].split(",") if "," in tok[1] or alphabet > 10 else list(tok[1])
                if len(sym) != q:
                    raise ChannelError(f"block {tok[1]!r} does not have {q} symbols", lineno)
                x = 0
                for s in sym:
                    s = int(s)
                    if not 0 <= s < alphabet:
                        raise ChannelError(f"symbol {s} outside alphabet", lineno)
                    x = x * alphabet + s
                path = tuple(g.index(v) for v in tok[2].split(">"))
                if path[0] != current or path[-1] != g.index(tok[3]):
                    raise ChannelError("codeword start/end state mismatch", lineno)
                books[current][x] = path
            else:
                raise ChannelError(f"syntax error: {line.strip()!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, ChannelError):
                raise
            raise ChannelError(str(exc), lineno) from None
    if q is None or alphabet is None or len(books) != g.n:
        raise ChannelError("codebook needs q, alphabet and one codebook per vertex")
    N = alphabet ** q
    out = []
    for k in range(g.n):
        if sorted(books[k]) != list(range(N)):
            raise ChannelError(f"codebook {g.vertices[k]} does not cover all {N} blocks")
        out.append(tuple(books[k][x] for x in range(N)))
    return ShapingCode(g, q, alphabet, tuple(out))
