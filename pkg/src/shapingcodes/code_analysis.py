"""A shaping code driven by an i.i.d. source is a finite-state word-valued
source.  This module builds its state graph G and codeword graph F, and
computes the asymptotic statistics of the emitted edge process exactly
(stationary expectations) or empirically (simulation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel_model import SourceSpec
from .rng import SplitMix64
from .varn_codec import ShapingCode

# dense stationary solve of F only below this many codewords
DIRECT_F_LIMIT = 4096


class V0NotInIrreducibleComponent(ValueError):
    pass


def stationary(T: np.ndarray) -> np.ndarray:
    """Stationary distribution of an irreducible stochastic matrix by a
    direct solve of (I - T)^t pi = 0 with one row replaced by sum(pi) = 1."""
    n = T.shape[0]
    A = np.eye(n) - T.T
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    return np.linalg.solve(A, b)


def _reach(adj: np.ndarray, s: int) -> set[int]:
    seen = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        for v in np.flatnonzero(adj[u]):
            v = int(v)
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def block_probs(src: SourceSpec, q: int) -> np.ndarray:
    p = np.ones(1)
    for _ in range(q):
        p = np.outer(p, np.asarray(src.probs)).ravel()
    return p


@dataclass(frozen=True, eq=False)
class EncoderGraphs:
    t0: np.ndarray  # state graph G_0 transition matrix over all channel vertices
    component: tuple[int, ...]  # vertices of G, sorted
    tG: np.ndarray  # transitions restricted to G
    pi_G: np.ndarray  # over ``component``
    block_probs: np.ndarray
    pi_F: np.ndarray  # pi_F[a, x] for component index a and block x
    pi_F_direct: Optional[np.ndarray]  # independent solve of F, when small enough
    F_residual: float  # max |pi_F P_F - pi_F|

    @property
    def n_codewords(self) -> int:
        return self.pi_F.size


def build_graphs(code: ShapingCode, src: SourceSpec, v0: Optional[int] = None) -> EncoderGraphs:
    if src.size != code.alphabet_size:
        raise ValueError("source alphabet size does not match the code")
    g = code.graph
    v0 = g.start if v0 is None else v0
    px = block_probs(src, code.q)
    n = g.n
    t0 = np.zeros((n, n))
    ends = code.ends
    for k in range(n):
        np.add.at(t0[k], ends[k], px)
    adj = t0 > 0
    fwd = _reach(adj, v0)
    # v0 must lie in a closed communicating class
    if any(v0 not in _reach(adj, u) for u in fwd):
        raise V0NotInIrreducibleComponent(
            f"start state {g.vertices[v0]} is transient in the encoder state graph")
    comp = tuple(sorted(fwd))
    tG = t0[np.ix_(comp, comp)]
    piG = stationary(tG)
    piF = piG[:, None] * px[None, :]

    # F transition: from codeword (a, x) to (b, y) with prob px[y] iff end(a, x) == comp[b]
    pos = {v: a for a, v in enumerate(comp)}
    end_idx = np.array([[pos[int(e)] for e in ends[v]] for v in comp])
    inflow = np.zeros(len(comp))
    np.add.at(inflow, end_idx.ravel(), piF.ravel())
    resid = float(np.abs(inflow[:, None] * px[None, :] - piF).max())

    direct = None
    m = piF.size
    if m <= DIRECT_F_LIMIT:
        PF = np.zeros((m, m))
        N = px.size
        for a in range(len(comp)):
            for x in range(N):
                b = end_idx[a, x]
                PF[a * N + x, b * N:(b + 1) * N] = px
        direct = stationary(PF).reshape(piF.shape)
    return EncoderGraphs(t0, comp, tG, piG, px, piF, direct, resid)


@dataclass(frozen=True, eq=False)
class CodeStatistics:
    q: int
    Hx: float  # source entropy, bits per symbol
    EL: float  # expected codeword length, edges per block
    f: float
    EN: np.ndarray  # expected edge counts per block, n x n
    edge_probs: np.ndarray
    vertex_probs: np.ndarray
    tH: np.ndarray  # induced first-order chain
    A: float
    T: float
    H_E: float  # entropy rate of the code process, bits per edge
    H_hat: float  # entropy rate of the induced chain
    kl_rate: float
    graphs: EncoderGraphs

    def cost_under(self, weights: np.ndarray) -> tuple[float, float]:
        """(average, total) cost under another cost matrix on the same graph."""
        A = float(np.nansum(self.edge_probs * np.nan_to_num(weights)))
        return A, self.f * A


def codeword_edges(code: ShapingCode):
    """Flat arrays (root, block, from, to) over every edge of every codeword."""
    roots, blocks, frm, to = [], [], [], []
    for k, book in enumerate(code.books):
        for x, p in enumerate(book):
            L = len(p) - 1
            roots.extend([k] * L)
            blocks.extend([x] * L)
            frm.extend(p[:-1])
            to.extend(p[1:])
    return (np.array(roots, dtype=np.int64), np.array(blocks, dtype=np.int64),
            np.array(frm, dtype=np.int64), np.array(to, dtype=np.int64))


def analyze(code: ShapingCode, src: SourceSpec, v0: Optional[int] = None,
            weights: Optional[np.ndarray] = None) -> CodeStatistics:
    """Exact asymptotic statistics.  Costs default to the channel's own."""
    gr = build_graphs(code, src, v0)
    g = code.graph
    n = g.n
    w = g.weights if weights is None else weights
    weight = np.zeros((n, code.n_blocks))
    weight[list(gr.component)] = gr.pi_F
    lengths = np.array([[len(p) - 1 for p in book] for book in code.books], dtype=float)
    EL = float((weight * lengths).sum())
    roots, blocks, frm, to = codeword_edges(code)
    EN = np.zeros((n, n))
    np.add.at(EN, (frm, to), weight[roots, blocks])
    p = EN / EL
    pv = p.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        tH = np.where(pv[:, None] > 0, p / pv[:, None], 0.0)
        logt = np.where(p > 0, np.log2(np.where(tH > 0, tH, 1.0)), 0.0)
    H_hat = float(-(p * logt).sum())
    Hx = src.entropy
    f = EL / code.q
    H_E = code.q * Hx / EL
    A = float(np.nansum(p * np.nan_to_num(w)))
    return CodeStatistics(code.q, Hx, EL, f, EN, p, pv, tH, A, f * A, H_E, H_hat, H_hat - H_E, gr)


@dataclass(frozen=True, eq=False)
class EmpiricalStats:
    n_blocks: int
    n_edges: int
    edge_counts: np.ndarray
    edge_freq: np.ndarray
    edge_freq_sigma: np.ndarray  # batch-means standard error
    total_cost: float
    A: float
    T: float  # cost per source symbol
    f: float


def simulate(code: ShapingCode, src: SourceSpec, v0: Optional[int] = None, n_blocks: int = 10 ** 5,
             seed: int = 0, weights: Optional[np.ndarray] = None, batches: int = 32) -> EmpiricalStats:
    """Monte-Carlo run of the encoder on SplitMix64(seed) source symbols.

    Each source symbol consumes one 64-bit draw; blocks are formed from
    consecutive symbols.
    """
    n_blocks = max(1, int(n_blocks))
    g = code.graph
    n = g.n
    state = g.start if v0 is None else v0
    w = g.weights if weights is None else weights
    N = code.n_blocks
    sym = SplitMix64(seed).symbols(src.probs, n_blocks * code.q).reshape(n_blocks, code.q)
    xs = np.zeros(n_blocks, dtype=np.int64)
    for c in range(code.q):
        xs = xs * code.alphabet_size + sym[:, c]
    ends = code.ends.ravel().tolist()
    nb = max(1, min(batches, n_blocks))
    bounds = np.linspace(0, n_blocks, nb + 1).astype(int)
    used = np.empty(n_blocks, dtype=np.int64)
    for i, x in enumerate(xs.tolist()):
        idx = state * N + x
        used[i] = idx
        state = ends[idx]
    roots, blocks, frm, to = codeword_edges(code)
    word = roots * N + blocks
    # edges per codeword as a sparse (codeword -> edge) incidence
    edge_id = frm * n + to
    per_batch = np.zeros((nb, n * n))
    for b in range(nb):
        hits = np.bincount(used[bounds[b]:bounds[b + 1]], minlength=n * N)
        np.add.at(per_batch[b], edge_id, hits[word])
    counts = per_batch.sum(axis=0).reshape(n, n)
    n_edges = int(counts.sum())
    freq = counts / n_edges
    if nb > 1:
        bf = per_batch / per_batch.sum(axis=1, keepdims=True)
        sigma = (bf.std(axis=0, ddof=1) / math.sqrt(nb)).reshape(n, n)
    else:
        sigma = np.full((n, n), np.nan)
    total = float(np.nansum(counts * np.nan_to_num(w)))
    nsym = n_blocks * code.q
    return EmpiricalStats(n_blocks, n_edges, counts, freq, sigma, total, total / n_edges, total / nsym,
                          n_edges / nsym)
