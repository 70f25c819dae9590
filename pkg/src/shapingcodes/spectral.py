"""Perron-Frobenius machinery on the cost-enumerator matrix D(S).

D(S)[i, j] = 2^(-S w(i, j)) on edges and 0 elsewhere.  Its Perron root
lambda(S) and eigenvectors give the maxentropic Markov chain for every
average-cost constraint; lambda(S*) = 1 gives the capacity per unit cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .channel_model import CostGraph, classify_cost_structure, has_zero_cost_cycle, min_cycle_mean
from .errors import ConvergenceError, CostUniformError, InfeasibleError, ZeroCostCycleError

LAMBDA_TOL = 1e-10
TARGET_TOL = 1e-9
MAX_BISECT = 200
# beyond this exponent spread D(S) entries underflow and the matrix stops being irreducible
MAX_EXPONENT_SPREAD = 900.0


def _exponents(g: CostGraph, S: float) -> np.ndarray:
    return np.where(g.adjacency, -S * np.nan_to_num(g.weights), -np.inf)


def cost_matrix(g: CostGraph, S: float) -> np.ndarray:
    return np.where(g.adjacency, np.exp2(_exponents(g, S)), 0.0)


def perron(m: np.ndarray, max_iter: int = 100_000):
    """Perron root and positive eigenvectors of an irreducible nonnegative matrix.

    Returns ``(lam, left, right)`` with ``right`` scaled to max entry 1 and
    ``left @ right == 1``.  ``m`` is first balanced (see :func:`_balance`) so
    its largest entry is 1 and its Perron root is at least 1.  Power
    iteration then runs on ``a + I``, which is primitive even when ``m`` is
    periodic; the first stage squares the shifted matrix repeatedly (power
    iteration with exponent 2^k) and the second polishes with plain steps
    until the residual stalls.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if n == 1:
        return float(m[0, 0]), np.ones(1), np.ones(1)
    a, mu, phi = _balance(m)
    scale = a.max()
    a = a / scale
    b = a + np.eye(n)
    p = b.copy()
    for _ in range(64):
        nxt = p @ p
        nxt /= nxt.max()
        done = np.allclose(nxt, p, rtol=1e-15, atol=0.0)
        p = nxt
        if done:
            break
    right = p.sum(axis=1)
    left = p.sum(axis=0)
    prev = np.inf
    for it in range(max_iter):
        right = b @ right
        right /= right.max()
        left = left @ b
        left /= left.max()
        lam = float(left @ a @ right) / float(left @ right)
        res = max(np.abs(a @ right - lam * right).max(), np.abs(left @ a - lam * left).max() / left.max())
        if res <= 1e-15 or (it >= n and res >= prev):
            break
        prev = res
    if not (np.all(right > 0) and np.all(left > 0)):
        raise ConvergenceError("Perron vectors are not strictly positive (matrix reducible or underflowed)")
    if res > LAMBDA_TOL * max(lam, 1e-300):
        raise ConvergenceError(f"power iteration stalled at relative residual {res / lam:.3g}")
    # undo the balancing: right = 2^phi r', left = 2^-phi l'
    right = right * np.exp2(phi)
    left = left * np.exp2(-phi)
    right /= right.max()
    left = left / float(left @ right)
    return lam * scale * 2.0 ** -mu, left, right


def _karp_potentials(c: np.ndarray) -> tuple[float, np.ndarray]:
    """(mu, phi): minimum cycle mean of the cost matrix ``c`` (inf = no edge)
    and potentials with c[i, j] - mu + phi[i] - phi[j] >= 0 on every edge.
    mu is inf when no cycle is reachable from vertex 0."""
    n = c.shape[0]
    d = np.full((n + 1, n), np.inf)
    d[0, 0] = 0.0
    for k in range(1, n + 1):
        d[k] = np.min(d[k - 1][:, None] + c, axis=0)
    mu = np.inf
    for v in range(n):
        if np.isfinite(d[n, v]):
            ks = np.flatnonzero(np.isfinite(d[:n, v]))
            mu = min(mu, float(np.max((d[n, v] - d[ks, v]) / (n - ks))))
    phi = np.zeros(n)
    if not np.isfinite(mu):
        return mu, phi
    r = c - mu
    for _ in range(n):
        nxt = np.minimum(phi, np.min(phi[:, None] + r, axis=0))
        if np.array_equal(nxt, phi):
            break
        phi = nxt
    return mu, phi


def _balance(m: np.ndarray):
    """(a, mu, phi) with a = 2^mu diag(2^-phi) m diag(2^phi).

    With c = -log2 m, mu is the minimum cycle mean of c and phi are
    shortest-path potentials for c - mu, so every entry of ``a`` is <= 1 and
    the entries along a critical cycle equal 1; hence lambda(a) >= 1 however
    small lambda(m) is relative to max(m).
    """
    with np.errstate(divide="ignore"):
        c = np.where(m > 0, -np.log2(np.where(m > 0, m, 1.0)), np.inf)
    mu, phi = _karp_potentials(c)
    if not np.isfinite(mu):
        return m.copy(), 0.0, phi
    return m * np.exp2(mu - phi[:, None] + phi[None, :]), mu, phi


@dataclass(frozen=True, eq=False)
class CriticalChain:
    """S -> infinity limit of the maxentropic chain: it lives on the
    min-mean cycles (the critical subgraph) and has entropy ``entropy``."""

    mean: float  # minimum cycle mean
    entropy: float
    edge_probs: np.ndarray
    vertex_probs: np.ndarray


def critical_chain(g: CostGraph, tol: float = 1e-9) -> CriticalChain:
    w = np.where(g.adjacency, np.nan_to_num(g.weights), np.inf)
    mu, phi = _karp_potentials(w)
    r = w - mu + phi[:, None] - phi[None, :]
    crit = g.adjacency & (r <= tol * max(1.0, abs(mu)))
    # strongly connected pieces of the critical subgraph, via transitive closure
    n = g.n
    reach = crit | np.eye(n, dtype=bool)
    for _ in range(max(1, int(math.ceil(math.log2(n))) + 1)):
        reach = reach | ((reach.astype(np.int64) @ reach.astype(np.int64)) > 0)
    best = None
    seen: set[int] = set()
    for v in range(n):
        if v in seen:
            continue
        comp = [u for u in range(n) if reach[v, u] and reach[u, v]]
        seen.update(comp)
        sub = crit[np.ix_(comp, comp)].astype(float)
        if not sub.any():
            continue
        lam, left, right = perron(sub)
        if best is None or lam > best[0] + 1e-12:
            best = (lam, comp, sub, left, right)
    lam, comp, sub, left, right = best
    P = sub * right[None, :] / (lam * right[:, None])
    pi = left * right
    pi = pi / pi.sum()
    edge = np.zeros((n, n))
    edge[np.ix_(comp, comp)] = pi[:, None] * P
    return CriticalChain(float(mu), float(math.log2(lam)), edge, edge.sum(axis=1))


@dataclass(frozen=True, eq=False)
class PerronData:
    """Spectral solution of D(S).  ``left @ rho == 1`` and the stationary
    vertex weights are ``left * rho``."""

    S: float
    log2_lam: float
    rho: np.ndarray
    left: np.ndarray

    @property
    def lam(self) -> float:
        return 2.0 ** self.log2_lam

    @property
    def vertex_probs(self) -> np.ndarray:
        return self.left * self.rho


def perron_data(g: CostGraph, S: float) -> PerronData:
    # factor out the largest entry so lambda stays representable for large S
    e = _exponents(g, S)
    emax = e[g.adjacency].max()
    spread = emax - e[g.adjacency].min()
    if spread > MAX_EXPONENT_SPREAD:
        raise InfeasibleError(f"S={S:g} is outside the numerically representable range for this channel")
    mat = np.where(g.adjacency, np.exp2(e - emax), 0.0)
    lam, left, right = perron(mat)
    return PerronData(float(S), float(emax + math.log2(lam)), right, left)


@dataclass(frozen=True, eq=False)
class CostChain:
    """Maxentropic Markov chain on the channel at shaping parameter S."""

    graph: CostGraph
    S: float
    log2_lam: float
    rho: np.ndarray
    P: np.ndarray
    pi: np.ndarray

    @cached_property
    def edge_probs(self) -> np.ndarray:
        return self.pi[:, None] * self.P

    @cached_property
    def entropy(self) -> float:
        """Entropy rate in bits per edge."""
        P = self.P
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(P > 0, self.edge_probs * np.log2(np.where(P > 0, P, 1.0)), 0.0)
        return float(-terms.sum())

    @cached_property
    def average_cost(self) -> float:
        return float(np.nansum(self.edge_probs * np.nan_to_num(self.graph.weights)))

    @property
    def capacity(self) -> float:
        """log2 lambda(S) + S W(S): the cost-constrained capacity at W(S)."""
        return self.log2_lam + self.S * self.average_cost


def maxentropic_chain(g: CostGraph, S: float) -> CostChain:
    pd = perron_data(g, S)
    e = _exponents(g, S)
    # P_ij = 2^(-S w_ij) rho_j / (lambda rho_i), evaluated in log space
    with np.errstate(divide="ignore"):
        logrho = np.log2(pd.rho)
    P = np.where(g.adjacency, np.exp2(e - pd.log2_lam + logrho[None, :] - logrho[:, None]), 0.0)
    P /= P.sum(axis=1, keepdims=True)
    pi = pd.vertex_probs / pd.vertex_probs.sum()
    return CostChain(g, float(S), pd.log2_lam, pd.rho, P, pi)


def log2_lambda(g: CostGraph, S: float) -> float:
    return perron_data(g, S).log2_lam


def _bisect(fn, target, lo, hi):
    """Solve fn(S) = target for decreasing fn on the bracket [lo, hi]."""
    flo, fhi = fn(lo), fn(hi)
    for _ in range(MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = fn(mid)
        if not fhi - 1e-12 <= fm <= flo + 1e-12:
            raise ArithmeticError(f"target function is not monotone near S={mid:.6g}")
        if fm > target:
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return lo if abs(flo - target) <= abs(fhi - target) else hi


def _safe(below, s: float) -> bool:
    try:
        return below(s)
    except ConvergenceError:
        # eigenvector entries underflow before the exponent spread cap is hit
        raise InfeasibleError("target lies beyond the numerically representable range of S") from None


def _grow_bracket(g: CostGraph, below) -> float:
    spread = float(np.ptp(g.weights[g.adjacency]))
    limit = MAX_EXPONENT_SPREAD / spread if spread > 0 else 1e6
    hi = 1.0
    while not _safe(below, hi):
        hi *= 2.0
        if hi > limit:
            raise InfeasibleError("target lies beyond the numerically representable range of S")
    return hi


def solve_S_star(g: CostGraph) -> float:
    """Unique S >= 0 with lambda(S) = 1 (capacity in bits per unit cost)."""
    if has_zero_cost_cycle(g):
        raise ZeroCostCycleError("channel has a cost-0 cycle; lambda(S) >= 1 for every S")
    if log2_lambda(g, 0.0) <= 0.0:
        return 0.0
    hi = _grow_bracket(g, lambda s: log2_lambda(g, s) < 0.0)
    S = _bisect(lambda s: log2_lambda(g, s), 0.0, 0.0, hi)
    if abs(2.0 ** log2_lambda(g, S) - 1.0) > LAMBDA_TOL:
        raise ConvergenceError("S* bisection did not reach |lambda - 1| <= 1e-10")
    return S


def solve_S_for_entropy(g: CostGraph, h: float) -> float:
    """S >= 0 whose maxentropic chain has entropy rate ``h`` bits/edge."""
    if classify_cost_structure(g).is_uniform:
        raise CostUniformError("entropy target does not determine S on a cost-uniform graph")
    h0 = maxentropic_chain(g, 0.0).entropy
    if h > h0 + 1e-12:
        raise InfeasibleError(f"entropy {h:.6g} exceeds the unconstrained capacity {h0:.6g}")
    if h >= h0 - 1e-12:
        return 0.0
    floor = critical_chain(g).entropy
    if h <= floor + 1e-12:
        raise InfeasibleError(f"entropy {h:.6g} is at or below the S -> infinity limit {floor:.6g}")
    ent = lambda s: maxentropic_chain(g, s).entropy  # noqa: E731
    hi = _grow_bracket(g, lambda s: ent(s) < h)
    S = _bisect(ent, h, 0.0, hi)
    if abs(ent(S) - h) > TARGET_TOL:
        raise ConvergenceError(f"entropy bisection ended {abs(ent(S) - h):.3g} from target")
    return S


def solve_S_for_W(g: CostGraph, Wbar: float) -> tuple[float, float]:
    """Return ``(S, C)`` with W(S) = Wbar and C = log2 lambda(S) + S Wbar.

    An average-cost budget at or above W(0) is inactive: ``(0, log2 lambda(0))``.
    """
    c0 = maxentropic_chain(g, 0.0)
    if Wbar >= c0.average_cost - 1e-12:
        return 0.0, c0.log2_lam
    if Wbar <= min_cycle_mean(g) + 1e-12:
        raise InfeasibleError(f"average cost {Wbar:.6g} is at or below the minimum cycle mean")
    avg = lambda s: maxentropic_chain(g, s).average_cost  # noqa: E731
    hi = _grow_bracket(g, lambda s: avg(s) < Wbar)
    S = _bisect(avg, Wbar, 0.0, hi)
    if abs(avg(S) - Wbar) > TARGET_TOL:
        raise ConvergenceError("average-cost bisection did not converge")
    return S, log2_lambda(g, S) + S * Wbar
