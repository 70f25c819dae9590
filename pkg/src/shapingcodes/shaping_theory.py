"""Optimal shaping bounds and the modified-cost channel.

* ``a_min``: least average cost per edge at a fixed expansion factor (type I).
* ``t_min``: least total cost per source symbol over all expansion factors
  (type II), attained at S* where lambda(S*) = 1.
* ``modified_costs``: w'(i, j) = -log2 P_ij(S), the per-state Kraft-tight
  costs on which type-II coding reduces to cheapest-tree coding.
* ``equivalence_gap_check``: measured gaps between a code's statistics and
  the bounds above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .channel_model import CostGraph, classify_cost_structure
from .errors import InfeasibleError
from .spectral import critical_chain, maxentropic_chain, perron_data, solve_S_for_entropy, solve_S_star


@dataclass(frozen=True, eq=False)
class ShapingBound:
    kind: str  # "type1" or "type2"
    S: float
    f: float
    A: float
    T: float
    edge_probs: np.ndarray
    vertex_probs: np.ndarray
    Hx: float
    cost_uniform: bool = False
    entropy: float = math.nan


def a_min(g: CostGraph, Hx: float, f: float) -> ShapingBound:
    """Minimum average cost per edge of any code with expansion factor ``f``.

    On a cost-uniform graph every code has average cost -alpha; the bound is
    returned with ``cost_uniform=True``, S = NaN and the unconstrained
    maxentropic distribution.  When H(X)/f is at or below the entropy of the
    S -> infinity chain the constraint is inactive: A is the minimum cycle
    mean, S = inf and the distribution is that limiting chain.
    """
    if f <= 0:
        raise InfeasibleError("expansion factor must be positive")
    cls = classify_cost_structure(g)
    if cls.is_uniform:
        chain = maxentropic_chain(g, 0.0)
        if Hx / f > chain.entropy + 1e-12:
            raise InfeasibleError(f"f={f:g} is below the minimum expansion factor {Hx / chain.entropy:g}")
        A = -cls.alpha
        return ShapingBound("type1", math.nan, f, A, f * A, chain.edge_probs, chain.pi, Hx, True, chain.entropy)
    crit = critical_chain(g)
    if Hx / f <= crit.entropy + 1e-12:
        # entropy constraint inactive: every min-mean cycle code stays feasible
        A = crit.mean
        return ShapingBound("type1", math.inf, f, A, f * A, crit.edge_probs, crit.vertex_probs, Hx, False,
                            crit.entropy)
    S = solve_S_for_entropy(g, Hx / f)
    chain = maxentropic_chain(g, S)
    A = chain.average_cost
    return ShapingBound("type1", S, f, A, f * A, chain.edge_probs, chain.pi, Hx, False, chain.entropy)


def a_min_formula(S: float, log2_lam: float, Hx: float, f: float) -> float:
    """Closed form H(X)/(S f) - log2(lambda)/S, valid for S > 0."""
    return Hx / (S * f) - log2_lam / S


def t_min(g: CostGraph, Hx: float) -> ShapingBound:
    """Minimum total cost H(X)/S* and the expansion factor f* attaining it.

    Raises ZeroCostCycleError when a cost-0 cycle exists: total cost then
    keeps decreasing as f grows and has no minimiser.
    """
    S = solve_S_star(g)
    if S <= 0:
        raise InfeasibleError("channel has zero capacity per unit cost")
    chain = maxentropic_chain(g, S)
    A = chain.average_cost
    f = Hx / (S * A)
    return ShapingBound("type2", S, f, A, Hx / S, chain.edge_probs, chain.pi, Hx, False, chain.entropy)


@dataclass(frozen=True, eq=False)
class ModifiedChannel:
    """Channel with costs w' = S w + log2 rho_i - log2 rho_j + log2 lambda(S)."""

    base: CostGraph
    S: float
    log2_lam: float
    weights: np.ndarray
    at_star: bool

    def graph(self) -> CostGraph:
        return self.base.with_costs(self.weights)

    def kraft_sums(self) -> np.ndarray:
        return np.nansum(np.exp2(-self.weights), axis=1)

    @property
    def max_cost(self) -> float:
        return float(np.nanmax(self.weights))

    def cycle_cost(self, cycle) -> float:
        """Modified cost of a closed vertex walk (first == last)."""
        return self.base.path_cost(cycle, self.weights)


def modified_costs(g: CostGraph, S: Union[float, str] = "star") -> ModifiedChannel:
    at_star = S == "star"
    s = solve_S_star(g) if at_star else float(S)
    pd = perron_data(g, s)
    logrho = np.log2(pd.rho)
    w = s * g.weights + logrho[:, None] - logrho[None, :] + pd.log2_lam
    w = np.where(g.adjacency, w, np.nan)
    w.setflags(write=False)
    return ModifiedChannel(g, s, pd.log2_lam, w, at_star)


@dataclass(frozen=True)
class GapReport:
    """``delta`` is the modified-channel total-cost excess f sum p w' - H(X);
    ``original_excess`` is f sum p w - H(X)/S*; the cost equivalence gives
    original_excess <= delta / S*."""

    f: float
    delta: float
    original_excess: float
    excess_bound: float
    excess_bound_holds: bool
    average_excess: Optional[float]
    f_gap: float
    S_star: float


def equivalence_gap_check(stats, g: CostGraph, Hx: float) -> GapReport:
    """Gaps of a code (``stats`` from code_analysis.analyze) against the bounds.

    ``stats.edge_probs`` only depends on the code's topology, so stats
    measured on either the original or the modified channel are accepted.
    """
    mc = modified_costs(g, "star")
    opt = t_min(g, Hx)
    p = stats.edge_probs
    f = stats.f
    wprime = float(np.nansum(p * np.nan_to_num(mc.weights)))
    worig = float(np.nansum(p * np.nan_to_num(g.weights)))
    delta = f * wprime - Hx
    excess = f * worig - Hx / mc.S
    rhs = delta / mc.S
    # float slack only: the two sides agree up to rounding for flow-balanced p
    holds = excess <= rhs + 1e-12 * max(1.0, abs(f * worig))
    try:
        avg_excess = worig - a_min(g, Hx, f).A
    except (InfeasibleError, ValueError):
        avg_excess = None
    return GapReport(f, delta, excess, rhs, holds, avg_excess, abs(f - opt.f), mc.S)
