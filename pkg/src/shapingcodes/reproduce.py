"""Flash-channel reproduction targets: optimal edge distribution, modified
costs and Varn total cost versus codebook size."""

from __future__ import annotations

from dataclasses import dataclass

from .channel_model import SourceSpec, builtin_channel, debruijn_label
from .code_analysis import analyze
from .shaping_theory import modified_costs, t_min
from .varn_codec import build_varn, varn_upper_bound

FLASH_EDGES = ("000", "001", "010", "011", "100", "101", "110", "111")

# reference values, 4 decimals
REFERENCE_DISTRIBUTION = dict(zip(FLASH_EDGES, (0.4318, 0.1323, 0.1135, 0.0593, 0.1323, 0.0405, 0.0593, 0.0310)))
REFERENCE_MODIFIED = dict(zip(FLASH_EDGES, (0.3805, 2.0923, 0.6068, 1.5423, 0.3855, 2.0923, 0.6068, 1.5423)))

DIST_TOL = 5e-4
COST_TOL = 1e-3
MODIFIED_000_NOTE = ("reference value 0.3805 disagrees with -log2(p(000)/p(00)) = S* ~ 0.3856 computed from the "
                     "reference distribution itself; treated as a typo")


def _flash_index(g):
    out = {}
    for i, j, _ in g.edges:
        out[debruijn_label(g, i, j)] = (i, j)
    return out


def flash_distribution_rows():
    g = builtin_channel("flash")
    bound = t_min(g, 1.0)
    idx = _flash_index(g)
    rows = []
    for e in FLASH_EDGES:
        got = float(bound.edge_probs[idx[e]])
        rows.append((e, REFERENCE_DISTRIBUTION[e], got, abs(got - REFERENCE_DISTRIBUTION[e])))
    return rows


def flash_modified_rows():
    """(edge, reference, computed, |diff|, within tolerance, note)."""
    g = builtin_channel("flash")
    mc = modified_costs(g, "star")
    idx = _flash_index(g)
    rows = []
    for e in FLASH_EDGES:
        got = float(mc.weights[idx[e]])
        d = abs(got - REFERENCE_MODIFIED[e])
        note = MODIFIED_000_NOTE if e == "000" else ""
        rows.append((e, REFERENCE_MODIFIED[e], got, d, d <= COST_TOL, note))
    return rows


@dataclass(frozen=True)
class VarnPoint:
    q: int
    codebook_size: int
    M: int
    T_modified: float
    T_original: float
    bound_modified: float
    T_min: float

    @property
    def bound_original(self) -> float:
        return self.bound_modified * self.T_min


def flash_varn_curve(qs=range(1, 13)):
    """Varn total cost on the flash channel (uniform binary source) per q."""
    g = builtin_channel("flash")
    mc = modified_costs(g, "star")
    src = SourceSpec.uniform(2)
    tmin = t_min(g, 1.0).T
    out = []
    for q in qs:
        code = build_varn(mc, q, 2)
        st = analyze(code, src)
        out.append(VarnPoint(q, code.n_blocks, code.leaf_count, st.cost_under(mc.weights)[1], st.T,
                             varn_upper_bound(code, mc), tmin))
    return out


GNUPLOT_FIG3 = """\
set datafile separator ','
set xlabel 'q (log2 codebook size)'
set ylabel 'total cost per source bit'
set key top right
plot 'fig3.csv' using 1:5 skip 1 with linespoints title 'Varn code', \\
     'fig3.csv' using 1:8 skip 1 with lines title 'T_min = 1/S*', \\
     'fig3.csv' using 1:7 skip 1 with lines dashtype 2 title 'upper bound'
"""
