"""Command-line interface.

Exit status: 0 on success, 2 on invalid input, 1 on internal error.
CSV outputs land in ``--out`` as ``<subcommand>_<label>.csv`` with numbers
at 6 decimal places.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import reproduce
from .channel_model import (BUILTIN_CHANNELS, ChannelError, SourceSpec, builtin_channel, debruijn_label,
                            min_cycle_mean, parse_channel, parse_source)
from .code_analysis import analyze, simulate
from .errors import ConvergenceError, CostUniformError, InfeasibleError, ZeroCostCycleError
from .oracle import count_paths_avg_cost, count_paths_exact_cost
from .separation import huffman_build, pipeline_total_cost
from .shaping_theory import a_min, modified_costs, t_min
from .spectral import maxentropic_chain, solve_S_for_W, solve_S_star
from .varn_codec import build_varn, decode, encode, export_codebook, import_codebook, varn_upper_bound


class UsageError(ValueError):
    pass


def _num(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.6f}"
    return str(x)


def _write_csv(out: Path, name: str, header, rows) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_num(x) for x in r])
    return path


def _read_text(path: str, what: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {what} file {path}: {exc.strerror}") from None


def _load_channel(arg: str):
    if arg is None:
        raise UsageError("--channel is required")
    if not os.path.exists(arg) and arg in BUILTIN_CHANNELS:
        return builtin_channel(arg)
    return parse_channel(_read_text(arg, "channel"))


def _load_source(arg, default_size=2) -> SourceSpec:
    if arg is None:
        return SourceSpec.uniform(default_size)
    return parse_source(_read_text(arg, "source"))


def _start(g, args):
    return g.start if getattr(args, "start", None) is None else g.index(args.start)


def _load_code(args, g):
    if not args.code:
        raise UsageError("--code is required")
    return import_codebook(_read_text(args.code, "codebook"), g)


def cmd_capacity(args):
    g = _load_channel(args.channel)
    c0 = maxentropic_chain(g, 0.0)
    mcm = min_cycle_mean(g)
    print(f"unconstrained capacity log2 lambda(0) = {c0.log2_lam:.6f} bits/edge at W(0) = {c0.average_cost:.6f}")
    print(f"minimum cycle mean = {mcm:.6f}")
    try:
        S = solve_S_star(g)
        print(f"S* = {S:.6f} bits/unit cost")
        if S > 0:
            print(f"T_min/H(X) = 1/S* = {1 / S:.6f}")
    except ZeroCostCycleError as exc:
        print(f"S*: none ({exc})")
    rows = []
    if args.W is not None:
        Ws = [args.W]
    else:
        hi = c0.average_cost
        Ws = [mcm + (hi - mcm) * k / 20 for k in range(1, 21)] if hi - mcm > 1e-9 else [hi]
    for W in Ws:
        S, C = solve_S_for_W(g, W)
        rows.append((W, S, C))
        if args.W is not None:
            print(f"C_I({W:g}) = {C:.6f} bits/edge at S = {S:.6f}")
    p = _write_csv(Path(args.out), "capacity_curve.csv", ["W", "S", "C_I"], rows)
    print(f"wrote {p}")


def cmd_bound(args):
    g = _load_channel(args.channel)
    src = _load_source(args.source)
    Hx = src.entropy
    out = Path(args.out)
    if args.kind == "type2":
        if args.f:
            raise UsageError("--f only applies to 'bound type1'")
        b = t_min(g, Hx)
        print(f"S* = {b.S:.6f}  T_min = {b.T:.6f}  f* = {b.f:.6f}  A = {b.A:.6f}")
        _write_csv(out, "bound_type2.csv", ["S", "T_min", "f_star", "A", "H_X"], [(b.S, b.T, b.f, b.A, Hx)])
        rows = [(debruijn_label(g, i, j), b.edge_probs[i, j]) for i, j, _ in g.edges]
        p = _write_csv(out, "bound_type2_edges.csv", ["edge", "p_star"], rows)
        print(f"wrote {p}")
        return
    if args.f:
        fs = args.f
    else:
        fmin = Hx / maxentropic_chain(g, 0.0).log2_lam
        fs = [fmin * (1 + 3 * k / 19) for k in range(20)]
    rows = []
    for f in fs:
        b = a_min(g, Hx, f)
        rows.append((f, b.S, b.A, b.T))
        print(f"f = {f:.6f}  S = {_num(b.S) or 'n/a'}  A_min = {b.A:.6f}  T = {b.T:.6f}"
              + ("  (cost-uniform)" if b.cost_uniform else ""))
    p = _write_csv(out, "bound_type1.csv", ["f", "S", "A_min", "T"], rows)
    print(f"wrote {p}")


def cmd_design(args):
    g = _load_channel(args.channel)
    if args.q is None or args.q < 1:
        raise UsageError("--q must be a positive integer")
    if args.alphabet ** args.q > 1 << 20:
        raise UsageError("alphabet^q exceeds 2^20 codewords per state")
    if args.f is not None and args.S is not None:
        raise UsageError("give at most one of --S and --f")
    if args.f is not None:
        from .spectral import solve_S_for_entropy

        S = solve_S_for_entropy(g, math.log2(args.alphabet) / args.f)
        mc = modified_costs(g, S)
    else:
        mc = modified_costs(g, "star" if args.S is None else args.S)
    code = build_varn(mc, args.q, args.alphabet)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cb = out / "design_varn_codebook.txt"
    cb.write_text(export_codebook(code), encoding="utf-8")
    st = analyze(code, SourceSpec.uniform(args.alphabet), _start(g, args), mc.weights)
    bound = varn_upper_bound(code, mc)
    print(f"S = {mc.S:.6f}  q = {args.q}  M = {code.leaf_count}")
    print(f"modified-channel total cost = {st.T:.6f} <= bound {bound:.6f}")
    _write_csv(out, "design_varn.csv", ["S", "q", "M", "T_modified", "bound", "f"],
               [(mc.S, args.q, code.leaf_count, st.T, bound, st.f)])
    print(f"wrote {cb}")


def _read_symbols(path: str, alphabet: int) -> list[int]:
    text = _read_text(path, "input")
    toks = text.split()
    if alphabet <= 10 and all(len(t) >= 1 and t.isdigit() for t in toks):
        syms = [int(c) for t in toks for c in t]
    else:
        syms = [int(t) for t in toks]
    if any(not 0 <= s < alphabet for s in syms):
        raise UsageError("input symbol outside the code alphabet")
    return syms


def cmd_encode(args):
    g = _load_channel(args.channel)
    code = _load_code(args, g)
    if not args.input:
        raise UsageError("--input is required")
    syms = _read_symbols(args.input, code.alphabet_size)
    pad = (-len(syms)) % code.q
    v0 = _start(g, args)
    path = encode(code, syms + [0] * pad, v0)
    walk = [g.vertices[v0]] + [g.vertices[b] for _, b in path]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dst = out / "encode_path.txt"
    dst.write_text(f"start {g.vertices[v0]}\nsymbols {len(syms)}\npad {pad}\nwalk {'>'.join(walk)}\n",
                   encoding="utf-8")
    print(f"{len(syms)} symbols -> {len(path)} edges, cost {sum(g.cost(a, b) for a, b in path):.6f}")
    print(f"wrote {dst}")


def cmd_decode(args):
    g = _load_channel(args.channel)
    code = _load_code(args, g)
    if not args.input:
        raise UsageError("--input is required")
    fields = {}
    for line in _read_text(args.input, "path").splitlines():
        if line.strip():
            k, _, v = line.partition(" ")
            fields[k] = v.strip()
    try:
        walk = [g.index(v) for v in fields["walk"].split(">")] if fields.get("walk") else [g.index(fields["start"])]
        n = int(fields["symbols"])
    except KeyError as exc:
        raise UsageError(f"path file lacks a {exc.args[0]!r} line") from None
    path = list(zip(walk, walk[1:]))
    syms = decode(code, path, walk[0])[:n]
    sep = "" if code.alphabet_size <= 10 else " "
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dst = out / "decode_symbols.txt"
    dst.write_text(sep.join(str(s) for s in syms) + "\n", encoding="utf-8")
    print(f"{len(path)} edges -> {len(syms)} symbols")
    print(f"wrote {dst}")


def _modified_or_none(g):
    try:
        return modified_costs(g, "star")
    except (ZeroCostCycleError, InfeasibleError):
        return None


def cmd_analyze(args):
    g = _load_channel(args.channel)
    code = _load_code(args, g)
    src = _load_source(args.source, code.alphabet_size)
    v0 = _start(g, args)
    st = analyze(code, src, v0)
    emp = simulate(code, src, v0, args.n, args.seed)
    mc = _modified_or_none(g)
    rows = [(debruijn_label(g, i, j), st.edge_probs[i, j], emp.edge_freq[i, j], c,
             None if mc is None else mc.weights[i, j]) for i, j, c in g.edges]
    out = Path(args.out)
    _write_csv(out, "analyze_edges.csv", ["edge", "p_analytic", "p_empirical", "w", "w_modified"], rows)
    _write_csv(out, "analyze_summary.csv", ["f", "A", "T", "H_E", "H_hat", "KL"],
               [(st.f, st.A, st.T, st.H_E, st.H_hat, st.kl_rate)])
    print(f"f = {st.f:.6f}  A = {st.A:.6f}  T = {st.T:.6f}  H(E) = {st.H_E:.6f}  "
          f"H(E^) = {st.H_hat:.6f}  KL = {st.kl_rate:.6f}")
    print(f"wrote {out / 'analyze_edges.csv'}")


def cmd_simulate(args):
    g = _load_channel(args.channel)
    code = _load_code(args, g)
    src = _load_source(args.source, code.alphabet_size)
    v0 = _start(g, args)
    st = analyze(code, src, v0)
    emp = simulate(code, src, v0, args.n, args.seed)
    rows = [(debruijn_label(g, i, j), int(emp.edge_counts[i, j]), emp.edge_freq[i, j],
             emp.edge_freq_sigma[i, j], st.edge_probs[i, j]) for i, j, _ in g.edges]
    out = Path(args.out)
    _write_csv(out, "simulate_edges.csv", ["edge", "count", "p_empirical", "sigma", "p_analytic"], rows)
    _write_csv(out, "simulate_summary.csv", ["blocks", "edges", "f", "A", "T", "seed"],
               [(emp.n_blocks, emp.n_edges, emp.f, emp.A, emp.T, args.seed)])
    print(f"{emp.n_blocks} blocks, {emp.n_edges} edges: f = {emp.f:.6f}  A = {emp.A:.6f}  T = {emp.T:.6f}")
    print(f"max |p_emp - p_analytic| = {np.abs(emp.edge_freq - st.edge_probs).max():.6f}")


def cmd_pipeline(args):
    g = _load_channel(args.channel)
    src = _load_source(args.source)
    bs, qs = args.b, args.q
    if len(bs) != len(qs):
        raise UsageError("--b and --q need the same number of values")
    mc = modified_costs(g, "star")
    rows = []
    for b, q in zip(bs, qs):
        comp = huffman_build(src, b)
        r = pipeline_total_cost(comp, build_varn(mc, q, 2), g, args.n, args.seed, _start(g, args))
        rows.append((b, q, r.bits_per_symbol, r.cost_per_symbol, r.target, r.gap))
        print(f"b = {b}  q = {q}  bits/symbol = {r.bits_per_symbol:.6f}  cost/symbol = {r.cost_per_symbol:.6f}"
              f"  target = {r.target:.6f}  gap = {r.gap:.6f}")
    p = _write_csv(Path(args.out), "pipeline_summary.csv",
                   ["b", "q", "bits_per_symbol", "cost_per_symbol", "target", "gap"], rows)
    print(f"wrote {p}")


def cmd_oracle(args):
    g = _load_channel(args.channel)
    v0 = _start(g, args)
    rows = []
    if args.mode == "avg":
        if args.W is None:
            raise UsageError("oracle avg needs --W")
        _, ref = solve_S_for_W(g, args.W)
        for n in args.n:
            k = count_paths_avg_cost(g, n, args.W, v0)
            rate = math.log2(k) / n if k else -math.inf
            rows.append((n, k, rate, ref, rate - ref))
            print(f"n = {n}  K_n(W) = {k}  rate = {rate:.6f}  C_I(W) = {ref:.6f}")
        key = "n"
    else:
        if not args.W:
            raise UsageError("oracle exact needs --W")
        ref = solve_S_star(g)
        for W in args.W:
            k = count_paths_exact_cost(g, int(W), v0)
            rate = math.log2(k) / W if k else -math.inf
            rows.append((int(W), k, rate, ref, rate - ref))
            print(f"W = {int(W)}  K(W) = {k}  rate = {rate:.6f}  S* = {ref:.6f}")
        key = "W"
    p = _write_csv(Path(args.out), f"oracle_{args.mode}.csv", [key, "count", "rate", "spectral", "gap"], rows)
    print(f"wrote {p}")


def cmd_reproduce(args):
    out = Path(args.out)
    t2 = reproduce.flash_distribution_rows()
    _write_csv(out, "table2.csv", ["edge", "reference", "computed", "abs_diff"], t2)
    t3 = reproduce.flash_modified_rows()
    _write_csv(out, "table3.csv", ["edge", "reference", "computed", "abs_diff", "match", "note"],
               [(e, p, c, d, "yes" if ok else "no", note) for e, p, c, d, ok, note in t3])
    curve = reproduce.flash_varn_curve()
    _write_csv(out, "fig3.csv", ["q", "codebook_size", "M", "T_modified", "T_original", "bound_modified",
                                 "bound_original", "T_min"],
               [(v.q, v.codebook_size, v.M, v.T_modified, v.T_original, v.bound_modified, v.bound_original,
                 v.T_min) for v in curve])
    (out / "fig3.gp").write_text(reproduce.GNUPLOT_FIG3, encoding="utf-8")
    print(f"table2: max |diff| = {max(r[3] for r in t2):.6f} (tolerance {reproduce.DIST_TOL})")
    print(f"table3: {sum(r[4] for r in t3)}/8 entries within {reproduce.COST_TOL}")
    for e, p, c, d, ok, note in t3:
        if note:
            print(f"table3 edge {e}: {note}")
    print(f"fig3: T_original at q = 12 is {curve[-1].T_original:.6f} vs T_min {curve[-1].T_min:.6f}")
    print(f"wrote {out}/table2.csv, table3.csv, fig3.csv, fig3.gp")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shapingcodes", description="Shaping codes for finite-state costly channels.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, source=False, start=False):
        sp.add_argument("--channel", required=True, help="channel file, or a builtin: flash, k2, plastic")
        if source:
            sp.add_argument("--source", help="source file (default: uniform binary)")
        if start:
            sp.add_argument("--start", help="start vertex (default: the channel's)")
        sp.add_argument("--out", default=".", help="output directory (default: .)")

    sp = sub.add_parser("capacity", help="S*, unconstrained capacity and the C_I(W) curve")
    common(sp)
    sp.add_argument("--W", type=float, help="single average-cost constraint")
    sp.set_defaults(func=cmd_capacity)

    sp = sub.add_parser("bound", help="type-I (A_min(f)) or type-II (T_min) shaping bounds")
    sp.add_argument("kind", choices=["type1", "type2"])
    common(sp, source=True)
    sp.add_argument("--f", type=float, nargs="+", help="expansion factors (type1 only)")
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("design", help="build a generalized Varn code on the modified channel")
    sp.add_argument("method", choices=["varn"])
    common(sp, start=True)
    sp.add_argument("--q", type=int, required=True, help="source block length")
    sp.add_argument("--alphabet", type=int, default=2, help="source alphabet size (default 2)")
    sp.add_argument("--S", type=float, help="shaping parameter (default S*)")
    sp.add_argument("--f", type=float, help="target expansion factor (type-I design)")
    sp.set_defaults(func=cmd_design)

    for name, fn, hlp in (("encode", cmd_encode, "encode a symbol file into a channel path"),
                          ("decode", cmd_decode, "decode a path file back into symbols")):
        sp = sub.add_parser(name, help=hlp)
        common(sp, start=True)
        sp.add_argument("--code", required=True, help="codebook file from 'design varn'")
        sp.add_argument("--input", required=True, help="input file")
        sp.set_defaults(func=fn)

    for name, fn, hlp in (("analyze", cmd_analyze, "exact code statistics with a Monte-Carlo column"),
                          ("simulate", cmd_simulate, "Monte-Carlo encoder run")):
        sp = sub.add_parser(name, help=hlp)
        common(sp, source=True, start=True)
        sp.add_argument("--code", required=True, help="codebook file")
        sp.add_argument("--n", type=int, default=100_000, help="source blocks to simulate")
        sp.add_argument("--seed", type=int, default=0)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("pipeline", help="Huffman compression + binary Varn shaping")
    common(sp, source=True, start=True)
    sp.add_argument("--b", type=int, nargs="+", required=True, help="Huffman block lengths")
    sp.add_argument("--q", type=int, nargs="+", required=True, help="Varn block lengths (paired with --b)")
    sp.add_argument("--n", type=int, default=240_000, help="source symbols")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_pipeline)

    sp = sub.add_parser("oracle", help="brute-force path counts vs spectral capacities")
    sp.add_argument("mode", choices=["avg", "exact"])
    common(sp, start=True)
    sp.add_argument("--n", type=int, nargs="+", default=[10, 20, 40], help="sequence lengths (avg mode)")
    sp.add_argument("--W", type=float, nargs="+", help="average cost (avg) or total costs (exact)")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("reproduce", help="regenerate the flash-channel tables and Varn curve")
    sp.add_argument("target", choices=["flash"])
    sp.add_argument("--out", default=".", help="output directory (default: .)")
    sp.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "oracle" and args.mode == "avg" and args.W is not None:
        if len(args.W) != 1:
            parser.error("oracle avg takes a single --W")
        args.W = args.W[0]
    try:
        args.func(args)
    except (UsageError, ChannelError, InfeasibleError, ZeroCostCycleError, CostUniformError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, ArithmeticError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
