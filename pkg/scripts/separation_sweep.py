"""Compression + shaping pipeline cost on flash for a skewed source, over (b, q)."""

import argparse

from shapingcodes.channel_model import SourceSpec, builtin_channel
from shapingcodes.separation import huffman_build, pipeline_total_cost
from shapingcodes.shaping_theory import modified_costs
from shapingcodes.varn_codec import build_varn


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p0", type=float, default=0.9)
    ap.add_argument("--n", type=int, default=240_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max", type=int, default=12)
    args = ap.parse_args()
    g = builtin_channel("flash")
    src = SourceSpec(("0", "1"), (args.p0, 1 - args.p0))
    mc = modified_costs(g, "star")
    print("b,q,bits_per_symbol,cost_per_symbol,target,gap")
    for k in range(1, args.max + 1):
        r = pipeline_total_cost(huffman_build(src, k), build_varn(mc, k, 2), g, args.n, args.seed)
        print(f"{k},{k},{r.bits_per_symbol:.6f},{r.cost_per_symbol:.6f},{r.target:.6f},{r.gap:.6f}")


if __name__ == "__main__":
    main()
