"""Separated shaping for general i.i.d. sources: block Huffman compression
followed by a binary shaping code designed for a uniform source."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channel_model import CostGraph, SourceSpec
from .code_analysis import block_probs
from .rng import SplitMix64
from .shaping_theory import modified_costs, t_min
from .spectral import solve_S_for_entropy
from .varn_codec import ShapingCode, build_varn, decode, encode

MAX_BLOCK_BITS = 24


class BlockTooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Compressor:
    src: SourceSpec
    b: int
    codes: tuple[str, ...]  # codes[x] = bit string of source block x

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.codes)

    @property
    def bits_per_symbol(self) -> float:
        """Expected code length per source symbol."""
        return float(np.dot(block_probs(self.src, self.b), self.lengths)) / self.b

    def compress(self, symbols: Sequence[int]) -> tuple[str, int]:
        """(bit string, number of padding symbols appended to fill the last block)."""
        k = self.src.size
        sym = np.asarray(symbols, dtype=np.int64)
        pad = (-len(sym)) % self.b
        if len(sym) and (sym.min() < 0 or sym.max() >= k):
            raise ValueError("source symbol outside alphabet")
        sym = np.concatenate([sym, np.zeros(pad, dtype=np.int64)]).reshape(-1, self.b)
        idx = np.zeros(len(sym), dtype=np.int64)
        for c in range(self.b):
            idx = idx * k + sym[:, c]
        codes = self.codes
        return "".join([codes[x] for x in idx.tolist()]), pad

    def decompress(self, bits: str, pad: int = 0) -> list[int]:
        table = {c: x for x, c in enumerate(self.codes)}
        k = self.src.size
        out: list[int] = []
        start = 0
        for end in range(1, len(bits) + 1):
            x = table.get(bits[start:end])
            if x is not None:
                blk = []
                for _ in range(self.b):
                    x, r = divmod(x, k)
                    blk.append(r)
                out.extend(reversed(blk))
                start = end
        if start != len(bits):
            raise ValueError("bit string ends inside a codeword")
        return out[: len(out) - pad] if pad else out


def huffman_build(src: SourceSpec, b: int = 1) -> Compressor:
    """Optimal prefix code on b-blocks.  Merges take the two least probable
    nodes; among equal probabilities the node holding the larger block index
    merges first, so later blocks end up deeper.
    Codewords are then assigned canonically from the code lengths."""
    if b < 1:
        raise ValueError("block length must be >= 1")
    if b * math.log2(src.size) > MAX_BLOCK_BITS:
        raise BlockTooLarge(f"|X|^b = {src.size}^{b} blocks is too many to enumerate")
    p = block_probs(src, b)
    N = len(p)
    if N == 1:
        return Compressor(src, b, ("0",))
    depth = [0] * N
    heap = [(float(p[x]), -x, [x]) for x in range(N)]
    heapq.heapify(heap)
    while len(heap) > 1:
        pa, ia, la = heapq.heappop(heap)
        pb, ib, lb = heapq.heappop(heap)
        for x in la:
            depth[x] += 1
        for x in lb:
            depth[x] += 1
        heapq.heappush(heap, (pa + pb, min(ia, ib), la + lb))  # ia, ib are negated indices
    # canonical assignment: shorter first, then block index
    codes = [""] * N
    code = 0
    prev = 0
    for x in sorted(range(N), key=lambda x: (depth[x], x)):
        code <<= depth[x] - prev
        prev = depth[x]
        codes[x] = format(code, f"0{depth[x]}b")
        code += 1
    return Compressor(src, b, tuple(codes))


@dataclass(frozen=True)
class Frame:
    """Out-of-band framing: source padding symbols, bit count, bit padding."""

    n_symbols: int
    source_pad: int
    n_bits: int
    bit_pad: int


def pipeline_encode(comp: Compressor, shaper: ShapingCode, symbols: Sequence[int],
                    v0: Optional[int] = None) -> tuple[list[tuple[int, int]], Frame]:
    if shaper.alphabet_size != 2:
        raise ValueError("the shaping stage must be binary")
    bits, spad = comp.compress(symbols)
    q = shaper.q
    bpad = (-len(bits)) % q
    stream = bits + "0" * bpad
    path = encode(shaper, [int(c) for c in stream], v0)
    return path, Frame(len(symbols), spad, len(bits), bpad)


def pipeline_decode(comp: Compressor, shaper: ShapingCode, path, frame: Frame,
                    v0: Optional[int] = None) -> list[int]:
    bits = "".join(str(s) for s in decode(shaper, path, v0))
    bits = bits[: frame.n_bits]
    return comp.decompress(bits, frame.source_pad)


@dataclass(frozen=True)
class PipelineResult:
    b: int
    q: int
    n_symbols: int
    bits_per_symbol: float  # measured compression rate
    cost_per_symbol: float  # original-channel cost
    f: float  # edges per source symbol
    edges_per_bit: float
    target: float  # H(X)/S*
    gap: float  # cost_per_symbol - target
    f_target: Optional[float] = None  # type-I target expansion factor, when given


def pipeline_total_cost(comp: Compressor, shaper: ShapingCode, g: CostGraph, n: int, seed: int = 0,
                        v0: Optional[int] = None, f_target: Optional[float] = None) -> PipelineResult:
    """Measured original-channel cost per source symbol over n SplitMix64 symbols."""
    src = comp.src
    sym = SplitMix64(seed).symbols(src.probs, n)
    path, frame = pipeline_encode(comp, shaper, sym, v0)
    arr = np.array(path, dtype=np.int64).reshape(-1, 2)
    cost = float(g.weights[arr[:, 0], arr[:, 1]].sum()) if len(arr) else 0.0
    target = t_min(g, src.entropy).T
    per = cost / n
    return PipelineResult(comp.b, shaper.q, n, frame.n_bits / n, per, len(arr) / n,
                          len(arr) / max(frame.n_bits + frame.bit_pad, 1), target, per - target, f_target)


def type1_shaper(g: CostGraph, Hx: float, f: float, q: int) -> tuple[ShapingCode, float]:
    """Binary Varn code for the type-I problem after compression.

    A compressed stream carries about H(X) bits per source symbol, so the
    shaper needs f' = f/H(X) edges per bit, i.e. entropy 1/f' bits per edge;
    the code is built on the modified channel at the matching S.
    Returns the code and f'.
    """
    fprime = f / Hx
    S = solve_S_for_entropy(g, 1.0 / fprime)
    return build_varn(modified_costs(g, S), q, 2), fprime
