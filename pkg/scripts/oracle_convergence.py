"""Brute-force path-count rates against the spectral capacities."""

from shapingcodes.channel_model import builtin_channel
from shapingcodes.oracle import rate_avg_cost, rate_exact_cost
from shapingcodes.spectral import solve_S_for_W, solve_S_star


def main() -> None:
    plastic = builtin_channel("plastic")
    S = solve_S_star(plastic)
    print(f"plastic exact-cost rate vs S* = {S:.6f}")
    for W in (25, 50, 100, 200, 400):
        r = rate_exact_cost(plastic, W)
        print(f"  W = {W:4d}  rate = {r:.6f}  gap = {S - r:.6f}")
    flash = builtin_channel("flash")
    for W in (1.5, 2.0, 2.75):
        _, C = solve_S_for_W(flash, W)
        print(f"flash average-cost rate vs C_I({W}) = {C:.6f}")
        for n in (10, 20, 40, 60):
            r = rate_avg_cost(flash, n, W)
            print(f"  n = {n:3d}  rate = {r:.6f}  gap = {C - r:.6f}")


if __name__ == "__main__":
    main()
