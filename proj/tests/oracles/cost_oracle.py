#!/usr/bin/env python3
"""Independent evaluation of the step-time and memory formulas.

Writes data/cost_points.csv: 100 random parameter points with both values
computed in exact rational arithmetic, and prints the pinned golden numbers
used by the unit tests. Regenerate with:  python3 cost_oracle.py
"""
import csv
import random
from fractions import Fraction as F
from pathlib import Path

D0 = 1792
S0 = 256 * 384 * 31


def step_time(d, S, L, B):
    return F(d, D0) * F(S, S0) * (9 + 14 * F(S, S0) + 6 * F(d, D0)) * L * B


def gpu_memory(d, dt, df, L, S, N, o):
    return F(12 * L * (9 * dt * d + 8 * d * d + 2 * df * d), N) + max(
        F(4 * L * (9 * dt * d + 8 * d * d + 2 * df * d), N), F(2 * S * (L * d * o + 18 * d + 2 * df)))


def main():
    rng = random.Random(20260311)
    out = Path(__file__).parent / "data" / "cost_points.csv"
    with out.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["d", "d_t", "d_f", "L", "B", "S", "N", "o", "step_time", "gpu_memory"])
        for _ in range(100):
            d = 128 * rng.randint(2, 64)
            dt = 128 * rng.randint(1, 16)
            df = 4 * d + 128 * rng.randint(-8, 8)
            L = rng.randint(1, 96)
            B = rng.randint(1, 16)
            S = rng.randint(1, 8 * S0)
            N = 2 ** rng.randint(0, 9)
            o = rng.randint(0, 1)
            st = step_time(d, S, L, B)
            gm = gpu_memory(d, dt, df, L, S, N, o)
            w.writerow([d, dt, df, L, B, S, N, o, repr(float(st)), repr(float(gm))])

    pro = step_time(4096, 2 * S0, 60, 1)
    lite = gpu_memory(1792, 512, 7168, 32, S0, 64, 1)
    print("video-pro step_time(S=2*S0, L=60, B=1) =", repr(float(pro)), "exact", pro)
    print("video-lite gpu_memory(S=S0, N=64, o=1) =", repr(float(lite)), "exact", lite)


if __name__ == "__main__":
    main()
