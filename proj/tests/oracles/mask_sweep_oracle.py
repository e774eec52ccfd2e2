#!/usr/bin/env python3
"""Scripted cross-check of the adaptive mask pipeline.

Draws Gaussian q, k of shape [2, 4096, 16], stores them in the engine's binary
tensor format, and computes pooled softmax maps and CDF-thresholded masks in
float64 with NumPy. Writes data/sweep_q.bin, data/sweep_k.bin and
data/mask_sweep.json. Regenerate with:  python3 mask_sweep_oracle.py
"""
import json
import struct
from pathlib import Path

import numpy as np

HEADS, SEQ, DIM, BLOCK = 2, 4096, 16, 64
THRESHOLDS = [0.0, 0.2, 0.4, 0.6, 0.8]


def save_tensor(path, x):
    with open(path, "wb") as f:
        f.write(struct.pack("<Q", x.ndim))
        for e in x.shape:
            f.write(struct.pack("<Q", e))
        f.write(np.ascontiguousarray(x, dtype="<f4").tobytes())


def kept_count(row, thr):
    order = sorted(range(len(row)), key=lambda i: (-row[i], i))
    target = (1.0 - thr) * row.sum()
    acc = 0.0
    for n, i in enumerate(order, start=1):
        acc += row[i]
        if acc >= target * (1 - 1e-12):
            return n
    return len(row)


def main():
    rng = np.random.default_rng(4096)
    q = rng.standard_normal((HEADS, SEQ, DIM)).astype(np.float32)
    k = rng.standard_normal((HEADS, SEQ, DIM)).astype(np.float32)
    data = Path(__file__).parent / "data"
    save_tensor(data / "sweep_q.bin", q)
    save_tensor(data / "sweep_k.bin", k)

    blocks = SEQ // BLOCK
    qp = q.astype(np.float64).reshape(HEADS, blocks, BLOCK, DIM).mean(axis=2)
    kp = k.astype(np.float64).reshape(HEADS, blocks, BLOCK, DIM).mean(axis=2)
    logits = np.einsum("hqd,hkd->hqk", qp, kp) / np.sqrt(DIM)
    logits -= logits.max(axis=2, keepdims=True)
    probs = np.exp(logits)
    probs /= probs.sum(axis=2, keepdims=True)

    rows = []
    for thr in THRESHOLDS:
        kept = [int(sum(kept_count(probs[h, r], thr) for r in range(blocks))) for h in range(HEADS)]
        sparsity = 1.0 - sum(kept) / (HEADS * blocks * blocks)
        rows.append({"thr": thr, "kept_per_head": kept, "sparsity": sparsity})
        print(f"thr={thr:.1f} kept={kept} sparsity={sparsity:.6f}")
    meta = {"heads": HEADS, "seq": SEQ, "head_dim": DIM, "block_size": BLOCK,
            "total_per_head": blocks * blocks, "sweep": rows}
    (data / "mask_sweep.json").write_text(json.dumps(meta, indent=2) + "\n")


if __name__ == "__main__":
    main()
