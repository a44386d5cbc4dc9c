"""Compare the compiled and numpy SC kernels.

Part one times the raw SC sweep in-process through ``SCTree(kernels=...)``.
Part two times full encode + decode frames in a fresh interpreter per
backend, since the backend is picked at import.

    python3 benchmarks/bench_backends.py [--M 256] [--L 64] [--frames 5]
"""
import argparse
import json
import os
import statistics
import subprocess
import sys
import time

import numpy as np

from polarshape import _backend
from polarshape.sc import SAMPLE, SCTree

FRAME_SCRIPT = """
import json, statistics, sys, time
from polarshape import _backend
from polarshape.channels import builtin_channel, transmit
from polarshape.code import DecodeFailure, build_code, decode, encode
from polarshape.core import RandomStream
L, M, frames = map(int, sys.argv[1:4])
ch = builtin_channel("zchannel", [0.3])
spec = build_code(ch, None, L, M, samples=20, seed=1, target_rate=0.3)
rs = RandomStream(3)
enc, dec = [], []
for t in range(frames):
    msg = rs.bits(spec.message_length)
    t0 = time.perf_counter()
    x = encode(spec, msg, t)
    t1 = time.perf_counter()
    y = transmit(ch, x, rs)
    t2 = time.perf_counter()
    try:
        decode(spec, y, t)
    except DecodeFailure:
        pass
    dec.append(time.perf_counter() - t2)
    enc.append(t1 - t0)
print(json.dumps({"backend": _backend.BACKEND, "encode": statistics.median(enc),
                  "decode": statistics.median(dec)}))
"""


def time_sweep(kernels, B, N, reps):
    leaf = np.random.default_rng(0).normal(1.0, 2.0, (B, N))
    unif = np.random.default_rng(1).random((B, N))
    rules = np.full(N, SAMPLE, dtype=np.int8)
    best = []
    for _ in range(reps):
        t = SCTree(leaf, kernels=kernels)
        t0 = time.perf_counter()
        t.sweep(N, rules, unif=unif)
        best.append(time.perf_counter() - t0)
    return statistics.median(best)


def time_frames(backend, L, M, frames):
    env = dict(os.environ, POLARSHAPE_BACKEND=backend)
    out = subprocess.run([sys.executable, "-c", FRAME_SCRIPT, str(L), str(M), str(frames)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=int, default=64)
    ap.add_argument("--M", type=int, default=256)
    ap.add_argument("--frames", type=int, default=5)
    ap.add_argument("--reps", type=int, default=5)
    args = ap.parse_args()
    names = ["python"] + (["cython"] if _backend._kernels is not None else [])
    print("sc sweep (median seconds)")
    print(f"{'B x N':>12} " + " ".join(f"{n:>10}" for n in names) + "   speedup")
    for B, N in ((256, 64), (64, 1024), (1, 4096)):
        ts = [time_sweep(_backend.kernels(n), B, N, args.reps) for n in names]
        sp = f"{ts[0] / ts[-1]:8.1f}x" if len(ts) > 1 else ""
        print(f"{f'{B} x {N}':>12} " + " ".join(f"{t:10.4f}" for t in ts) + "  " + sp)
    print(f"\nframe timing, L={args.L}, M={args.M} (median seconds per frame)")
    for n in names:
        r = time_frames(n, args.L, args.M, args.frames)
        print(f"{r['backend']:>8}: encode {r['encode']:.4f}  decode {r['decode']:.4f}")


if __name__ == "__main__":
    main()
