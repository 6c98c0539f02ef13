"""Benchmark the numba kernels against the pure-numpy fallback.

Shapes match the three convolution stages of the default model at batch
size 32. Run: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from seiznet import kernels

CASES = [
    ("conv stage 1", (32, 178, 1), (7, 1, 32)),
    ("conv stage 2", (32, 89, 32), (5, 32, 64)),
    ("conv stage 3", (32, 44, 64), (3, 64, 128)),
]


def _time(fn, *args, repeats=30):
    fn(*args)  # warmup / JIT
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats * 1000.0


def main():
    if not kernels.HAS_NUMBA:
        print("numba is not installed; only the numpy path is available")
        return
    rng = np.random.default_rng(0)
    print(f"{'case':<22}{'numba ms':>10}{'numpy ms':>10}{'speedup':>9}")
    for name, xs, ws in CASES:
        x = rng.standard_normal(xs)
        w = rng.standard_normal(ws)
        b = rng.standard_normal(ws[2])
        go = rng.standard_normal(xs[:2] + (ws[2],))

        fwd_nb = _time(kernels.conv1d_forward_numba, x, w, b)
        fwd_np = _time(kernels.conv1d_forward_numpy, x, w, b)
        bwd_nb = _time(kernels.conv1d_backward_numba, x, w, go)
        bwd_np = _time(kernels.conv1d_backward_numpy, x, w, go)
        print(f"{name + ' fwd':<22}{fwd_nb:>10.2f}{fwd_np:>10.2f}{fwd_np / fwd_nb:>8.2f}x")
        print(f"{name + ' bwd':<22}{bwd_nb:>10.2f}{bwd_np:>10.2f}{bwd_np / bwd_nb:>8.2f}x")

    x = rng.standard_normal((32, 178, 32))
    out, idx = kernels.maxpool_forward_numba(x)
    go = rng.standard_normal(out.shape)
    fwd_nb = _time(kernels.maxpool_forward_numba, x)
    fwd_np = _time(kernels.maxpool_forward_numpy, x)
    bwd_nb = _time(kernels.maxpool_backward_numba, go, idx, x.shape[1])
    bwd_np = _time(kernels.maxpool_backward_numpy, go, idx, x.shape[1])
    print(f"{'maxpool fwd':<22}{fwd_nb:>10.2f}{fwd_np:>10.2f}{fwd_np / fwd_nb:>8.2f}x")
    print(f"{'maxpool bwd':<22}{bwd_nb:>10.2f}{bwd_np:>10.2f}{bwd_np / bwd_nb:>8.2f}x")
    print("\nactive path:", "numba" if kernels.USE_NUMBA else "numpy",
          "(set SEIZNET_NO_NUMBA=1 to force numpy)")


if __name__ == "__main__":
    main()
