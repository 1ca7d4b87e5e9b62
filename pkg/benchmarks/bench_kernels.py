"""Compare the numba and numpy backends on the hot loops and on full kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

Each row reports the best wall time per backend, the speed-up and the
relative sup difference between the two results.
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from wignerfio import _accel
from wignerfio.fio import OperatorSpec, apply_fio1
from wignerfio.grid import Grid1D
from wignerfio.kernel import kernel_grid, kernel_type1_direct
from wignerfio.testfuncs import gaussian


def _best(fn, repeat):
    fn()  # warm-up (JIT compilation)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def _values(x):
    return getattr(x, "values", x)


def cases():
    rng = np.random.default_rng(0)
    f = rng.normal(size=1024) + 1j * rng.normal(size=1024)
    K = rng.normal(size=(160, 160)) + 1j * rng.normal(size=(160, 160))
    ia = np.repeat(np.arange(48, 112, 2), 32)
    ib = np.tile(np.arange(48, 112, 2), 32)
    P = rng.uniform(-4, 4, (512, 512))
    S = rng.normal(size=(512, 512)) + 0j
    v = rng.normal(size=512) + 0j
    grid = Grid1D(16.0, 512)
    g = gaussian(grid)
    spec_fio = OperatorSpec.from_catalog("type-I", "sin_perturbed", "gaussian")
    spec_k = OperatorSpec.from_catalog("type-I", "sin_perturbed", "bracket", {}, {"m": -8})
    kg = kernel_grid()
    return {
        "lag_products (M=1024)": lambda b: _accel.lag_products(f, f, b),
        "lag_products_2d (1024 slices, 64x64)": lambda b: _accel.lag_products_2d(K, ia, ib, 32, 32, b),
        "oscillatory_rowsum (512x512)": lambda b: _accel.oscillatory_rowsum(P, S, v, b),
        "apply_fio1 (M=512)": lambda b: apply_fio1(spec_fio, g, b),
        "kernel_type1_direct (M=32, m=-8)": lambda b: kernel_type1_direct(spec_k, kg, backend=b),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="write results to this file")
    args = ap.parse_args(argv)
    if _accel.numba is None:
        raise SystemExit("numba is not installed; nothing to compare")
    rows = []
    print(f"{'case':40s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speed-up':>9s} {'rel diff':>9s}")
    for name, fn in cases().items():
        t_nb, out_nb = _best(lambda: fn("numba"), args.repeat)
        t_np, out_np = _best(lambda: fn("numpy"), args.repeat)
        a, b = _values(out_nb), _values(out_np)
        diff = float(np.max(np.abs(a - b)) / np.max(np.abs(b)))
        rows.append({"case": name, "numba": t_nb, "numpy": t_np, "speedup": t_np / t_nb, "rel_diff": diff})
        print(f"{name:40s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:9.2f} {diff:9.1e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return rows


if __name__ == "__main__":
    main()
