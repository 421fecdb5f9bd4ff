"""Time the compiled pair-sum kernels against the NumPy fallback.

Usage: python3 bench/bench_kernels.py [--repeat 3] [--sizes 256,1024,4096]

Prints one line per kernel and size with the best wall time of each
implementation and the speed-up, and checks that both agree.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from fracvar import _pykernels

try:
    from fracvar import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None


def _cases(size: int, rng: np.random.Generator):
    f = rng.standard_normal(size)
    g = rng.standard_normal(size)
    P = 1.0 / (np.arange(size, dtype=float) + 1.0) ** 1.5
    K = np.sign(np.arange(-(size - 1), size, dtype=float)) / (np.abs(np.arange(-(size - 1), size)) + 1.0) ** 1.5
    idx = np.ascontiguousarray(rng.integers(0, size, 64).astype(np.intp))
    side = max(16, int(np.sqrt(size)))
    f2 = rng.standard_normal((side, side))
    g2 = rng.standard_normal((side, side))
    P2 = 1.0 / (np.add.outer(np.arange(side) ** 2, np.arange(side) ** 2) + 1.0) ** 1.25
    yield "gagliardo_1d", (f, P, 1.0)
    yield "nl_sum_1d", (f, g, K)
    yield "apply_at_1d", (f, K, idx)
    yield f"gagliardo_2d[{side}x{side}]", (f2, P2, 1.0)
    K2 = np.ascontiguousarray(np.random.default_rng(1).standard_normal((2 * side - 1, 2 * side - 1)))
    yield f"nl_sum_2d[{side}x{side}]", (f2, g2, K2)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--sizes", default="256,1024,4096")
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not built; only the NumPy fallback is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':28s} {'size':>6s} {'numpy [s]':>11s} {'cython [s]':>11s} {'speed-up':>9s}  agree")
    for size in (int(s) for s in args.sizes.split(",")):
        for name, inputs in _cases(size, rng):
            base = name.split("[")[0]
            py_fn = getattr(_pykernels, base)
            t_py = min(timeit.repeat(lambda: py_fn(*inputs), number=1, repeat=args.repeat))
            if _ckernels is None:
                print(f"{name:28s} {size:6d} {t_py:11.4g} {'-':>11s} {'-':>9s}  -")
                continue
            c_fn = getattr(_ckernels, base)
            t_c = min(timeit.repeat(lambda: c_fn(*inputs), number=1, repeat=args.repeat))
            agree = np.allclose(np.asarray(py_fn(*inputs)), np.asarray(c_fn(*inputs)), rtol=1e-10, atol=1e-12)
            print(f"{name:28s} {size:6d} {t_py:11.4g} {t_c:11.4g} {t_py / t_c:9.1f}  {agree}")


if __name__ == "__main__":
    main()
