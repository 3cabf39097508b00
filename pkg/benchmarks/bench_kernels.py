"""Compiled vs numpy kernels: wall time and agreement.

    python benchmarks/bench_kernels.py [--repeat 3]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from stochvolterra import _pykernels
from stochvolterra.fem1d import assemble
from stochvolterra.quadrature import weights_riesz

try:
    from stochvolterra import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases():
    n, J = 1024, 256
    w = weights_riesz(0.5, 1.0 / n, n).omega
    lam = (np.pi * np.arange(1, J + 1)) ** 2
    rng = np.random.default_rng(0)
    dW = rng.standard_normal((n, J)) * 1e-2
    yield "cq_diag n=1024 J=256", lambda k: k.cq_diag(w, 1.0 / n, lam, np.ones(J), dW, n)

    n, m, S = 256, 127, 4
    w = weights_riesz(0.5, 1.0 / n, n).omega
    sys = assemble(m)
    loads = rng.standard_normal((n, S, m)) * 1e-3
    u0 = rng.standard_normal((S, m))
    yield "cq_fem n=256 m=127 S=4", lambda k: k.cq_fem(w, 1.0 / n, sys.h, u0, loads, n)

    yield "philox_normals 4096x256", lambda k: k.philox_normals(7, 3, 0, 4096, 256)

    sub = np.full(4095, -1.0)
    diag = np.full(4096, 2.5)
    rhs = rng.standard_normal(4096)
    yield "tridiag_solve 4096", lambda k: k.tridiag_solve(sub, diag, sub, rhs)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    ns = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels unavailable; build with `pip install -e . --no-build-isolation`")
        return
    print(f"{'kernel':28s} {'cython [s]':>11s} {'python [s]':>11s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, fn in cases():
        tc = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=ns.repeat))
        tp = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=ns.repeat))
        diff = float(np.max(np.abs(np.asarray(fn(_ckernels)) - np.asarray(fn(_pykernels)))))
        print(f"{name:28s} {tc:11.4f} {tp:11.4f} {tp / tc:8.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
