"""Compiled vs pure-Python kernels on solver-sized inputs.

    python3 benchmarks/bench_kernels.py [--repeat N] [--json out.json]
"""
from __future__ import annotations

import argparse
import json
import timeit

import numpy as np

from ftlab import _pykernels

try:
    from ftlab import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases(rng):
    n = 4000
    pos = np.sort(rng.uniform(-1, 1, n))
    spd = rng.uniform(-1.5, 1.5, n)
    fam = rng.integers(1, 3, n).astype(np.int64)
    sig = rng.uniform(-0.01, 0.01, n)
    xa, xb = np.sort(rng.uniform(-1, 1, n)), np.sort(rng.uniform(-1, 1, n))
    ua, ub = rng.normal(size=(n + 1, 2)), rng.normal(size=(n + 1, 2))
    vals = rng.normal(size=(1024, 2))
    return {
        "earliest_collision": ("earliest_collision", (pos, spd)),
        "glimm_q": ("glimm_q", (fam, sig)),
        "pc_l1": ("pc_l1", (xa, ua, xb, ub, -0.9, 0.9)),
        "gagliardo": ("gagliardo", (vals, 1e-3, 0.4, 2.0, 2)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--json")
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    rows = []
    for name, (fn, a) in cases(rng).items():
        py = getattr(_pykernels, fn)
        t_py = min(timeit.repeat(lambda: py(*a), number=1, repeat=args.repeat))
        row = {"kernel": name, "python_s": t_py}
        if _ckernels is not None:
            c = getattr(_ckernels, fn)
            r_py, r_c = py(*a), c(*a)
            row["agree"] = bool(np.allclose(r_py, r_c, rtol=1e-10, atol=1e-12))
            t_c = min(timeit.repeat(lambda: c(*a), number=1, repeat=args.repeat))
            row.update(compiled_s=t_c, speedup=t_py / t_c)
        rows.append(row)
    for r in rows:
        extra = f"  compiled {r['compiled_s'] * 1e3:9.3f} ms  x{r['speedup']:6.1f}  agree={r['agree']}" \
            if "compiled_s" in r else "  (compiled backend not built)"
        print(f"{r['kernel']:20s} python {r['python_s'] * 1e3:9.3f} ms{extra}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
