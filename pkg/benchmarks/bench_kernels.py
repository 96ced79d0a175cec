"""Time the hot kernels under numba and under plain numpy.

Each kernel is fed inputs taken from real runs (box groups of large cones,
extraction checks around P(1,2,3,4,5), weighted blowups of a point of P^4).
A second section runs a whole link enumeration in a fresh interpreter per
backend, since the backend is fixed at import time.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--skip-end-to-end]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from toric_sarkisov import _kernels as K
from toric_sarkisov.lattice import box_group


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def kernel_inputs():
    # a 4-dimensional cone of determinant 1001 with cyclic box group
    cone = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (-7, -11, -13, 1001)]
    D, gens, orders = box_group(cone)
    D = abs(D)
    box = K.np_group_elements(gens, orders, D)
    pts = K.np_cone_points(box, D, 6 * D)
    V = pts[len(pts) // 2].copy()
    tau = np.ones(4, dtype=np.bool_)
    weights = [np.array(w, dtype=np.int64) for w in [(d, a, b, c) for d in range(1, 13) for a in range(d, 25, 3) for b in range(a, 25, 4) for c in (b, b + 1)]]
    return {
        "group_elements": ((gens, orders, D),),
        "first_low_point": ((gens, orders, D, D),),
        "cone_points": ((box, D, 6 * D),),
        "extraction_violation": ((pts, D, V, tau),),
        "weighted_blowup_terminal": tuple((w,) for w in weights),
    }


def bench_kernels(repeat):
    rows = []
    for name, calls in kernel_inputs().items():
        np_fn = getattr(K, "np_" + name)
        jit_fn = getattr(K, "jit_" + name)
        if jit_fn is None:
            print("numba is not installed; only numpy timings", file=sys.stderr)
        if jit_fn is not None:
            for args in calls:  # compile outside the timed region
                jit_fn(*args)

        def run(fn):
            return lambda: [fn(*a) for a in calls]

        t_np = best_of(run(np_fn), repeat)
        t_jit = best_of(run(jit_fn), repeat) if jit_fn is not None else float("nan")
        rows.append({"kernel": name, "numpy_s": t_np, "numba_s": t_jit, "speedup": t_np / t_jit if jit_fn else None})
    return rows


END_TO_END = """
import time
from toric_sarkisov import _kernels
from toric_sarkisov.classify import wps
from toric_sarkisov.links import enumerate_links
enumerate_links(wps((1, 1, 1, 2)), 1, count_points=False)  # warm up
t = time.perf_counter()
recs = enumerate_links(wps((1, 2, 3, 4, 5)), 5, dedup_symmetry=True, count_points=False)
print(_kernels.BACKEND, time.perf_counter() - t, sum(r.is_complete for r in recs))
"""


def bench_end_to_end():
    out = {}
    for backend in ("numpy", "numba"):
        env = dict(os.environ, TORIC_SARKISOV_BACKEND=backend)
        res = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
        got, secs, links = res.stdout.split()
        out[backend] = {"backend": got, "seconds": float(secs), "complete_links": int(links)}
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-end-to-end", action="store_true")
    ap.add_argument("--json", action="store_true", help="print one JSON document instead of a table")
    args = ap.parse_args()

    rows = bench_kernels(args.repeat)
    e2e = None if args.skip_end_to_end else bench_end_to_end()
    if args.json:
        print(json.dumps({"kernels": rows, "end_to_end": e2e}, indent=2))
        return
    print(f"{'kernel':28s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for r in rows:
        sp = f"{r['speedup']:.1f}x" if r["speedup"] else "-"
        print(f"{r['kernel']:28s} {1e3 * r['numpy_s']:10.3f} {1e3 * r['numba_s']:10.3f} {sp:>8s}")
    if e2e:
        print("\nlinks from P(1,2,3,4,5), dmax 5")
        for b, r in e2e.items():
            print(f"  {b:6s} {r['seconds']:7.2f} s  {r['complete_links']} complete links")
        if e2e["numpy"]["complete_links"] != e2e["numba"]["complete_links"]:
            print("  MISMATCH between backends", file=sys.stderr)
            sys.exit(1)


if __name__ == "__main__":
    main()
