"""Compiled vs pure-Python kernel timings.

Usage: python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]
"""

import argparse
import json
import time

import numpy as np

from outliermbc import _backend, dissim, init, numcore, simgen
from outliermbc._backend import pure
from outliermbc.numcore import log_beta
from outliermbc.sequencer import run_sequence


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def _swap(kernels):
    for mod in (dissim, init, numcore):
        mod.kernels = kernels


def cases():
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 1, 100_000)
    v = np.sort(rng.beta(1.0, 450.0, 1000))
    w = np.full(v.size, 1.0 / v.size)
    lb = log_beta(1.0, 450.0)
    X1k = rng.standard_normal((1000, 2))
    X4k = simgen.illustrative_dataset("large", 1).data
    tcl = simgen.generate(simgen.tclust_scenario(2, "equal", 1, 1)).data
    return [
        ("betainc 1e5 points", lambda k: k.betainc(1.0, 450.0, x, lb)),
        ("grid_gap n=1000 T=1e4", lambda k: k.grid_gap(v, w, 1.0, 450.0, lb, 10_000)),
        ("ward_merges n=1000", lambda k: k.ward_merges(X1k)),
        ("ward_merges n=4040", lambda k: k.ward_merges(X4k)),
        ("run_sequence tclust n=1000 M=50", lambda k: (_swap(k), run_sequence(tcl, 3, 50))),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="also write results here")
    args = ap.parse_args(argv)
    backends = {"pure": pure}
    if _backend.compiled is not None:
        backends["compiled"] = _backend.compiled
    else:
        print("compiled extension unavailable; timing the pure backend only")
    original = _backend.kernels
    rows = []
    try:
        for name, fn in cases():
            t = {b: best_of(lambda: fn(k), args.repeat) for b, k in backends.items()}
            rows.append({"case": name, **t})
    finally:
        _swap(original)
    print(f"{'case':34s} {'pure [s]':>10s} {'compiled [s]':>13s} {'speedup':>8s}")
    for r in rows:
        c = r.get("compiled")
        speed = f"{r['pure'] / c:8.1f}" if c else "     n/a"
        print(f"{r['case']:34s} {r['pure']:10.4f} {c if c else float('nan'):13.4f} {speed}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
