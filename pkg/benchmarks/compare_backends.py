#!/usr/bin/env python3
"""Compare the compiled and interpreted kernel backends.

Runs the same workloads twice in subprocesses: once with numba active
and once with ``EXTOPO_NO_NUMBA=1``, which selects the plain interpreted
fallback.  Both paths execute identical code and produce identical
results; this script reports how much wall time the JIT saves.

    python3 benchmarks/compare_backends.py
    python3 benchmarks/compare_backends.py --repeat 5 --scale large
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

SCALES = {
    # (diagram vertices, diagram edges, betweenness vertices, landscape vertices)
    "small": (4000, 8000, 300, 800),
    "large": (20000, 40000, 700, 2000),
}


def _tasks(scale: str):
    import numpy as np

    from extopo.filtration import betweenness_centrality, degree_centrality
    from extopo.graphs import random_connected_graph, random_graph
    from extopo.persistence import epd_fast
    from extopo.vectorization import landscape

    dn, dm, bn, ln = SCALES[scale]

    dia_g = random_connected_graph(dn, dm, seed=7)
    dia_f = degree_centrality(dia_g)

    bet_g = random_graph(bn, 0.05, seed=7)

    lan_g = random_connected_graph(ln, 2 * ln, seed=7)
    lan_epd = epd_fast(lan_g, degree_centrality(lan_g))

    return {
        "diagram": lambda: epd_fast(dia_g, dia_f),
        "betweenness": lambda: betweenness_centrality(bet_g),
        "landscape": lambda: landscape(lan_epd, k_max=5, n_samples=300),
    }


def worker(scale: str, repeat: int) -> None:
    from extopo._backend import USING_NUMBA

    tasks = _tasks(scale)
    for fn in tasks.values():  # warm-up: JIT compilation and caches
        fn()
    timings = {}
    for name, fn in tasks.items():
        best = min(_timed(fn) for _ in range(repeat))
        timings[name] = best
    print(json.dumps({"numba": USING_NUMBA, "timings": timings}))


def _timed(fn) -> float:
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def run_backend(disable_numba: bool, scale: str, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("EXTOPO_NO_NUMBA", None)
    if disable_numba:
        env["EXTOPO_NO_NUMBA"] = "1"
    out = subprocess.run(
        [sys.executable, __file__, "--worker", "--scale", scale, "--repeat", str(repeat)],
        env=env,
        check=True,
        capture_output=True,
        text=True,
    )
    payload = json.loads(out.stdout.strip().splitlines()[-1])
    expected = not disable_numba
    if payload["numba"] != expected:
        raise SystemExit(
            "backend selection failed: requested "
            + ("numba" if expected else "fallback")
            + f", worker reports numba={payload['numba']}"
        )
    return payload["timings"]


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3, help="runs per task, best is kept")
    ap.add_argument("--scale", choices=sorted(SCALES), default="small")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)

    if args.worker:
        worker(args.scale, args.repeat)
        return 0

    print(f"scale={args.scale}, best of {args.repeat} runs per task\n")
    jit = run_backend(disable_numba=False, scale=args.scale, repeat=args.repeat)
    plain = run_backend(disable_numba=True, scale=args.scale, repeat=args.repeat)

    width = max(len(k) for k in jit)
    print(f"{'task'.ljust(width)}  {'numba':>10}  {'fallback':>10}  {'speedup':>8}")
    for name in jit:
        ratio = plain[name] / jit[name] if jit[name] > 0 else float("inf")
        print(f"{name.ljust(width)}  {jit[name]:>9.4f}s  {plain[name]:>9.4f}s  {ratio:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
