"""Benchmark the compiled kernels against the NumPy fallback.

Times the two hot kernels (pairwise feasibility scan, per-step feature
encoding) in isolation and an end-to-end episode loop with each backend
swapped in. Run:

    python benchmarks/bench_kernels.py
"""

import math
import time

import numpy as np

from optisl import kernels
from optisl.kernels import _pure
from optisl.optics import OpticalParams
from optisl.orbital import ConstellationConfig, Gateway
from optisl.rl.episode import run_episode
from optisl.rl.policy import PolicyParams
from optisl.scenario import RoutingParams, prepare_scenario, scenario_graph

try:
    from optisl.kernels import _core
except ImportError:
    _core = None


def timeit(fn, repeat: int) -> float:
    fn()  # warm up
    start = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - start) / repeat


def bench_pairwise(backend, m: int, repeat: int) -> float:
    rng = np.random.default_rng(m)
    pos = np.ascontiguousarray(rng.uniform(-3e6, 3e6, size=(m, 3)))
    plane = rng.integers(0, 40, size=m).astype(np.int32)
    busy = (rng.random(m) < 0.05).astype(np.uint8)
    return timeit(lambda: backend.pairwise_edges(pos, plane, busy, 2.88e6, 1.44e6), repeat)


def bench_encode(backend, repeat: int) -> float:
    rng = np.random.default_rng(7)
    m = 80
    pos = np.ascontiguousarray(rng.uniform(-3e6, 3e6, size=(m, 3)))
    plane = rng.integers(0, 40, size=m).astype(np.int32)
    busy = (rng.random(m) < 0.05).astype(np.uint8)
    src, dst, lengths, intra, deg, blocked = _pure.pairwise_edges(
        pos, plane, busy, 2.88e6, 1.44e6
    )
    indptr = np.zeros(m + 1, dtype=np.int32)
    np.cumsum(np.bincount(src, minlength=m), out=indptr[1:])
    visited = np.zeros(m, dtype=np.uint8)
    visited[:10] = 1
    args = (indptr, dst, lengths, intra, pos, deg, blocked, visited, 11, 60, 5e6, 16, 2.88e6, 1.44e6)
    return timeit(lambda: backend.encode_step(*args), repeat)


def bench_episode(impl, repeat: int) -> float:
    saved = (kernels.pairwise_edges, kernels.encode_step)
    kernels.pairwise_edges = impl.pairwise_edges
    kernels.encode_step = impl.encode_step
    try:
        ctx = prepare_scenario(
            ConstellationConfig(),
            OpticalParams(),
            RoutingParams(),
            Gateway("doha", math.radians(25.2854), math.radians(51.5310)),
            Gateway("london", math.radians(51.5074), math.radians(-0.1278)),
        )
        params = PolicyParams.random_init(np.random.default_rng(0))
        rng = np.random.default_rng(1)

        def one():
            t = float(rng.uniform(0, 5400))
            g = scenario_graph(ctx, t, congestion_seed=int(rng.integers(2**31)))
            run_episode(g, params, g.source_sat, g.dest_sat, 0.3, 32, rng)

        return timeit(one, repeat)
    finally:
        kernels.pairwise_edges, kernels.encode_step = saved


def main() -> None:
    backends = [("pure", _pure)]
    if _core is not None:
        backends.append(("compiled", _core))
    else:
        print("compiled backend unavailable; timing the fallback only\n")

    rows = []
    for name, impl in backends:
        rows.append(
            (
                name,
                bench_pairwise(impl, 72, 300) * 1e6,
                bench_pairwise(impl, 1000, 10) * 1e3,
                bench_encode(impl, 2000) * 1e6,
                bench_episode(impl, 150) * 1e3,
            )
        )

    header = f"{'backend':<10} {'pairwise M=72':>14} {'pairwise M=1000':>16} {'encode step':>12} {'episode':>10}"
    print(header)
    print("-" * len(header))
    for name, pw_small, pw_big, enc, ep in rows:
        print(f"{name:<10} {pw_small:>11.1f} us {pw_big:>13.2f} ms {enc:>9.1f} us {ep:>7.2f} ms")
    if len(rows) == 2:
        print(
            f"\nspeedup (pure/compiled): pairwise M=72 {rows[0][1] / rows[1][1]:.1f}x, "
            f"M=1000 {rows[0][2] / rows[1][2]:.1f}x, encode {rows[0][3] / rows[1][3]:.1f}x, "
            f"episode {rows[0][4] / rows[1][4]:.2f}x"
        )


if __name__ == "__main__":
    main()
