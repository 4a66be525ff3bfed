"""Time the hot kernels under numba and under the pure-numpy fallback.

Each backend runs in its own interpreter because the choice is fixed at import.

    python3 benchmarks/bench_kernels.py --blocks 50 --repeat 3
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
import weakties as w
from weakties.diffusion import run_replications

blocks, repeat = int(sys.argv[1]), int(sys.argv[2])
g = w.generate_community_graph(blocks, 20, 0.6, 2 * blocks, seed=0)
t = w.all_strengths(g)
order = w.removal_order(t, "weak", 0)
grid = np.linspace(0, 1, 101)
params = w.ModelParams(0.0, 0.3)

jobs = {
    "strength": lambda: w.all_strengths(g),
    "components": lambda: w.connected_components(g),
    "bfs": lambda: w.bfs_rings(g, 0),
    "sweep": lambda: w.percolation_sweep(g, order, grid),
    "diffusion": lambda: run_replications(g, t, params, 10, base_seed=1),
}
out = {"backend": w.backend(), "nodes": g.node_count, "edges": g.edge_count}
for name, job in jobs.items():
    job()  # warm-up, includes compilation on the numba side
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        job()
        best = min(best, time.perf_counter() - start)
    out[name] = best
print(json.dumps(out))
"""


def run(disable, blocks, repeat):
    env = dict(os.environ, WEAKTIES_DISABLE_NUMBA="1" if disable else "0")
    res = subprocess.run([sys.executable, "-c", WORKER, str(blocks), str(repeat)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--blocks", type=int, default=50, help="communities of 20 nodes each")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    fast = run(False, args.blocks, args.repeat)
    slow = run(True, args.blocks, args.repeat)
    print(f"graph: {fast['nodes']} nodes, {fast['edges']} edges; best of {args.repeat}")
    print(f"{'kernel':<12}{'numba (s)':>12}{'numpy (s)':>12}{'speedup':>10}")
    for name in ("strength", "components", "bfs", "sweep", "diffusion"):
        print(f"{name:<12}{fast[name]:>12.5f}{slow[name]:>12.5f}{slow[name] / fast[name]:>9.1f}x")


if __name__ == "__main__":
    main()
