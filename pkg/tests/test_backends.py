import json
import os
import subprocess
import sys

import weakties

SCRIPT = r"""
import hashlib, json
import numpy as np
import weakties as w
from weakties.diffusion import run_replications

def h(*arrays):
    d = hashlib.sha256()
    for a in arrays:
        d.update(np.ascontiguousarray(a).tobytes())
    return d.hexdigest()

g = w.generate_community_graph(12, 10, 0.5, 20, seed=3)
g = g.edge_subgraph(np.random.default_rng(0).random(g.edge_count) < 0.9)
t = w.all_strengths(g)
out = {"backend": w.backend()}
out["strength"] = h(t.common, t.strength)
out["components"] = h(w.connected_components(g).labels)
out["bfs"] = h(w.bfs_rings(g, 5))
sw = w.percolation_sweep(g, w.removal_order(t, "weak", 1), np.linspace(0, 1, 21))
out["sweep"] = h(sw.s_bar, sw.f_gcc)
runs = run_replications(g, t, w.ModelParams(-1.0, 0.4), 6, base_seed=2)
out["diffusion"] = h(*[r.published for r in runs], *[r.coverage for r in runs])
print(json.dumps(out))
"""


def run(disable: bool) -> dict:
    env = dict(os.environ)
    env["WEAKTIES_DISABLE_NUMBA"] = "1" if disable else "0"
    res = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def test_numpy_fallback_matches_numba():
    fast = run(disable=False)
    slow = run(disable=True)
    assert fast.pop("backend") == "numba"
    assert slow.pop("backend") == "numpy"
    assert fast == slow


def test_backend_name():
    assert weakties.backend() in ("numba", "numpy")
