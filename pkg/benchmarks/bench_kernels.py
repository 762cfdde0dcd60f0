"""Compare the numba DBM kernels with the pure-numpy fallback.

Part 1 times each kernel directly on random closed matrices.  Part 2 runs
the whole engine on voting instances in fresh subprocesses with
``STCTL_NUMBA=1`` and ``STCTL_NUMBA=0``.

    python3 benchmarks/bench_kernels.py [--reps N] [--points 2x2x1,3x3x3]
"""
import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from stctl.zones import _kernels as K

ENGINE_SNIPPET = """
import json, sys, time
from stctl.engine import explore
from stctl.language import parse_model, parse_property
from stctl.voting import generate_voting
from stctl.zones import backend
v, c, k = map(int, sys.argv[1:4])
model, prop = generate_voting(v, c, range(1, k + 1))
n = parse_model(model)
p = parse_property(prop, n)
explore(n, p)  # warm-up, includes any JIT compilation
t0 = time.perf_counter()
r = explore(n, p)
print(json.dumps({"backend": backend(), "seconds": time.perf_counter() - t0,
                  "explored": r.stats.explored, "strategies": len(r.strategies)}))
"""


def random_closed(rng, dim):
    m = (rng.integers(-6, 12, size=(dim, dim)) * 2 + 1).astype(np.int64)
    m[1:, 0] = K.INF
    np.fill_diagonal(m, K.LE_ZERO)
    m[0, 1:] = np.minimum(m[0, 1:], K.LE_ZERO)
    K.close_np(m)
    return m


def kernel_table(reps, dims=(3, 5, 8)):
    if not K.NUMBA_AVAILABLE:
        print("numba is not installed; kernel comparison skipped")
        return
    rng = np.random.default_rng(7)
    print(f"{'kernel':<12}{'dim':>4}{'numpy us':>12}{'numba us':>12}{'speedup':>10}")
    for dim in dims:
        base = random_closed(rng, dim)
        other = random_closed(rng, dim)
        maxc = np.full(dim, 4, dtype=np.int64)
        maxc[0] = 0
        clocks = np.array([1], dtype=np.int64)
        cases = {
            "close": (K.close_np, K.close_nb, lambda: (base.copy(),)),
            "up": (K.up_np, K.up_nb, lambda: (base.copy(),)),
            "reset": (K.reset_np, K.reset_nb, lambda: (base.copy(), clocks)),
            "extrapolate": (K.extrapolate_np, K.extrapolate_nb, lambda: (base.copy(), maxc)),
            "includes": (K.includes_np, K.includes_nb, lambda: (base, other)),
        }
        for name, (np_fn, nb_fn, make) in cases.items():
            nb_fn(*make())  # compile
            times = []
            for fn in (np_fn, nb_fn):
                total = timeit.timeit(lambda: fn(*make()), number=reps)
                times.append(total / reps * 1e6)
            print(f"{name:<12}{dim:>4}{times[0]:>12.2f}{times[1]:>12.2f}{times[0] / times[1]:>9.1f}x")


def engine_table(points):
    print(f"\n{'v':>3}{'c':>3}{'|A|':>5}{'explored':>10}{'numpy s':>10}{'numba s':>10}{'speedup':>10}")
    for v, c, k in points:
        res = {}
        for flag in ("0", "1"):
            env = dict(os.environ, STCTL_NUMBA=flag)
            out = subprocess.run([sys.executable, "-c", ENGINE_SNIPPET, str(v), str(c), str(k)],
                                 capture_output=True, text=True, env=env, check=True).stdout
            res[flag] = json.loads(out)
        if res["0"]["strategies"] != res["1"]["strategies"]:
            print(f"warning: backends disagree on ({v},{c},{k})")
        t_np, t_nb = res["0"]["seconds"], res["1"]["seconds"]
        print(f"{v:>3}{c:>3}{k:>5}{res['1']['explored']:>10}{t_np:>10.3f}{t_nb:>10.3f}{t_np / t_nb:>9.1f}x")


def parse_points(text):
    return [tuple(int(x) for x in p.split("x")) for p in text.split(",")]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=20000)
    ap.add_argument("--points", default="2x2x1,2x3x2,3x3x3")
    args = ap.parse_args(argv)
    kernel_table(args.reps)
    engine_table(parse_points(args.points))


if __name__ == "__main__":
    main()
