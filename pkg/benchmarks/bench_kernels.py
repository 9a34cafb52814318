"""Time the compiled and pure-numpy kernel backends on identical inputs.

    python benchmarks/bench_kernels.py --nodes 4096 65536 --repeat 5 --json bench.json
"""
import argparse
import json
import timeit

import numpy as np

from volkovsep import kernels


def cases(nodes, slices, rng):
    values = rng.normal(size=(4, nodes)) + 1j * rng.normal(size=(4, nodes))
    kx, ky, kz = rng.uniform(-3, 3, (3, nodes))
    hist = rng.normal(size=(slices, 4, nodes // slices or 1)) + 0j
    weights = rng.uniform(size=slices)
    return {
        "apply_hamiltonian": lambda b: kernels.apply_hamiltonian(values, kx, ky, kz, 1.0, backend=b),
        "project": lambda b: kernels.project(values, kx, ky, kz, 1.0, -1, backend=b),
        "free_evolve": lambda b: kernels.free_evolve(values, kx, ky, kz, 1.0, 0.3, backend=b),
        "theta_accumulate": lambda b: kernels.theta_accumulate(hist, weights, True, backend=b),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, nargs="+", default=[4096, 65536])
    ap.add_argument("--slices", type=int, default=256, help="time slices for theta_accumulate")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write results here")
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    rng = np.random.default_rng(0)
    rows = []
    print(f"backends: {', '.join(backends)} (default {kernels.BACKEND})")
    print(f"{'kernel':<18}{'nodes':>8}" + "".join(f"{b + ' ms':>14}" for b in backends) + f"{'speedup':>10}")
    for n in args.nodes:
        for name, fn in cases(n, args.slices, rng).items():
            times = {}
            for b in backends:
                fn(b)  # warm up
                times[b] = min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat)) * 1e3
            speed = times["python"] / times["cython"] if "cython" in times else float("nan")
            rows.append({"kernel": name, "nodes": n, "ms": times, "speedup": speed})
            print(f"{name:<18}{n:>8}" + "".join(f"{times[b]:>14.3f}" for b in backends) + f"{speed:>10.2f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
