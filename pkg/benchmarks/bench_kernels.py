"""Time each array kernel under the numba and numpy backends.

    python3 benchmarks/bench_kernels.py [--states 20000] [--repeat 5]

The first numba call per kernel compiles (or loads the on-disk cache); it is
reported separately and excluded from the steady-state timings.
"""

import argparse
import time

import numpy as np

from rmoore import _kernels
from rmoore.examples import make_network
from rmoore.product import expand_product


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads(n_states, seed=0):
    rng = np.random.default_rng(seed)
    k = 3
    delta = rng.integers(0, n_states, size=(n_states, k))
    gamma = rng.integers(0, 4, size=n_states)
    # a renumbered copy is equivalent, so the pair search must exhaust every reachable pair
    perm = rng.permutation(n_states)
    inv = np.argsort(perm)
    delta2, gamma2, start2 = inv[delta[perm]], gamma[perm], int(inv[0])
    small = rng.integers(0, 7, size=(2, 7))  # monoid of a random 7-state machine
    words = rng.integers(0, k, size=(50_000, 12))
    net = expand_product(make_network())
    return {
        "bfs_order": lambda use: _kernels.bfs_order(delta, 0, use=use),
        "refine_round": lambda use: _kernels.refine_round(delta, gamma, use=use),
        "pair_bfs": lambda use: _kernels.pair_bfs(delta, gamma, 0, delta2, gamma2, start2, use=use),
        "closure": lambda use: _kernels.closure(small, 1_000_000, use=use),
        "run_words": lambda use: _kernels.run_words(delta, 0, words, use=use),
        "refine_round(network)": lambda use: _kernels.refine_round(net.delta, net.gamma, use=use),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--states", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    print(f"{'kernel':<24}{'first numba':>12}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    for name, fn in workloads(args.states).items():
        t0 = time.perf_counter()
        fn("numba")
        first = time.perf_counter() - t0
        nb = _time(lambda: fn("numba"), args.repeat)
        np_ = _time(lambda: fn("numpy"), args.repeat)
        print(f"{name:<24}{first * 1e3:>10.1f}ms{nb * 1e3:>10.2f}ms{np_ * 1e3:>10.2f}ms{np_ / nb:>9.1f}x")


if __name__ == "__main__":
    main()
