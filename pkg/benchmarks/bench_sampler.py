"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_sampler.py [--n 20000] [--repeat 3]

Both backends draw from the same counter-based streams, so the outputs are
compared as well as timed.
"""
import argparse
import time

import numpy as np

from subordinator_lab.model import CompoundPoisson, ExponentialJumps, Stable, SubordinatorSpec, TabulatedTail, TemperedStable
from subordinator_lab.regvar import SlowVaryingFn
from subordinator_lab.sampler import TruncationPolicy, batch_passages

CASES = {
    "stable": (SubordinatorSpec(family=Stable(0.5)), 1.0),
    "tempered": (SubordinatorSpec(family=TemperedStable(0.5, 1.0)), 1e-3),
    "cp_exp": (SubordinatorSpec(family=CompoundPoisson(1.0, ExponentialJumps(1.0))), 10.0),
    "tabulated": (SubordinatorSpec(family=TabulatedTail.regularly_varying(0.5, SlowVaryingFn("log_shift"))), 1e3),
}


def best_time(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    policy = TruncationPolicy()
    # compile outside the timed region
    for spec, s in CASES.values():
        batch_passages(spec, s, policy, 10, seed=0, backend="numba")
    print(f"{'case':<10} {'numba [s]':>10} {'numpy [s]':>10} {'speedup':>8}  agree")
    for name, (spec, s) in CASES.items():
        tn, a = best_time(lambda: batch_passages(spec, s, policy, args.n, seed=1, backend="numba"), args.repeat)
        tp, b = best_time(lambda: batch_passages(spec, s, policy, args.n, seed=1, backend="numpy"), args.repeat)
        agree = np.allclose(a.undershoot, b.undershoot, rtol=1e-12, atol=0.0)
        print(f"{name:<10} {tn:>10.4f} {tp:>10.4f} {tp / tn:>8.1f}  {agree}")


if __name__ == "__main__":
    main()
