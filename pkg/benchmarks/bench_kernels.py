"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Times each hot kernel on representative shapes, then one end-to-end
CSL round plus k-grad/n+k-1-grad bootstrap, once per backend.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from dboot import kernels
from dboot.bootstrap import dist_boots
from dboot.cluster import Cluster
from dboot.csl import csl_iterates, master_grads_for
from dboot.harness import ExperimentConfig
from dboot.synthdata import sample_dataset, shard


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(rng):
    N, d = 2**16, 8
    X = rng.normal(size=(N, d))
    y = (rng.random(N) < 0.5).astype(float)
    theta = rng.normal(size=d) / 4
    w = rng.integers(0, 3, N).astype(float)
    E = rng.normal(size=(500, 2048))
    Q = rng.normal(size=(d, 2048))
    return {
        "grad_rows logistic N=65536 d=8": lambda impl: kernels.grad_rows(X, y, theta, kernels.LOGISTIC, impl=impl),
        "weighted_moments logistic N=65536 d=8":
            lambda impl: kernels.weighted_moments(X, y, w, theta, kernels.LOGISTIC, impl=impl),
        "block_mean_gradients k=512": lambda impl: kernels.block_mean_gradients(X, y, theta, kernels.LINEAR, 128,
                                                                                impl=impl),
        "multiplier_stats B=500 m=2048 sup": lambda impl: kernels.multiplier_stats(E, Q, kernels.NORM_SUP, impl=impl),
    }


def end_to_end(impl, repeat):
    cfg = ExperimentConfig(d=8, N=2**16, root_seed=1)
    data = sample_dataset(cfg.design(), cfg.N, 0)
    out = {}
    saved = kernels._impl
    kernels._impl = impl
    try:
        for k in (4, 64, 512):
            def run():
                cluster = Cluster(shard(data, k), cfg.model_spec)
                state = next(iter(csl_iterates(cluster, 1)))
                for m in ("kgrad", "nk1grad"):
                    master = master_grads_for(state, cluster) if m == "nk1grad" else None
                    dist_boots(m, state.theta, state.grads_at_prev, state.theta_tilde_inv_hessian,
                               master_grads=master, n=cluster.n, B=500, seed=2)
            out[f"CSL tau=1 + both bootstraps, k={k}"] = best_of(run, repeat)
    finally:
        kernels._impl = saved
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    impls = kernels.implementations()
    names = sorted(impls)
    rng = np.random.default_rng(0)
    rows = []
    for label, fn in kernel_cases(rng).items():
        rows.append((label, {n: best_of(lambda: fn(impls[n]), args.repeat) for n in names}))
    e2e = {n: end_to_end(impls[n], max(1, args.repeat // 4)) for n in names}
    for label in e2e[names[0]]:
        rows.append((label, {n: e2e[n][label] for n in names}))

    width = max(len(r[0]) for r in rows)
    print(f"{'case':<{width}}  " + "  ".join(f"{n:>10}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, t in rows:
        line = f"{label:<{width}}  " + "  ".join(f"{1e3 * t[n]:>8.2f}ms" for n in names)
        if "cython" in t and "python" in t:
            line += f"  {t['python'] / t['cython']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
