"""Compare the jit-compiled kernels against the pure numpy/python fallback.

Usage: python benchmarks/bench_kernels.py [--steps N] [--bins N]
"""

import argparse
import time

import numpy as np

from metachan import NVParams, WeakReadout, rim_kraus, to_dephasing_model, weak_kraus
from metachan import _kernels
from metachan._accel import NUMBA_ENABLED


def _traj_args(n_steps, seed=0):
    ch = weak_kraus(rim_kraus(to_dephasing_model(NVParams())),
                    WeakReadout(0.065, 0.049))
    m0, m1 = (np.ascontiguousarray(k) for k in ch.base.kraus)
    cp = np.ascontiguousarray(ch.count_probs)
    rho = np.eye(3, dtype=complex) / 3
    uniforms = np.random.default_rng(seed).random(n_steps)
    counts = np.zeros(n_steps, np.int64)
    eye = np.eye(3, dtype=complex)
    return (m0, m1, m0.conj().T.copy(), m1.conj().T.copy(), cp, rho,
            uniforms, counts, 0, np.zeros((0, 3, 3), complex), eye, eye, 0)


def _hmm_args(n_bins, seed=0):
    rng = np.random.default_rng(seed)
    states = (rng.random(n_bins) < 0.5).astype(int)
    counts = rng.poisson(np.where(states, 300, 150))
    from scipy.stats import poisson
    b = poisson.pmf(counts[:, None], np.array([150.0, 300.0])[None, :])
    pi = np.array([0.5, 0.5])
    a = np.array([[0.99, 0.01], [0.01, 0.99]])
    return pi, a, b, np.empty_like(b), np.empty((2, 2))


def bench(label, fn, args, repeat=3):
    fn(*[a.copy() if isinstance(a, np.ndarray) else a for a in args])  # warmup/jit
    best = np.inf
    for _ in range(repeat):
        call_args = [a.copy() if isinstance(a, np.ndarray) else a for a in args]
        t0 = time.perf_counter()
        fn(*call_args)
        best = min(best, time.perf_counter() - t0)
    print(f"{label:40s} {best * 1e3:10.2f} ms")
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--bins", type=int, default=100_000)
    args = ap.parse_args()

    print(f"numba enabled: {NUMBA_ENABLED}")
    targs = _traj_args(args.steps)
    t_py = bench(f"trajectory fallback ({args.steps} steps)",
                 _kernels.run_rims_py, targs)
    if NUMBA_ENABLED:
        t_nb = bench(f"trajectory njit ({args.steps} steps)",
                     _kernels.run_rims, targs)
        print(f"{'speedup':40s} {t_py / t_nb:10.1f} x")

    hargs = _hmm_args(args.bins)
    h_py = bench(f"forward-backward fallback ({args.bins} bins)",
                 _kernels.hmm_forward_backward_py, hargs)
    if NUMBA_ENABLED:
        h_nb = bench(f"forward-backward njit ({args.bins} bins)",
                     _kernels.hmm_forward_backward, hargs)
        print(f"{'speedup':40s} {h_py / h_nb:10.1f} x")


if __name__ == "__main__":
    main()
