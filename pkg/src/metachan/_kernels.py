"""Hot numerical loops: trajectory stepping and HMM recursions.

Each kernel exists as a plain-python/numpy function (suffix ``_py``) and a
jit-compiled alias; the benchmark compares the two and the METACHAN_NUMBA
flag selects which one the rest of the package uses.  Kernels take
preallocated output arrays so the compiled signatures stay simple.
"""

from __future__ import annotations

import numpy as np

from ._accel import maybe_jit


def run_rims_py(m0, m1, m0d, m1d, cp, rho, uniforms, counts,
                snap_stride, snaps, vmat, vmatd, interleave_every):
    """Stochastic evolution of one trajectory over len(uniforms) cycles.

    m0/m1 are the Kraus pair, m0d/m1d their adjoints, cp the (A, 2) photon
    count probabilities.  rho is updated in place; counts receives the photon
    record.  Every snap_stride cycles the state is stored into snaps.  If
    interleave_every > 0, the unitary vmat is applied after each such block.
    Returns the accumulated log-probability of the sampled record.
    """
    n_steps = uniforms.shape[0]
    n_letters = cp.shape[0]
    log_weight = 0.0
    snap_idx = 0
    for s in range(n_steps):
        s0 = np.dot(np.dot(m0, rho), m0d)
        s1 = np.dot(np.dot(m1, rho), m1d)
        q0 = s0[0, 0].real
        q1 = s1[0, 0].real
        for i in range(1, rho.shape[0]):
            q0 += s0[i, i].real
            q1 += s1[i, i].real
        tot = q0 + q1
        u = uniforms[s] * tot
        acc = 0.0
        n = n_letters - 1
        for i in range(n_letters - 1):
            acc += cp[i, 0] * q0 + cp[i, 1] * q1
            if u < acc:
                n = i
                break
        w = cp[n, 0] * q0 + cp[n, 1] * q1
        counts[s] = n
        log_weight += np.log(w / tot)
        rho[:, :] = (cp[n, 0] * s0 + cp[n, 1] * s1) / w
        if interleave_every > 0 and (s + 1) % interleave_every == 0:
            rho[:, :] = np.dot(np.dot(vmat, rho), vmatd)
        if snap_stride > 0 and (s + 1) % snap_stride == 0:
            snaps[snap_idx, :, :] = rho
            snap_idx += 1
    return log_weight


def hmm_forward_backward_py(pi, a, b, gamma, xi_sum):
    """Scaled forward-backward pass for one emission-probability matrix.

    b is (T, K) with b[t, k] = p(obs_t | state k).  gamma (T, K) receives the
    posterior state marginals and xi_sum (K, K) the summed pair posteriors
    used by the transition update.  Returns the log-likelihood.
    """
    t_len, k = b.shape
    alpha = np.empty((t_len, k))
    beta = np.empty((t_len, k))
    scale = np.empty(t_len)
    for j in range(k):
        alpha[0, j] = pi[j] * b[0, j]
    scale[0] = alpha[0].sum()
    alpha[0] /= scale[0]
    for t in range(1, t_len):
        for j in range(k):
            acc = 0.0
            for i in range(k):
                acc += alpha[t - 1, i] * a[i, j]
            alpha[t, j] = acc * b[t, j]
        scale[t] = alpha[t].sum()
        alpha[t] /= scale[t]
    beta[t_len - 1] = 1.0
    for t in range(t_len - 2, -1, -1):
        for i in range(k):
            acc = 0.0
            for j in range(k):
                acc += a[i, j] * b[t + 1, j] * beta[t + 1, j]
            beta[t, i] = acc / scale[t + 1]
    loglik = 0.0
    for t in range(t_len):
        loglik += np.log(scale[t])
        norm = 0.0
        for j in range(k):
            gamma[t, j] = alpha[t, j] * beta[t, j]
            norm += gamma[t, j]
        gamma[t] /= norm
    xi_sum[:, :] = 0.0
    for t in range(t_len - 1):
        for i in range(k):
            for j in range(k):
                xi_sum[i, j] += (alpha[t, i] * a[i, j] * b[t + 1, j]
                                 * beta[t + 1, j] / scale[t + 1])
    return loglik


def hmm_viterbi_py(log_pi, log_a, log_b, path):
    """Most likely state path; returns its log-probability."""
    t_len, k = log_b.shape
    delta = np.empty((t_len, k))
    back = np.zeros((t_len, k), np.int64)
    for j in range(k):
        delta[0, j] = log_pi[j] + log_b[0, j]
    for t in range(1, t_len):
        for j in range(k):
            best = delta[t - 1, 0] + log_a[0, j]
            arg = 0
            for i in range(1, k):
                cand = delta[t - 1, i] + log_a[i, j]
                if cand > best:
                    best = cand
                    arg = i
            delta[t, j] = best + log_b[t, j]
            back[t, j] = arg
    last = 0
    best = delta[t_len - 1, 0]
    for j in range(1, k):
        if delta[t_len - 1, j] > best:
            best = delta[t_len - 1, j]
            last = j
    path[t_len - 1] = last
    for t in range(t_len - 2, -1, -1):
        path[t] = back[t + 1, path[t + 1]]
    return best


run_rims = maybe_jit(run_rims_py)
hmm_forward_backward = maybe_jit(hmm_forward_backward_py)
hmm_viterbi = maybe_jit(hmm_viterbi_py)
