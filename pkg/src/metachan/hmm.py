"""Hidden Markov analysis of binned photon traces.

Hidden states emit Poisson-distributed window counts; Baum-Welch fits rates
and transitions, Viterbi decodes the jump locations, and the stay
probabilities give per-state dwell times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from ._kernels import hmm_forward_backward, hmm_viterbi
from .stats import PLTrace

BW_MAX_ITER = 300
BW_TOL = 1e-8
INIT_STAY = 0.99
MERGE_RTOL = 0.05


@dataclass(frozen=True)
class HMMModel:
    """k hidden states with Poisson emission rates (counts per window)."""

    rates: np.ndarray    # (k,)
    trans: np.ndarray    # (k, k) row-stochastic
    init: np.ndarray     # (k,)

    def __post_init__(self):
        r = np.asarray(self.rates, float)
        a = np.asarray(self.trans, float)
        p = np.asarray(self.init, float)
        k = r.size
        if a.shape != (k, k) or p.shape != (k,):
            raise ValueError("shape mismatch between rates, trans and init")
        if (r < 0).any():
            raise ValueError("rates must be nonnegative")
        if (a < 0).any() or np.abs(a.sum(axis=1) - 1.0).max() > 1e-10:
            raise ValueError("trans rows must be probability vectors")
        if (p < 0).any() or abs(p.sum() - 1.0) > 1e-10:
            raise ValueError("init must be a probability vector")
        object.__setattr__(self, "rates", r)
        object.__setattr__(self, "trans", a)
        object.__setattr__(self, "init", p)

    @property
    def k(self) -> int:
        return self.rates.size


def _emission_probs(model: HMMModel, counts: np.ndarray) -> np.ndarray:
    return sps.poisson.pmf(counts[:, None], model.rates[None, :])


def log_likelihood(model: HMMModel, trace: PLTrace) -> float:
    """Forward-algorithm log-likelihood of a binned trace; -inf if impossible."""
    counts = trace.counts
    if model.k == 1:
        return float(sps.poisson.logpmf(counts, model.rates[0]).sum())
    b = _emission_probs(model, counts)
    if (b.sum(axis=1) == 0).any():
        return -np.inf
    gamma = np.empty_like(b)
    xi = np.empty((model.k, model.k))
    try:
        return float(hmm_forward_backward(model.init, model.trans, b, gamma, xi))
    except FloatingPointError:
        return -np.inf


def _quantile_init(counts: np.ndarray, k: int) -> HMMModel:
    qs = (np.arange(k) + 1.0) / (k + 1.0)
    rates = np.maximum(np.quantile(counts, qs).astype(float), 1e-6)
    rates += 1e-6 * np.arange(k)  # break exact ties
    off = (1.0 - INIT_STAY) / max(k - 1, 1)
    trans = np.full((k, k), off)
    np.fill_diagonal(trans, INIT_STAY if k > 1 else 1.0)
    init = np.full(k, 1.0 / k)
    return HMMModel(rates=rates, trans=trans, init=init)


def baum_welch(trace: PLTrace, k: int, max_iter: int = BW_MAX_ITER,
               tol: float = BW_TOL) -> tuple[HMMModel, float, bool]:
    """EM fit of a k-state model; returns (model, log-likelihood, converged).

    Deterministic: rates start at quantile-spaced positions with stay
    probability 0.99.  The log-likelihood is non-decreasing across
    iterations; a decrease beyond 1e-9 raises.
    """
    counts = trace.counts
    if k == 1:
        mu = max(float(counts.mean()), 1e-6)
        model = HMMModel(rates=np.array([mu]), trans=np.eye(1), init=np.ones(1))
        return model, log_likelihood(model, trace), True
    if k not in (2, 3):
        raise ValueError("k must be 1, 2 or 3")
    if counts.size < 10 * k:
        raise ValueError(f"trace length {counts.size} too short for k={k}")
    model = _quantile_init(counts, k)
    prev_ll = -np.inf
    converged = False
    for _ in range(max_iter):
        b = _emission_probs(model, counts)
        gamma = np.empty_like(b)
        xi = np.empty((k, k))
        ll = hmm_forward_backward(model.init, model.trans, b, gamma, xi)
        if ll < prev_ll - 1e-9 * max(1.0, abs(ll)):
            raise RuntimeError(f"EM log-likelihood decreased: {prev_ll} -> {ll}")
        occ = gamma.sum(axis=0)
        rates = np.maximum(gamma.T @ counts / np.maximum(occ, 1e-300), 1e-6)
        trans = xi / np.maximum(xi.sum(axis=1, keepdims=True), 1e-300)
        init = gamma[0] / gamma[0].sum()
        model = HMMModel(rates=rates, trans=trans, init=init)
        if np.isfinite(prev_ll) and ll - prev_ll < tol * max(1.0, abs(ll)):
            converged = True
            prev_ll = ll
            break
        prev_ll = ll
    return model, float(prev_ll), converged


def viterbi(model: HMMModel, trace: PLTrace) -> tuple[np.ndarray, float]:
    """Most likely hidden-state path and its log-probability."""
    counts = trace.counts
    log_b = sps.poisson.logpmf(counts[:, None], model.rates[None, :])
    with np.errstate(divide="ignore"):
        log_a = np.log(model.trans)
        log_pi = np.log(model.init)
    path = np.empty(counts.size, np.int64)
    score = hmm_viterbi(log_pi, log_a, log_b, path)
    return path, float(score)


def jump_locations(path: np.ndarray) -> np.ndarray:
    """Bin indices where the decoded state changes (index of the new bin)."""
    return np.nonzero(np.diff(path))[0] + 1


def dwell_times(model: HMMModel, path: np.ndarray, rim_time: float,
                window: int) -> dict:
    """Per-state dwell estimates in seconds.

    formula_s uses T = window * rim_time / (1 - stay probability); an
    absorbing state reports inf.  empirical_s is the mean decoded run length
    of the state times the bin duration; states never visited are listed
    under "absent".
    """
    bin_time = window * rim_time
    out = {"states": [], "absent": []}
    runs = {s: [] for s in range(model.k)}
    if path.size:
        edges = np.concatenate([[0], jump_locations(path), [path.size]])
        for a, b in zip(edges[:-1], edges[1:]):
            runs[int(path[a])].append(b - a)
    for s in range(model.k):
        stay = float(model.trans[s, s])
        formula = np.inf if stay >= 1.0 else bin_time / (1.0 - stay)
        if not runs[s]:
            out["absent"].append(s)
            continue
        out["states"].append({
            "state": s,
            "rate": float(model.rates[s]),
            "stay_probability": stay,
            "formula_s": float(formula),
            "empirical_s": float(np.mean(runs[s]) * bin_time),
            "visits": len(runs[s]),
        })
    return out


def merge_report(model: HMMModel) -> dict:
    """Group states whose rates differ by less than 5% into classes.

    A three-state fit of a trace with a near-degenerate bright pair reports
    one dark and one composite bright class.
    """
    order = np.argsort(model.rates)
    classes = []
    for s in order:
        r = float(model.rates[s])
        if classes and abs(r - classes[-1]["rates"][-1]) \
                <= MERGE_RTOL * max(r, classes[-1]["rates"][-1]):
            classes[-1]["states"].append(int(s))
            classes[-1]["rates"].append(r)
        else:
            classes.append({"states": [int(s)], "rates": [r]})
    for i, c in enumerate(classes):
        c["mean_rate"] = float(np.mean(c["rates"]))
        c["label"] = "dark" if i == 0 else ("bright" if i == len(classes) - 1
                                            else f"mid{i}")
    return {"n_classes": len(classes), "classes": classes}
