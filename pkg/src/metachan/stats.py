"""Measurement statistics: polarization, expected rates, binned traces,
Poisson-mixture peak fitting and threshold readout fidelity.

Window sums of rare photon events are modeled as Poisson mixtures; the
number of resolvable peaks in a histogram is the mixture order selected by
the Bayesian information criterion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .channel import PhotonResolvedChannel, QuantumChannel, measurement_probability

EM_MAX_ITER = 500
EM_TOL = 1e-10


@dataclass(frozen=True)
class PLTrace:
    """Binned photon record: (window_index, summed count) pairs.

    window is the number of measurement cycles per bin, rim_time the
    duration of one cycle in seconds.
    """

    bins: np.ndarray       # (n_bins, 2) int: window index, summed count
    window: int
    rim_time: float

    def __post_init__(self):
        b = np.asarray(self.bins, np.int64).reshape(-1, 2)
        if (b[:, 1] < 0).any():
            raise ValueError("bin counts must be nonnegative")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        object.__setattr__(self, "bins", b)

    @property
    def counts(self) -> np.ndarray:
        return self.bins[:, 1]


@dataclass(frozen=True)
class PoissonMixture:
    """Weighted Poisson components (weight, mean count per window)."""

    weights: np.ndarray
    means: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, float)
        mu = np.asarray(self.means, float)
        if w.shape != mu.shape or w.ndim != 1 or w.size == 0:
            raise ValueError("weights and means must be matching 1-d arrays")
        if (w <= 0).any() or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be positive and sum to 1")
        if (mu < 0).any():
            raise ValueError("means must be nonnegative")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)

    @property
    def k(self) -> int:
        return self.weights.size

    def pmf(self, counts: np.ndarray) -> np.ndarray:
        p = sps.poisson.pmf(np.asarray(counts)[:, None], self.means[None, :])
        return p @ self.weights


def polarization(outcomes) -> float:
    """X = 1/2 - f1 with f1 the frequency of outcome 1 in a binary record."""
    arr = np.asarray(outcomes)
    if arr.size == 0:
        raise ValueError("empty outcome sequence")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("outcomes must be 0/1")
    return float(0.5 - arr.mean())


def fixed_point_frequency(ch: QuantumChannel, rho_fix: np.ndarray) -> float:
    """Asymptotic frequency of probe outcome 1 for a long-lived state."""
    p = measurement_probability(ch, np.asarray(rho_fix, complex), 1)
    if not -1e-9 <= p <= 1 + 1e-9:
        raise ValueError(f"outcome probability {p} outside [0, 1]")
    return float(np.clip(p, 0.0, 1.0))


def expected_photon_rate(ch: PhotonResolvedChannel, rho: np.ndarray) -> float:
    """Mean photons per cycle for a long-lived state: sum_n n p(n|rho)."""
    rho = np.asarray(rho, complex)
    pa = np.array([measurement_probability(ch.base, rho, a) for a in (0, 1)])
    ns = np.arange(ch.n_outcomes)
    return float(ns @ (ch.count_probs @ pa))


def bin_trace(counts, window: int, rim_time: float) -> PLTrace:
    """Sum a per-cycle photon record into windows; a partial tail is dropped."""
    counts = np.asarray(counts, np.int64)
    if window < 1:
        raise ValueError("window must be >= 1")
    n_bins = counts.size // window
    sums = counts[: n_bins * window].reshape(n_bins, window).sum(axis=1)
    bins = np.stack([np.arange(n_bins, dtype=np.int64), sums], axis=1)
    return PLTrace(bins=bins, window=window, rim_time=rim_time)


def _em_fit(counts: np.ndarray, k: int) -> tuple[PoissonMixture, float, bool]:
    """EM for a k-component Poisson mixture; quantile-spaced initialization.

    Returns (mixture, log-likelihood, converged).
    """
    qs = (np.arange(k) + 1.0) / (k + 1.0)
    means = np.quantile(counts, qs).astype(float)
    means = np.maximum(means + 1e-6 * np.arange(k), 1e-6)  # break exact ties
    weights = np.full(k, 1.0 / k)
    ll = -np.inf
    converged = False
    for _ in range(EM_MAX_ITER):
        logp = sps.poisson.logpmf(counts[:, None], means[None, :]) \
            + np.log(weights)[None, :]
        mx = logp.max(axis=1, keepdims=True)
        lse = mx[:, 0] + np.log(np.exp(logp - mx).sum(axis=1))
        new_ll = lse.sum()
        resp = np.exp(logp - lse[:, None])
        nk = resp.sum(axis=0)
        weights = np.maximum(nk, 1e-12) / counts.size
        weights /= weights.sum()
        means = np.maximum(resp.T @ counts / np.maximum(nk, 1e-12), 1e-6)
        if new_ll - ll < EM_TOL * max(1.0, abs(new_ll)):
            ll = new_ll
            converged = True
            break
        ll = new_ll
    order = np.argsort(means)
    mix = PoissonMixture(weights=weights[order], means=means[order])
    return mix, float(ll), converged


def fit_mixture(counts, k_max: int = 4):
    """Fit Poisson mixtures for k = 1..k_max and pick one by BIC.

    Returns (best mixture, selected k, dict k -> (mixture, loglik, bic,
    converged)).  A k-component mixture has 2k - 1 free parameters.
    """
    counts = np.asarray(counts, np.int64)
    if counts.size == 0:
        raise ValueError("empty histogram")
    if not 1 <= k_max <= 4:
        raise ValueError("k_max must be in 1..4")
    fits = {}
    best_k, best_bic = None, np.inf
    for k in range(1, k_max + 1):
        mix, ll, conv = _em_fit(counts, k)
        bic = (2 * k - 1) * np.log(counts.size) - 2 * ll
        fits[k] = (mix, ll, bic, conv)
        if bic < best_bic:
            best_k, best_bic = k, bic
    return fits[best_k][0], best_k, fits


def threshold_fidelity(mix: PoissonMixture, threshold: int) -> tuple[float, float, float]:
    """Classification fidelity of a count threshold on a two-peak mixture.

    Dark is the lower-mean component.  F_dark = P(count <= thr | dark),
    F_bright = P(count > thr | bright), F their mean.
    """
    if mix.k < 2:
        raise ValueError("need at least two components")
    dark = float(mix.means.min())
    bright = float(mix.means.max())
    f_dark = sps.poisson.cdf(threshold, dark)
    f_bright = sps.poisson.sf(threshold, bright)
    return (float((f_dark + f_bright) / 2), float(f_dark), float(f_bright))


def best_threshold(mix: PoissonMixture) -> tuple[int, float, float, float]:
    """Integer threshold maximizing the mean class-conditional fidelity."""
    if mix.k < 2:
        raise ValueError("need at least two components")
    lo = int(mix.means.min())
    hi = int(np.ceil(mix.means.max())) + 1
    best = (lo, -1.0, 0.0, 0.0)
    for thr in range(lo, hi + 1):
        f, fd, fb = threshold_fidelity(mix, thr)
        if f > best[1]:
            best = (thr, f, fd, fb)
    return best
