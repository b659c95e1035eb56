"""Monte Carlo photon-count trajectories of the bath state.

Each trajectory draws a photon record step by step from the photon-resolved
channel and conditions the bath state on it.  Randomness is counter-based:
trajectory i uses ``SeedSequence((master_seed, i))``, so any subset of
trajectories can be reproduced independently and batches merge by index.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from ._kernels import run_rims
from .channel import PhotonResolvedChannel

DARK_STATE = np.diag([1.0, 0.0, 0.0]).astype(complex)
BRIGHT_STATE = np.diag([0.0, 0.5, 0.5]).astype(complex)

MAX_ENUM_BRANCHES = 10_000_000


@dataclass(frozen=True)
class SimConfig:
    """Inputs of a trajectory batch.

    n_steps measurement cycles per trajectory, snapshot_stride > 0 stores the
    conditioned state every that many cycles.  interleave_unitary, if given,
    is applied every interleave_every cycles.
    """

    channel: PhotonResolvedChannel
    initial_state: np.ndarray
    n_steps: int
    master_seed: int = 0
    snapshot_stride: int = 0
    interleave_unitary: np.ndarray | None = None
    interleave_every: int = 0

    def __post_init__(self):
        rho = linalg._check_state(np.asarray(self.initial_state, complex),
                                  "initial_state")
        object.__setattr__(self, "initial_state", rho)
        if self.n_steps < 0:
            raise ValueError("n_steps must be >= 0")
        if self.snapshot_stride < 0 or self.interleave_every < 0:
            raise ValueError("strides must be nonnegative")
        if (self.interleave_unitary is None) != (self.interleave_every == 0):
            raise ValueError("interleave_unitary and interleave_every go together")
        if self.interleave_unitary is not None:
            v = np.asarray(self.interleave_unitary, complex)
            d = self.channel.dim
            if v.shape != (d, d) or np.abs(v.conj().T @ v - np.eye(d)).max() > 1e-10:
                raise ValueError("interleave_unitary must be unitary of channel dimension")
            object.__setattr__(self, "interleave_unitary", v)

    @property
    def n_snapshots(self) -> int:
        return self.n_steps // self.snapshot_stride if self.snapshot_stride else 0


@dataclass(frozen=True)
class Trajectory:
    """One sampled record with the conditioned-state summaries."""

    index: int
    counts: np.ndarray             # (n_steps,) photon letters
    final_state: np.ndarray        # (d, d)
    log_weight: float              # log p(record)
    snapshot_steps: np.ndarray     # (n_snaps,) 1-based cycle numbers
    fid_dark: np.ndarray           # (n_snaps,) fidelity to the dark extreme
    fid_bright: np.ndarray         # (n_snaps,)

    @property
    def total_photons(self) -> int:
        return int(self.counts.sum())


def step(channel: PhotonResolvedChannel, rho: np.ndarray,
         u: float) -> tuple[int, float, np.ndarray]:
    """One conditioning step driven by a uniform draw u in [0, 1).

    Returns (photon count, its probability, normalized posterior state).
    Reference implementation used by tests; the batch path runs the compiled
    kernel.
    """
    probs = np.array([np.trace(channel.outcome_map(n, rho)).real
                      for n in range(channel.n_outcomes)])
    tot = probs.sum()
    n = int(np.searchsorted(np.cumsum(probs), u * tot, side="right"))
    n = min(n, channel.n_outcomes - 1)
    post = channel.outcome_map(n, rho)
    p = np.trace(post).real
    return n, p / tot, post / p


def run_trajectory(config: SimConfig, index: int) -> Trajectory:
    """Simulate trajectory ``index`` of the batch."""
    ch = config.channel
    m0, m1 = ch.base.kraus
    cp = np.ascontiguousarray(ch.count_probs)
    # the kernel updates rho in place; never hand it the shared config array
    rho = np.array(config.initial_state, complex, order="C", copy=True)
    rng = np.random.default_rng(np.random.SeedSequence((config.master_seed, index)))
    uniforms = rng.random(config.n_steps)
    counts = np.zeros(config.n_steps, np.int64)
    d = ch.dim
    snaps = np.zeros((config.n_snapshots, d, d), complex)
    if config.interleave_unitary is not None:
        v = np.ascontiguousarray(config.interleave_unitary)
    else:
        v = np.eye(d, dtype=complex)
    log_weight = run_rims(
        np.ascontiguousarray(m0), np.ascontiguousarray(m1),
        np.ascontiguousarray(m0.conj().T), np.ascontiguousarray(m1.conj().T),
        cp, rho, uniforms, counts,
        config.snapshot_stride, snaps, v, np.ascontiguousarray(v.conj().T),
        config.interleave_every)
    stride = config.snapshot_stride
    snap_steps = (np.arange(1, config.n_snapshots + 1) * stride if stride
                  else np.zeros(0, np.int64))
    fid_dark = np.array([linalg.fidelity(s, DARK_STATE) for s in snaps])
    fid_bright = np.array([linalg.fidelity(s, BRIGHT_STATE) for s in snaps])
    return Trajectory(index=index, counts=counts, final_state=rho,
                      log_weight=float(log_weight), snapshot_steps=snap_steps,
                      fid_dark=fid_dark, fid_bright=fid_bright)


def _run_one(args):
    config, index = args
    return run_trajectory(config, index)


def default_workers() -> int:
    """Worker count from METACHAN_THREADS; 1 (sequential) when unset."""
    val = os.environ.get("METACHAN_THREADS", "").strip()
    if not val:
        return 1
    n = int(val)
    if n < 1:
        raise ValueError("METACHAN_THREADS must be a positive integer")
    return n


def run_batch(config: SimConfig, n_trajectories: int,
              start_index: int = 0, workers: int | None = None,
              progress=None) -> list[Trajectory]:
    """Run trajectories [start_index, start_index + n); order follows index.

    workers defaults to METACHAN_THREADS.  Results are independent of the
    worker count because seeding is per index.
    """
    if workers is None:
        workers = default_workers()
    indices = range(start_index, start_index + n_trajectories)
    if workers <= 1:
        out = []
        for i in indices:
            out.append(run_trajectory(config, i))
            if progress is not None:
                progress(i)
        return out
    with ProcessPoolExecutor(max_workers=workers) as pool:
        out = list(pool.map(_run_one, [(config, i) for i in indices],
                            chunksize=max(1, n_trajectories // (4 * workers))))
    if progress is not None:
        for i in indices:
            progress(i)
    return out


def enumerate_exact(channel: PhotonResolvedChannel, rho: np.ndarray,
                    n_steps: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact joint distribution over all photon records of length n_steps.

    Returns (records, probs, states): records is (N, n_steps) letters,
    probs the record probabilities (sum to 1), states the normalized
    conditioned states.  N = alphabet^n_steps, refused above 1e7 branches.
    """
    a = channel.n_outcomes
    d = channel.dim
    if a**n_steps > MAX_ENUM_BRANCHES:
        raise ValueError(f"{a}^{n_steps} records exceed the enumeration limit")
    rho = linalg._check_state(np.asarray(rho, complex), "rho")
    states = rho[None, :, :].copy()            # unnormalized; trace = prob
    records = np.zeros((1, 0), np.int64)
    kraus = np.stack(channel.base.kraus)        # (2, d, d)
    cp = channel.count_probs                    # (a, 2)
    for _ in range(n_steps):
        # branch posteriors: sum_alpha cp[n, alpha] M_a rho M_a^dagger
        sand = np.einsum("aij,rjk,alk->rail",
                         kraus, states, kraus.conj())     # (r, a, d, d)
        post = np.einsum("na,rail->rnil", cp, sand)       # (r, a_out, d, d)
        n_old = records.shape[0]
        records = np.concatenate(
            [np.repeat(records, a, axis=0),
             np.tile(np.arange(a, dtype=np.int64), n_old)[:, None]], axis=1)
        states = post.reshape(n_old * a, d, d)
    probs = np.einsum("rii->r", states).real
    norm = np.where(probs > 0, probs, 1.0)
    return records, probs, states / norm[:, None, None]
