"""Acceptance gate: one test per criterion, one PASS/FAIL line each.

The report lines are written to the real stdout and echoed in the pytest
terminal summary so they stay visible under output capture.  Heavy shared
runs (the desk-scale simulation) are cached at module level.
"""

import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import binom

import conftest

from metachan import cli, hmm, linalg, spectral, stats
from metachan.channel import (
    PureDephasingModel,
    QuantumChannel,
    WeakReadout,
    natural_representation,
    rim_kraus,
    strong_readout,
    weak_kraus,
)
from metachan.nv import NVParams, to_dephasing_model
from metachan.trajectory import SimConfig, enumerate_exact, run_batch, run_trajectory

DARK = np.diag([1.0, 0.0, 0.0]).astype(complex)
BRIGHT = np.diag([0.0, 0.5, 0.5]).astype(complex)

_cache = {}


def report(num, desc, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'} criterion {num:2d}: {desc}"
    if detail:
        line += f" ({detail})"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line, file=sys.__stdout__, flush=True)
    assert ok, line


def nv_channel(**kwargs):
    return rim_kraus(to_dephasing_model(NVParams(**kwargs)))


def desk_run(tmp_root: Path) -> Path:
    """CLI desk-scale simulation, cached across criteria 7, 8 and 11."""
    if "desk" not in _cache:
        out = tmp_root / "desk_a"
        rc = cli.main(["simulate", "--preset", "fig2-desk", "--out", str(out)])
        assert rc == 0
        _cache["desk"] = out
    return _cache["desk"]


@pytest.fixture(scope="module")
def tmp_root(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


def test_criterion_01_cptp_suite():
    t0 = time.time()
    rng = np.random.default_rng(100)
    worst = 0.0
    for i in range(200):
        d = int(rng.integers(2, 5))
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        b = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        model = PureDephasingModel(
            b_op=(a + a.conj().T) / 2, c_op=(b + b.conj().T) / 2,
            tau=float(rng.uniform(0.01, 3.0)),
            delta_phi=float(rng.uniform(0, 2 * np.pi)))
        ch = rim_kraus(model)
        wk = weak_kraus(ch, WeakReadout(n0=float(rng.uniform(0, 1)),
                                        n1=float(rng.uniform(0, 1))))
        worst = max(worst, ch.cptp_deviation(), wk.cptp_deviation())
    dt = time.time() - t0
    report(1, "trace preservation of 200 random channels and photon alphabets",
           worst <= 1e-10 and dt < 5.0,
           f"max deviation {worst:.2e}, {dt:.1f}s")


def test_criterion_02_spectral_correctness():
    t0 = time.time()
    sx = np.array([[0, 1], [1, 0]], complex)
    sy = np.array([[0, -1j], [1j, 0]], complex)
    sz = np.diag([1.0, -1.0]).astype(complex)
    p = 0.2
    dep = QuantumChannel(kraus=tuple(
        [np.sqrt(1 - 3 * p / 4) * np.eye(2)] + [np.sqrt(p / 4) * s
                                                for s in (sx, sy, sz)]))
    w_dep = np.sort(np.abs(spectral.decompose(dep).eigenvalues))
    err_dep = np.abs(w_dep - np.array([0.8, 0.8, 0.8, 1.0])).max()

    thetas = np.array([0.3, -0.2, 0.5])
    u = np.diag(np.exp(-1j * thetas))
    w_uni = np.sort_complex(spectral.decompose(
        QuantumChannel(kraus=(u,))).eigenvalues)
    expected = np.sort_complex(np.exp(
        -1j * (thetas[:, None] - thetas[None, :])).reshape(-1))
    err_uni = np.abs(w_uni - expected).max()

    ch = nv_channel()
    phi = natural_representation(ch)
    spec = spectral.decompose(ch)
    recon = sum(w * np.outer(linalg.vectorize(r), linalg.vectorize(l).conj())
                for w, r, l in zip(spec.eigenvalues, spec.rights, spec.lefts))
    err_rec = np.abs(recon - phi).max()
    dt = time.time() - t0
    report(2, "depolarizing/unitary spectra and 9x9 spectral reconstruction",
           err_dep <= 1e-10 and err_uni <= 1e-9 and err_rec <= 1e-8 and dt < 5.0,
           f"errors {err_dep:.1e}/{err_uni:.1e}/{err_rec:.1e}, {dt:.1f}s")


def test_criterion_03_commuting_qnd_theorem():
    t0 = time.time()
    spec = spectral.decompose(nv_channel(theta=0.0))
    states = spectral.stationary_states(spec)
    projs = [np.diag(e).astype(complex) for e in np.eye(3)]
    fids = [max(linalg.fidelity(s, p) for p in projs) for s in states]
    dt = time.time() - t0
    report(3, "on-axis model has 3 fixed points equal to the nuclear projectors",
           spec.r == 3 and len(states) == 3
           and min(fids) >= 1 - 1e-8 and dt < 2.0,
           f"min fidelity {min(fids):.10f}, {dt:.1f}s")


def test_criterion_04_classification_and_window():
    t0 = time.time()
    spec = spectral.decompose(nv_channel())
    counts = {lab: spec.labels.count(lab) for lab in set(spec.labels)}
    ok_counts = counts == {"fixed": 1, "metastable": 2, "decaying": 6}
    (rho_fix,) = spectral.stationary_states(spec)
    td = linalg.trace_distance(rho_fix, np.eye(3) / 3)
    w = spectral.metastable_window(spec)
    # intervals overlap after stretching ours by the allowed factor of 5
    ok_window = (w.m_lo / 5 <= 2.5e5) and (w.m_hi * 5 >= 6e4)
    dt = time.time() - t0
    report(4, "1+2+6 point classification, I/3 fixed point, window near the "
              "published 6e4-2.5e5 range",
           ok_counts and td <= 1e-6 and ok_window and dt < 5.0,
           f"window [{w.m_lo:.0f}, {w.m_hi:.0f}], fix TD {td:.1e}, {dt:.1f}s")


def test_criterion_05_ems_identification():
    t0 = time.time()
    spec = spectral.decompose(nv_channel())
    e1, e2 = spectral.ems_1d(spec)
    # best assignment of the two extremes to the dark/bright targets
    a = max(linalg.trace_distance(e1.matrix, DARK),
            linalg.trace_distance(e2.matrix, BRIGHT))
    b = max(linalg.trace_distance(e2.matrix, DARK),
            linalg.trace_distance(e1.matrix, BRIGHT))
    worst = min(a, b)
    dt = time.time() - t0
    report(5, "extreme metastable states within trace distance 0.05 of the "
              "dark projector and bright mixture",
           worst <= 0.05 and dt < 2.0,
           f"worst trace distance {worst:.3f}, {dt:.1f}s")


def test_criterion_06_trajectory_channel_equivalence():
    t0 = time.time()
    bs = np.array([0.45, -0.8])
    tau, dphi = 1.0, np.pi / 2
    model = PureDephasingModel(b_op=np.diag(bs), c_op=np.diag([0.2, -0.1]),
                               tau=tau, delta_phi=dphi)
    ch = strong_readout(rim_kraus(model))
    rho0 = np.diag([0.35, 0.65]).astype(complex)
    m = 12
    rec, probs, states = enumerate_exact(ch, rho0, m)
    from metachan.channel import apply_channel
    avg = np.einsum("r,rij->ij", probs, states)
    err_state = np.abs(avg - apply_channel(ch.base, rho0, m)).max()

    ones = rec.sum(axis=1)
    exact_dist = np.zeros(m + 1)
    for n1, p in zip(ones, probs):
        exact_dist[n1] += p
    p1 = np.cos(bs * tau + dphi / 2) ** 2
    wk = np.diag(rho0).real
    ks = np.arange(m + 1)
    mixture = wk[0] * binom.pmf(ks, m, p1[0]) + wk[1] * binom.pmf(ks, m, p1[1])
    tv_exact = np.abs(exact_dist - mixture).sum() / 2

    n_traj = 100_000
    cfg = SimConfig(channel=ch, initial_state=rho0, n_steps=m, master_seed=60)
    mc_dist = np.zeros(m + 1)
    for i in range(n_traj):
        mc_dist[run_trajectory(cfg, i).total_photons] += 1
    mc_dist /= n_traj
    tv_mc = np.abs(mc_dist - exact_dist).sum() / 2
    dt = time.time() - t0
    report(6, "exact enumeration matches the channel power and the binomial "
              "mixture; Monte Carlo matches enumeration",
           err_state <= 1e-10 and tv_exact <= 1e-9 and tv_mc <= 0.02 and dt < 60,
           f"state {err_state:.1e}, TV exact {tv_exact:.1e}, "
           f"TV MC {tv_mc:.3f}, {dt:.0f}s")


def test_criterion_07_desk_scale_bimodality(tmp_root):
    t0 = time.time()
    out = desk_run(tmp_root)
    traces = cli.read_trace_csv(out / "trace.csv")
    all_counts = np.concatenate(list(traces.values()))
    mix_in, k_in, _ = stats.fit_mixture(all_counts)

    # theta = 15 degrees relaxes far faster; at m=6e5 the peaks have merged
    ch15 = weak_kraus(nv_channel(theta=15.0), WeakReadout(0.065, 0.049))
    cfg = SimConfig(channel=ch15, initial_state=np.eye(3) / 3,
                    n_steps=600_000, master_seed=1, snapshot_stride=0)
    counts15 = []
    for t in run_batch(cfg, 300):
        counts15.append(stats.bin_trace(t.counts, 3000, 1e-6).counts)
    mix15, k15, _ = stats.fit_mixture(np.concatenate(counts15))
    dt = time.time() - t0
    report(7, "two photon-count peaks inside the window, merged to one at "
              "theta=15 and m=6e5",
           k_in == 2 and k15 == 1 and dt < 1800,
           f"in-window k={k_in} means {np.round(mix_in.means, 1).tolist()}, "
           f"theta=15 k={k15}, {dt:.0f}s")


def test_criterion_08_two_step_relaxation(tmp_root):
    out = desk_run(tmp_root)
    spec = spectral.decompose(nv_channel())
    w = spectral.metastable_window(spec)
    base = max(linalg.fidelity(np.eye(3) / 3, DARK),
               linalg.fidelity(np.eye(3) / 3, BRIGHT))
    n_traj, reached = 0, 0
    sum_best = None
    steps = None
    for part in sorted((out / "parts").glob("traj_*.npz")):
        with np.load(part) as z:
            best = np.maximum(z["fid_dark"], z["fid_bright"])
            steps = z["snapshot_steps"]
            inside = (steps >= w.m_lo) & (steps <= w.m_hi)
            if best[inside].max() >= 0.95:
                reached += 1
            sum_best = best if sum_best is None else sum_best + best
            n_traj += 1
    avg = sum_best / n_traj
    frac = reached / n_traj
    inside = (steps >= w.m_lo) & (steps <= w.m_hi)
    peak = avg[inside].max()
    final = avg[-1]
    decaying = final < peak and abs(final - base) < abs(peak - base)
    report(8, "90% of trajectories polarize inside the window and the "
              "ensemble decays back toward I/3",
           frac >= 0.90 and decaying,
           f"polarized {frac:.1%}, avg peak {peak:.3f} -> final {final:.3f}, "
           f"I/3 value {base:.3f}")


def test_criterion_09_hmm_recovery():
    t0 = time.time()
    rng = np.random.default_rng(4)
    bin_time = 10e-3
    stay = 1 - bin_time / 5.0
    n_bins = 50_000
    states = np.empty(n_bins, np.int64)
    s = 0
    for t in range(n_bins):
        states[t] = s
        if rng.random() > stay:
            s = 1 - s
    counts = rng.poisson(np.where(states == 0, 150.0, 300.0))
    trace = stats.PLTrace(
        bins=np.stack([np.arange(n_bins), counts], axis=1),
        window=3000, rim_time=bin_time / 3000)
    model, ll, conv = hmm.baum_welch(trace, 2)
    order = np.argsort(model.rates)
    rates = model.rates[order]
    rate_err = max(abs(rates[0] - 150) / 150, abs(rates[1] - 300) / 300)
    path, _ = hmm.viterbi(model, trace)
    if order[0] == 1:
        path = 1 - path
    dw = hmm.dwell_times(model, path, bin_time / 3000, 3000)
    dwell_err = max(abs(e["formula_s"] - 5.0) / 5.0 for e in dw["states"])
    true_jumps = np.nonzero(np.diff(states))[0] + 1
    found = hmm.jump_locations(path)
    jump_ok = (len(found) == len(true_jumps)
               and max(np.abs(found - j).min() for j in true_jumps) <= 2)
    dt = time.time() - t0
    report(9, "Baum-Welch recovers rates, dwell times and jump positions of "
              "a synthetic telegraph trace",
           rate_err <= 0.05 and dwell_err <= 0.15 and jump_ok and dt < 60,
           f"rate err {rate_err:.1%}, dwell err {dwell_err:.1%}, "
           f"{len(found)}/{len(true_jumps)} jumps, {dt:.0f}s")


def test_criterion_10_readout_fidelity():
    # dark/bright photon rates of the extreme states summed over 8e4 cycles
    ch = weak_kraus(nv_channel(), WeakReadout(0.065, 0.049))
    spec = spectral.decompose(ch.base)
    e1, e2 = spectral.ems_1d(spec)
    rates = sorted(stats.expected_photon_rate(ch, e.matrix) for e in (e1, e2))
    m_equiv = 80_000
    rng = np.random.default_rng(61)
    sample = np.concatenate([rng.poisson(rates[0] * m_equiv, 5000),
                             rng.poisson(rates[1] * m_equiv, 5000)])
    mix, k, _ = stats.fit_mixture(sample, k_max=2)
    thr, f, fd, fb = stats.best_threshold(mix)
    report(10, "optimized threshold fidelity of the two-peak count "
               "distribution reaches 0.90",
           k == 2 and f >= 0.90,
           f"F={f:.3f} at threshold {thr}; published 97%±2% at 2950 counts "
           "is experiment-specific, not gated")


def test_criterion_11_determinism(tmp_root):
    out_a = desk_run(tmp_root)
    out_b = tmp_root / "desk_b"
    rc = cli.main(["simulate", "--preset", "fig2-desk", "--out", str(out_b)])
    assert rc == 0
    for out in (out_a, out_b):
        rc = cli.main(["analyze", "--preset", "fig2-desk", "--out", str(out)])
        assert rc == 0
    same = True
    compared = []
    for name in ("trace.csv", "snapshots.csv", "histogram.csv",
                 "mixture.json", "fidelity.json"):
        pa, pb = out_a / name, out_b / name
        if pa.exists() != pb.exists():
            same = False
            compared.append(f"{name}:presence")
            continue
        if pa.exists():
            identical = pa.read_bytes() == pb.read_bytes()
            same = same and identical
            compared.append(f"{name}:{'ok' if identical else 'DIFFERS'}")
    report(11, "repeated desk-scale pipeline runs are byte-identical",
           same, ", ".join(compared))
