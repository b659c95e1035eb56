import numpy as np
import pytest

from metachan import linalg, trajectory
from metachan.channel import (
    PureDephasingModel,
    WeakReadout,
    apply_channel,
    measurement_probability,
    rim_kraus,
    strong_readout,
    weak_kraus,
)
from metachan.nv import NVParams, to_dephasing_model
from metachan.trajectory import SimConfig, enumerate_exact, run_batch, run_trajectory, step


def qubit_model(tau=1.0, dphi=np.pi / 2):
    return PureDephasingModel(b_op=np.diag([0.6, -0.3]),
                              c_op=np.diag([0.2, 0.1]), tau=tau, delta_phi=dphi)


def nv_weak_channel(**kwargs):
    base = rim_kraus(to_dephasing_model(NVParams(**kwargs)))
    return weak_kraus(base, WeakReadout(0.065, 0.049))


def test_step_strong_commuting_eigenstate_is_qnd():
    ch = strong_readout(rim_kraus(qubit_model()))
    rho = np.diag([1.0, 0.0]).astype(complex)
    p1 = measurement_probability(ch.base, rho, 1)
    rng = np.random.default_rng(30)
    n1 = 0
    for _ in range(2000):
        n, p, post = step(ch, rho, rng.random())
        assert np.abs(post - rho).max() < 1e-12
        n1 += n
    assert abs(n1 / 2000 - p1) < 0.04


def test_step_zero_rate_readout_equals_full_channel():
    base = rim_kraus(qubit_model())
    ch = weak_kraus(base, WeakReadout(0.0, 0.0))
    rng = np.random.default_rng(31)
    rho = np.array([[0.6, 0.2 - 0.1j], [0.2 + 0.1j, 0.4]])
    n, p, post = step(ch, rho, rng.random())
    assert n == 0 and abs(p - 1.0) < 1e-12
    expected = sum(m @ rho @ m.conj().T for m in base.kraus)
    assert np.abs(post - expected).max() < 1e-12


def test_weak_outcome_sum_rule():
    rng = np.random.default_rng(32)
    ch = nv_weak_channel()
    for _ in range(20):
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        rho = a @ a.conj().T
        rho /= np.trace(rho).real
        tot = sum(np.trace(ch.outcome_map(n, rho)).real
                  for n in range(ch.n_outcomes))
        assert abs(tot - 1.0) < 1e-10


def test_trajectory_determinism():
    ch = nv_weak_channel()
    cfg = SimConfig(channel=ch, initial_state=np.eye(3) / 3, n_steps=500,
                    master_seed=7, snapshot_stride=100)
    a = run_trajectory(cfg, 3)
    b = run_trajectory(cfg, 3)
    assert np.array_equal(a.counts, b.counts)
    assert np.array_equal(a.final_state, b.final_state)
    assert a.log_weight == b.log_weight
    c = run_trajectory(cfg, 4)
    assert not np.array_equal(a.counts, c.counts)


def test_zero_steps_returns_initial_state():
    ch = nv_weak_channel()
    cfg = SimConfig(channel=ch, initial_state=np.eye(3) / 3, n_steps=0)
    t = run_trajectory(cfg, 0)
    assert t.counts.size == 0
    assert np.abs(t.final_state - np.eye(3) / 3).max() < 1e-14
    assert t.log_weight == 0.0


def test_positivity_and_normalization_of_final_states():
    ch = nv_weak_channel()
    cfg = SimConfig(channel=ch, initial_state=np.eye(3) / 3, n_steps=2000,
                    master_seed=1)
    for i in range(10):
        t = run_trajectory(cfg, i)
        rho = linalg.hermitize(t.final_state)
        assert abs(np.trace(rho).real - 1.0) < 1e-8
        assert np.linalg.eigvalsh(rho).min() > -1e-9


def test_batch_single_equals_run_trajectory():
    ch = nv_weak_channel()
    cfg = SimConfig(channel=ch, initial_state=np.eye(3) / 3, n_steps=300,
                    master_seed=2)
    (t,) = run_batch(cfg, 1)
    ref = run_trajectory(cfg, 0)
    assert np.array_equal(t.counts, ref.counts)


def test_batch_worker_count_invariance():
    ch = nv_weak_channel()
    cfg = SimConfig(channel=ch, initial_state=np.eye(3) / 3, n_steps=200,
                    master_seed=5)
    seq = run_batch(cfg, 4, workers=1)
    par = run_batch(cfg, 4, workers=2)
    for a, b in zip(seq, par):
        assert a.index == b.index
        assert np.array_equal(a.counts, b.counts)
        assert np.array_equal(a.final_state, b.final_state)


def test_enumerate_single_step_strong():
    ch = strong_readout(rim_kraus(qubit_model()))
    rho = np.eye(2) / 2
    rec, probs, states = enumerate_exact(ch, rho, 1)
    assert rec.shape == (2, 1)
    for a in range(2):
        assert abs(probs[a] - measurement_probability(ch.base, rho, a)) < 1e-12


def test_enumerate_guard():
    ch = strong_readout(rim_kraus(qubit_model()))
    with pytest.raises(ValueError):
        enumerate_exact(ch, np.eye(2) / 2, 30)


def test_enumerate_weighted_sum_matches_channel_power():
    ch = strong_readout(rim_kraus(qubit_model()))
    rho0 = np.array([[0.7, 0.1j], [-0.1j, 0.3]])
    rec, probs, states = enumerate_exact(ch, rho0, 12)
    assert abs(probs.sum() - 1.0) < 1e-9
    avg = np.einsum("r,rij->ij", probs, states)
    assert np.abs(avg - apply_channel(ch.base, rho0, 12)).max() < 1e-10


def test_monte_carlo_unbiasedness():
    ch = strong_readout(rim_kraus(qubit_model()))
    rho0 = np.eye(2) / 2
    n_traj = 4000
    cfg = SimConfig(channel=ch, initial_state=rho0, n_steps=12, master_seed=9)
    acc = np.zeros((2, 2), complex)
    for i in range(n_traj):
        acc += run_trajectory(cfg, i).final_state
    acc /= n_traj
    target = apply_channel(ch.base, rho0, 12)
    assert linalg.trace_distance(linalg.hermitize(acc),
                                 linalg.hermitize(target)) < 3 / np.sqrt(n_traj)


def test_interleave_identity_matches_plain():
    ch = nv_weak_channel()
    base_cfg = SimConfig(channel=ch, initial_state=np.eye(3) / 3, n_steps=400,
                         master_seed=11)
    inter_cfg = SimConfig(channel=ch, initial_state=np.eye(3) / 3, n_steps=400,
                          master_seed=11, interleave_unitary=np.eye(3),
                          interleave_every=50)
    a = run_trajectory(base_cfg, 0)
    b = run_trajectory(inter_cfg, 0)
    assert np.array_equal(a.counts, b.counts)
    assert np.abs(a.final_state - b.final_state).max() < 1e-12


def test_interleave_pi_pulse_swaps_populations():
    # QND channel so populations persist; a pi rotation in the (0,1) levels
    # must move weight from level 0 to level 1 at the injection step
    model = PureDephasingModel(b_op=np.diag([0.5, -0.2, 0.3]),
                               c_op=np.zeros((3, 3)), tau=1.0)
    ch = weak_kraus(rim_kraus(model), WeakReadout(0.0, 0.0))
    v = np.eye(3, dtype=complex)
    v[0, 0] = v[1, 1] = 0.0
    v[0, 1] = v[1, 0] = -1j
    rho0 = np.diag([1.0, 0.0, 0.0]).astype(complex)
    cfg = SimConfig(channel=ch, initial_state=rho0, n_steps=10, master_seed=0,
                    interleave_unitary=v, interleave_every=5)
    t = run_trajectory(cfg, 0)
    # two pi pulses applied: population returns to level 0
    assert abs(t.final_state[0, 0].real - 1.0) < 1e-10
    cfg2 = SimConfig(channel=ch, initial_state=rho0, n_steps=7, master_seed=0,
                     interleave_unitary=v, interleave_every=5)
    t2 = run_trajectory(cfg2, 0)
    assert abs(t2.final_state[1, 1].real - 1.0) < 1e-10


def test_interleave_requires_unitary():
    ch = nv_weak_channel()
    with pytest.raises(ValueError):
        SimConfig(channel=ch, initial_state=np.eye(3) / 3, n_steps=10,
                  interleave_unitary=np.ones((3, 3)), interleave_every=2)
    with pytest.raises(ValueError):
        SimConfig(channel=ch, initial_state=np.eye(3) / 3, n_steps=10,
                  interleave_every=2)


def test_snapshot_fidelities_shape_and_range():
    ch = nv_weak_channel()
    cfg = SimConfig(channel=ch, initial_state=np.eye(3) / 3, n_steps=1000,
                    master_seed=4, snapshot_stride=250)
    t = run_trajectory(cfg, 0)
    assert t.snapshot_steps.tolist() == [250, 500, 750, 1000]
    for arr in (t.fid_dark, t.fid_bright):
        assert arr.shape == (4,)
        assert ((arr >= 0) & (arr <= 1 + 1e-9)).all()


def test_numba_and_fallback_agree(monkeypatch):
    import importlib

    from metachan import _accel, _kernels

    ch = nv_weak_channel()
    cfg = SimConfig(channel=ch, initial_state=np.eye(3) / 3, n_steps=300,
                    master_seed=6)
    fast = run_trajectory(cfg, 0)
    monkeypatch.setattr(trajectory, "run_rims", _kernels.run_rims_py)
    slow = run_trajectory(cfg, 0)
    assert np.array_equal(fast.counts, slow.counts)
    assert np.abs(fast.final_state - slow.final_state).max() < 1e-12
