"""Command-line front end.

Subcommands: spectrum, simulate, analyze, sweep.  Configuration comes from a
TOML file and/or a named preset; every output file is written atomically and
carries a header with the tool version and a hash of the resolved config.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 unwritable
output directory, 5 malformed input CSV.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from . import __version__, hmm, linalg, spectral, stats
from .channel import (
    PhotonResolvedChannel,
    PureDephasingModel,
    WeakReadout,
    rim_kraus,
    strong_readout,
    weak_kraus,
)
from .nv import NVParams, to_dephasing_model
from .trajectory import SimConfig, Trajectory, default_workers, run_trajectory

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_UNWRITABLE = 4
EXIT_BAD_CSV = 5


class ConfigError(ValueError):
    pass


# presets express the published operating points; values are plain config
# dicts so a --config file can override any key
PRESETS = {
    "fig2-desk": {
        "nv": {"theta": 8.8, "tau_ns": 374.0},
        "readout": {"mode": "weak", "n0": 0.065, "n1": 0.049},
        "sim": {"m": 60_000, "n_traj": 300, "master_seed": 1},
        "analysis": {"window": 3000},
    },
    "fig2-full": {
        "nv": {"theta": 8.8, "tau_ns": 374.0},
        "readout": {"mode": "weak", "n0": 0.065, "n1": 0.049},
        "sim": {"m": 600_000, "n_traj": 3000, "master_seed": 1},
        "analysis": {"window": 3000},
    },
    "edf2-a": {
        "nv": {"theta": 3.5, "tau_ns": 374.0},
        "readout": {"mode": "weak", "n0": 0.065, "n1": 0.049},
        "sim": {"m": 60_000, "n_traj": 300, "master_seed": 1},
        "analysis": {"window": 3000},
    },
    "edf2-b": {
        "nv": {"theta": 15.0, "tau_ns": 374.0},
        "readout": {"mode": "weak", "n0": 0.065, "n1": 0.049},
        "sim": {"m": 600_000, "n_traj": 300, "master_seed": 1},
        "analysis": {"window": 3000},
    },
    "edf2-c": {
        "nv": {"theta": 8.8, "tau_ns": 374.0},
        "readout": {"mode": "strong"},
        "sim": {"m": 60_000, "n_traj": 300, "master_seed": 1},
        "analysis": {"window": 3000},
    },
    "edf3": {
        "nv": {"theta": 3.5, "tau_ns": 350.0},
        "readout": {"mode": "weak", "n0": 0.065, "n1": 0.049},
        "sim": {"m": 60_000, "n_traj": 300, "master_seed": 1},
        "analysis": {"window": 3000},
    },
}

DEFAULTS = {
    "output_dir": "out",
    "nv": {},
    "readout": {"mode": "weak", "n0": 0.065, "n1": 0.049, "max_photons": 5},
    "sim": {"m": 60_000, "n_traj": 300, "master_seed": 0, "snapshot_stride": 0},
    "analysis": {"window": 3000, "k_max": 4, "hmm_k": 3, "rim_time_s": None},
}


def _deep_merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(path: str | None, preset: str | None,
                seed: int | None, out: str | None) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}")
        cfg = _deep_merge(cfg, PRESETS[preset])
    if path is not None:
        try:
            with open(path, "rb") as fh:
                user = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found")
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config parse error in {path}: {exc}")
        cfg = _deep_merge(cfg, user)
    if seed is not None:
        cfg["sim"]["master_seed"] = seed
    if out is not None:
        cfg["output_dir"] = out
    if "model" in cfg and cfg.get("nv"):
        raise ConfigError("give either an [nv] block or a [model] block, not both")
    _validate_numbers(cfg, "")
    return cfg


def _validate_numbers(node, path):
    if isinstance(node, dict):
        for k, v in node.items():
            _validate_numbers(v, f"{path}.{k}" if path else k)
    elif isinstance(node, list):
        for i, v in enumerate(node):
            _validate_numbers(v, f"{path}[{i}]")
    elif isinstance(node, float) and not np.isfinite(node):
        raise ConfigError(f"non-finite value at {path}")


def config_hash(cfg: dict) -> str:
    # the hash identifies the physics/run content; where it lands on disk
    # must not change it, or byte-identical reruns to a new dir would differ
    cfg = {k: v for k, v in cfg.items() if k != "output_dir"}
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def build_model(cfg: dict) -> PureDephasingModel:
    if "model" in cfg:
        m = cfg["model"]
        try:
            b = np.array(m["b_op_re"], float) + 1j * np.array(m.get("b_op_im", 0.0), float)
            c = np.array(m["c_op_re"], float) + 1j * np.array(m.get("c_op_im", 0.0), float)
            return PureDephasingModel(
                b_op=b, c_op=c, tau=float(m["tau_us"]),
                delta_phi=float(m.get("delta_phi", np.pi / 2)))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"invalid [model] block: {exc}")
    nv = cfg.get("nv", {})
    kwargs = {}
    try:
        if "tau_ns" in nv:
            kwargs["tau"] = float(nv["tau_ns"]) * 1e-3
        for key in ("b_field", "theta", "phi_azimuth", "delta_phi",
                    "d_splitting", "a_parallel", "a_perp", "quadrupole",
                    "gamma_e", "gamma_n"):
            if key in nv:
                kwargs[key] = float(nv[key])
        if "nuclear_zeeman_sign" in nv:
            kwargs["nuclear_zeeman_sign"] = int(nv["nuclear_zeeman_sign"])
        if "probe_levels" in nv:
            kwargs["probe_levels"] = tuple(int(x) for x in nv["probe_levels"])
        params = NVParams(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid [nv] block: {exc}")
    return to_dephasing_model(params)


def build_channel(cfg: dict) -> PhotonResolvedChannel:
    base = rim_kraus(build_model(cfg))
    r = cfg["readout"]
    mode = r.get("mode", "weak")
    if mode == "strong":
        return strong_readout(base)
    if mode != "weak":
        raise ConfigError(f"readout mode must be weak or strong, got {mode!r}")
    try:
        readout = WeakReadout(n0=float(r["n0"]), n1=float(r["n1"]),
                              max_photons=int(r.get("max_photons", 5)))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid [readout] block: {exc}")
    return weak_kraus(base, readout)


def _interleave_unitary(spec: dict, dim: int) -> np.ndarray:
    """Rotation by angle_deg in a two-level bath subspace, identity elsewhere."""
    try:
        angle = np.deg2rad(float(spec["angle_deg"]))
        i, j = (int(x) for x in spec.get("levels", (0, 1)))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid [sim.interleave] block: {exc}")
    v = np.eye(dim, dtype=complex)
    v[i, i] = v[j, j] = np.cos(angle / 2)
    v[i, j] = v[j, i] = -1j * np.sin(angle / 2)
    return v


def build_sim_config(cfg: dict, channel: PhotonResolvedChannel) -> SimConfig:
    s = cfg["sim"]
    try:
        m = int(s["m"])
        stride = int(s.get("snapshot_stride", 0))
        if stride == 0:
            stride = max(m // 200, 1)
        kwargs = dict(
            channel=channel,
            initial_state=np.eye(channel.dim) / channel.dim,
            n_steps=m,
            master_seed=int(s.get("master_seed", 0)),
            snapshot_stride=stride,
        )
        if "initial_state_diag" in s:
            d = np.array(s["initial_state_diag"], float)
            kwargs["initial_state"] = np.diag(d / d.sum()).astype(complex)
        if "interleave" in s:
            kwargs["interleave_unitary"] = _interleave_unitary(
                s["interleave"], channel.dim)
            kwargs["interleave_every"] = int(s["interleave"]["every_k"])
        return SimConfig(**kwargs)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid [sim] block: {exc}")


def rim_time_seconds(cfg: dict) -> float:
    """Seconds per measurement cycle; defaults to the free-evolution time."""
    rt = cfg["analysis"].get("rim_time_s")
    if rt is not None:
        return float(rt)
    model = build_model(cfg)
    return model.tau * 1e-6


def _header_lines(cfg: dict) -> list[str]:
    return [f"# metachan {__version__}", f"# config_hash {config_hash(cfg)}"]


def atomic_write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_json(path: Path, cfg: dict, payload: dict):
    payload = {"meta": {"version": __version__, "config_hash": config_hash(cfg)},
               **payload}
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def _write_csv(path: Path, cfg: dict, header: list[str], rows):
    buf = io.StringIO()
    for line in _header_lines(cfg):
        buf.write(line + "\n")
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(rows)
    atomic_write_text(path, buf.getvalue())


def _check_out_dir(path: Path):
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise PermissionError(f"output directory {path} is not writable: {exc}")


# ---------------------------------------------------------------- spectrum

def cmd_spectrum(args) -> int:
    cfg = load_config(args.config, args.preset, args.seed, args.out)
    channel = build_channel(cfg)
    try:
        spec = spectral.decompose(channel.base)
        window = None
        ems = None
        if spec.n_metastable:
            window = spectral.metastable_window(spec)
            if spec.r == 1:
                ems = list(spectral.ems_1d(spec))
    except (linalg.BiorthogonalizationError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    counts = {lab: spec.labels.count(lab) for lab in
              (spectral.FIXED, spectral.ROTATING, spectral.METASTABLE,
               spectral.DECAYING)}
    print(f"channel dimension {spec.dim}, "
          + ", ".join(f"{v} {k}" for k, v in counts.items() if v))
    print(f"{'idx':>3} {'|lambda|':>12} {'arg':>10}  class")
    for i, (w, lab) in enumerate(zip(spec.eigenvalues, spec.labels)):
        print(f"{i:>3} {abs(w):>12.8f} {np.angle(w):>10.3e}  {lab}")
    if window is not None:
        print(f"metastable window: [{window.m_lo:.0f}, {window.m_hi:.0f}] cycles "
              f"(approx [{window.lo_approx:.0f}, {window.hi_approx:.0f}])")
    if args.dry_run:
        return 0
    out_dir = Path(cfg["output_dir"])
    try:
        _check_out_dir(out_dir)
    except PermissionError as exc:
        print(exc, file=sys.stderr)
        return EXIT_UNWRITABLE
    _write_json(out_dir / "spectrum.json", cfg,
                spectral.spectrum_to_dict(spec, window, ems))
    print(f"wrote {out_dir / 'spectrum.json'}")
    return 0


# ---------------------------------------------------------------- simulate

def _part_path(parts: Path, index: int) -> Path:
    return parts / f"traj_{index:05d}.npz"


def _save_part(parts: Path, t: Trajectory):
    tmp = parts / f"traj_{t.index:05d}.tmp.npz"
    np.savez_compressed(tmp, counts=t.counts, final_state=t.final_state,
                        log_weight=t.log_weight, snapshot_steps=t.snapshot_steps,
                        fid_dark=t.fid_dark, fid_bright=t.fid_bright)
    os.replace(tmp, _part_path(parts, t.index))


def _load_part(parts: Path, index: int) -> Trajectory:
    with np.load(_part_path(parts, index)) as z:
        return Trajectory(index=index, counts=z["counts"],
                          final_state=z["final_state"],
                          log_weight=float(z["log_weight"]),
                          snapshot_steps=z["snapshot_steps"],
                          fid_dark=z["fid_dark"], fid_bright=z["fid_bright"])


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.preset, args.seed, args.out)
    channel = build_channel(cfg)
    sim = build_sim_config(cfg, channel)
    n_traj = int(cfg["sim"].get("n_traj", 1))
    window = int(cfg["analysis"]["window"])
    out_dir = Path(cfg["output_dir"])
    if args.dry_run:
        print(f"plan: {n_traj} trajectories x {sim.n_steps} cycles, "
              f"alphabet {channel.n_outcomes}, snapshot stride {sim.snapshot_stride}, "
              f"seed {sim.master_seed}, workers {default_workers()}")
        print(f"would write trace.csv (binned, window {window}), snapshots.csv, "
              f"summary.json under {out_dir}")
        return 0
    try:
        _check_out_dir(out_dir)
    except PermissionError as exc:
        print(exc, file=sys.stderr)
        return EXIT_UNWRITABLE
    parts = out_dir / "parts"
    parts.mkdir(exist_ok=True)
    t0 = time.time()
    todo = [i for i in range(n_traj) if not _part_path(parts, i).exists()]
    if todo and len(todo) < n_traj:
        print(f"resuming: {n_traj - len(todo)} trajectories already done")
    workers = default_workers()
    if workers > 1 and todo:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for t in pool.map(run_trajectory, [sim] * len(todo), todo,
                              chunksize=max(1, len(todo) // (4 * workers))):
                _save_part(parts, t)
    else:
        for i in todo:
            _save_part(parts, run_trajectory(sim, i))
    trajectories = [_load_part(parts, i) for i in range(n_traj)]
    runtime = time.time() - t0

    # trace rows are binned sums; step is the first cycle index of the bin
    trace_rows = []
    snap_rows = []
    for t in trajectories:
        pl = stats.bin_trace(t.counts, window, rim_time_seconds(cfg))
        for idx, total in pl.bins:
            trace_rows.append((t.index, int(idx) * window, int(total)))
        for s, fd, fb in zip(t.snapshot_steps, t.fid_dark, t.fid_bright):
            snap_rows.append((t.index, int(s), f"{fd:.8f}", f"{fb:.8f}"))
    _write_csv(out_dir / "trace.csv", cfg,
               ["trajectory_id", "step", "photons"], trace_rows)
    _write_csv(out_dir / "snapshots.csv", cfg,
               ["trajectory_id", "step", "F_D", "F_B"], snap_rows)
    _write_json(out_dir / "summary.json", cfg, {
        "config": cfg,
        "n_trajectories": n_traj,
        "n_steps": sim.n_steps,
        "alphabet": channel.n_outcomes,
        "window": window,
        "runtime_s": round(runtime, 3),
        "master_seed": sim.master_seed,
        "seeds": f"SeedSequence((master_seed, index)) for index in 0..{n_traj - 1}",
        "total_photons": int(sum(t.total_photons for t in trajectories)),
    })
    print(f"wrote {n_traj} trajectories to {out_dir} in {runtime:.1f}s")
    return 0


# ----------------------------------------------------------------- analyze

def read_trace_csv(path: Path) -> dict[int, np.ndarray]:
    """Per-trajectory arrays of binned counts, ordered by step."""
    try:
        rows = []
        with open(path, newline="") as fh:
            lines = [ln for ln in fh if not ln.startswith("#")]
        reader = csv.reader(lines)
        header = next(reader)
        if [h.strip() for h in header] != ["trajectory_id", "step", "photons"]:
            raise ValueError(f"unexpected columns {header}")
        for row in reader:
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"bad row {row}")
            rows.append((int(row[0]), int(row[1]), int(row[2])))
    except (OSError, ValueError, StopIteration) as exc:
        raise ValueError(f"malformed trace CSV {path}: {exc}")
    out: dict[int, list] = {}
    for tid, step, photons in rows:
        out.setdefault(tid, []).append((step, photons))
    return {tid: np.array([p for _, p in sorted(v)], np.int64)
            for tid, v in sorted(out.items())}


def cmd_analyze(args) -> int:
    cfg = load_config(args.config, args.preset, args.seed, args.out)
    out_dir = Path(cfg["output_dir"])
    trace_path = Path(args.trace) if args.trace else out_dir / "trace.csv"
    try:
        traces = read_trace_csv(trace_path)
    except ValueError as exc:
        print(exc, file=sys.stderr)
        return EXIT_BAD_CSV
    if not traces:
        print(f"no rows in {trace_path}", file=sys.stderr)
        return EXIT_BAD_CSV
    window = int(cfg["analysis"]["window"])
    rim_time = rim_time_seconds(cfg)
    k_max = int(cfg["analysis"].get("k_max", 4))
    hmm_k = int(cfg["analysis"].get("hmm_k", 3))

    all_counts = np.concatenate(list(traces.values()))
    values, freqs = np.unique(all_counts, return_counts=True)
    mix, best_k, fits = stats.fit_mixture(all_counts, k_max=k_max)
    print(f"{len(traces)} trajectories, {all_counts.size} bins; "
          f"selected {best_k} peak(s): means {np.round(mix.means, 2).tolist()}")
    fidelity = None
    if best_k >= 2:
        thr, f, fd, fb = stats.best_threshold(mix)
        fidelity = {"threshold": thr, "F": f, "F_dark": fd, "F_bright": fb}
        print(f"threshold {thr}: F={f:.4f} (dark {fd:.4f}, bright {fb:.4f})")

    first_id = next(iter(traces))
    pl = stats.PLTrace(
        bins=np.stack([np.arange(traces[first_id].size), traces[first_id]], axis=1),
        window=window, rim_time=rim_time)
    hmm_payload = None
    path_rows = []
    dwell = None
    if pl.counts.size >= 10 * hmm_k:
        model, ll, converged = hmm.baum_welch(pl, hmm_k)
        path, score = hmm.viterbi(model, pl)
        dwell = hmm.dwell_times(model, path, rim_time, window)
        hmm_payload = {
            "k": model.k,
            "rates": model.rates.tolist(),
            "trans": model.trans.tolist(),
            "init": model.init.tolist(),
            "log_likelihood": ll,
            "converged": bool(converged),
            "path_log_prob": score,
            "jumps": hmm.jump_locations(path).tolist(),
            "merge": hmm.merge_report(model),
        }
        path_rows = [(first_id, i * window, int(s)) for i, s in enumerate(path)]
        print(f"HMM k={model.k}: rates {np.round(model.rates, 2).tolist()}, "
              f"{len(hmm_payload['jumps'])} jumps on trajectory {first_id}")
    if args.dry_run:
        return 0
    try:
        _check_out_dir(out_dir)
    except PermissionError as exc:
        print(exc, file=sys.stderr)
        return EXIT_UNWRITABLE
    _write_csv(out_dir / "histogram.csv", cfg, ["count", "frequency"],
               zip(values.tolist(), freqs.tolist()))
    _write_json(out_dir / "mixture.json", cfg, {
        "selected_k": best_k,
        "weights": mix.weights.tolist(),
        "means": mix.means.tolist(),
        "per_k": {str(k): {"loglik": ll, "bic": bic, "converged": bool(conv),
                           "weights": m.weights.tolist(), "means": m.means.tolist()}
                  for k, (m, ll, bic, conv) in fits.items()},
    })
    if fidelity is not None:
        _write_json(out_dir / "fidelity.json", cfg, fidelity)
    if hmm_payload is not None:
        _write_json(out_dir / "hmm_model.json", cfg, hmm_payload)
        _write_csv(out_dir / "path.csv", cfg,
                   ["trajectory_id", "step", "state"], path_rows)
        _write_json(out_dir / "dwell.json", cfg, dwell)
    print(f"wrote analysis outputs under {out_dir}")
    return 0


# ------------------------------------------------------------------- sweep

SWEEP_KEYS = {"theta": ("nv", "theta"), "tau": ("nv", "tau_ns"), "m": ("sim", "m")}


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, args.preset, args.seed, args.out)
    sweep = cfg.get("sweep", {})
    axes = [k for k in SWEEP_KEYS if k in sweep]
    if not 1 <= len(axes) <= 2:
        print("sweep block must vary one or two of theta, tau, m", file=sys.stderr)
        return EXIT_CONFIG
    grids = [list(sweep[a]) for a in axes]
    points = [(v,) for v in grids[0]] if len(axes) == 1 else \
        [(u, v) for u in grids[0] for v in grids[1]]
    rows = []
    for pt in points:
        sub = copy.deepcopy(cfg)
        sub.pop("sweep", None)
        for axis, val in zip(axes, pt):
            tbl, key = SWEEP_KEYS[axis]
            sub.setdefault(tbl, {})[key] = val
        try:
            channel = build_channel(sub)
            spec = spectral.decompose(channel.base)
            if spec.n_metastable:
                w = spectral.metastable_window(spec)
                m_lo, m_hi = w.m_lo, w.m_hi
            else:
                m_lo = m_hi = float("nan")
        except (linalg.BiorthogonalizationError, ValueError,
                np.linalg.LinAlgError) as exc:
            print(f"numerical failure at {dict(zip(axes, pt))}: {exc}",
                  file=sys.stderr)
            return EXIT_NUMERICAL
        # small deterministic simulation at this point for peak count/fidelity
        sim = build_sim_config(sub, channel)
        n_traj = min(int(sub["sim"].get("n_traj", 1)), int(sweep.get("n_traj", 24)))
        window = int(sub["analysis"]["window"])
        counts = []
        for i in range(n_traj):
            t = run_trajectory(sim, i)
            counts.append(stats.bin_trace(t.counts, window, rim_time_seconds(sub)).counts)
        allc = np.concatenate(counts)
        mix, best_k, _ = stats.fit_mixture(allc, k_max=int(sub["analysis"]["k_max"]))
        fid = ""
        if best_k >= 2:
            fid = f"{stats.best_threshold(mix)[1]:.4f}"
        rows.append(tuple(f"{v}" for v in pt) + (
            f"{m_lo:.1f}", f"{m_hi:.1f}", str(best_k), fid))
        print(f"{dict(zip(axes, pt))}: window [{m_lo:.0f}, {m_hi:.0f}], "
              f"{best_k} peak(s)" + (f", F={fid}" if fid else ""))
    if args.dry_run:
        return 0
    out_dir = Path(cfg["output_dir"])
    try:
        _check_out_dir(out_dir)
    except PermissionError as exc:
        print(exc, file=sys.stderr)
        return EXIT_UNWRITABLE
    _write_csv(out_dir / "sweep.csv", cfg,
               list(axes) + ["window_lo", "window_hi", "peaks", "fidelity"], rows)
    print(f"wrote {out_dir / 'sweep.csv'}")
    return 0


# ------------------------------------------------------------------ driver

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="metachan",
                                description="sequential-measurement channel toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, extra in (
            ("spectrum", cmd_spectrum, ()),
            ("simulate", cmd_simulate, ()),
            ("analyze", cmd_analyze, ("trace",)),
            ("sweep", cmd_sweep, ())):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="TOML configuration file")
        sp.add_argument("--seed", type=int, help="override master seed")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--preset", choices=sorted(PRESETS))
        sp.add_argument("--dry-run", action="store_true",
                        help="print the plan without writing files")
        if "trace" in extra:
            sp.add_argument("--trace", help="trace CSV to analyze")
        sp.set_defaults(func=fn)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
