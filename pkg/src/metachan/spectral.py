"""Spectral analysis of a channel: point classification and metastability.

The natural representation of a channel is diagonalized with left/right
eigenpairs.  Eigenvalues on the unit circle are fixed or rotating points;
among the rest, a large ratio gap in 1-|lambda| separates long-lived
(metastable) points from fast-decaying ones.  The slow points bound a window
of repetition counts in which the channel keeps extra state information, and
the surviving slow direction defines two extremal long-lived states.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import linalg
from .channel import QuantumChannel, natural_representation

FIXED_TOL = 1e-9
PHASE_TOL = 1e-7
GAP_RATIO = 10.0

FIXED = "fixed"
ROTATING = "rotating"
METASTABLE = "metastable"
DECAYING = "decaying"


@dataclass(frozen=True)
class ChannelSpectrum:
    """Sorted eigensystem of a channel with per-point classification.

    eigenvalues, rights and lefts are index-aligned; rights/lefts hold the
    d x d eigenoperators.  q is the index one past the last metastable point,
    r the number of fixed points (rotating points sit between them in the
    ordering only if their magnitude places them there).
    """

    eigenvalues: np.ndarray
    rights: tuple[np.ndarray, ...]
    lefts: tuple[np.ndarray, ...]
    labels: tuple[str, ...]
    dim: int

    @property
    def r(self) -> int:
        return self.labels.count(FIXED)

    @property
    def n_metastable(self) -> int:
        return self.labels.count(METASTABLE)

    @property
    def q(self) -> int:
        """Number of fixed + metastable points."""
        return self.r + self.n_metastable

    def indices(self, label: str) -> list[int]:
        return [i for i, lab in enumerate(self.labels) if lab == label]


@dataclass(frozen=True)
class MetastableWindow:
    """Repetition-count bounds of the long-lived regime.

    m_lo / m_hi use 1/|ln|lambda||; lo_approx / hi_approx the 1/(1-|lambda|)
    estimate, which agrees to first order for |lambda| near 1.
    """

    m_lo: float
    m_hi: float
    lo_approx: float
    hi_approx: float


@dataclass(frozen=True)
class ExtremeMetastableState:
    matrix: np.ndarray
    label: str


def _classify(absw: np.ndarray, args: np.ndarray, fixed_tol: float,
              phase_tol: float, gap_ratio: float,
              metastable_cut: float | None) -> list[str]:
    labels = []
    for a, ph in zip(absw, args):
        if abs(a - 1.0) <= fixed_tol and abs(ph) <= phase_tol:
            labels.append(FIXED)
        elif a >= 1.0 - fixed_tol:
            labels.append(ROTATING)
        else:
            labels.append(None)
    rest = [i for i, lab in enumerate(labels) if lab is None]
    if not rest:
        return labels
    gaps = np.array([1.0 - absw[i] for i in rest])  # ascending with index
    if metastable_cut is not None:
        for i in rest:
            labels[i] = METASTABLE if 1.0 - absw[i] <= metastable_cut else DECAYING
        return labels
    # largest ratio jump in the sorted decay rates splits slow from fast
    split = 0
    if len(gaps) > 1:
        ratios = gaps[1:] / np.maximum(gaps[:-1], 1e-300)
        k = int(np.argmax(ratios))
        if ratios[k] >= gap_ratio:
            split = k + 1
    for j, i in enumerate(rest):
        labels[i] = METASTABLE if j < split else DECAYING
    return labels


def decompose(ch: QuantumChannel, fixed_tol: float = FIXED_TOL,
              phase_tol: float = PHASE_TOL, gap_ratio: float = GAP_RATIO,
              metastable_cut: float | None = None) -> ChannelSpectrum:
    """Diagonalize and classify the channel's natural representation.

    metastable_cut overrides the ratio-gap heuristic with an explicit
    threshold on 1-|lambda|.
    """
    phi = natural_representation(ch)
    w, vr, vl = linalg.general_eig(phi)
    absw = np.abs(w)
    if absw.max() > 1.0 + 1e-9:
        raise ValueError(f"spectral radius {absw.max()} exceeds 1; not a channel")
    args = np.angle(w)
    labels = _classify(absw, args, fixed_tol, phase_tol, gap_ratio, metastable_cut)
    if FIXED not in labels:
        raise ValueError("no eigenvalue within tolerance of 1; eigensolver failure "
                         "or map is not trace preserving")

    rights = []
    lefts = []
    for i in range(len(w)):
        r = linalg.devectorize(vr[:, i])
        l = linalg.devectorize(vl[:, i])
        if labels[i] == FIXED:
            # fixed points carry trace 1; rescale the pair to keep biorthonormality
            tr = np.trace(r)
            if abs(tr) > 1e-12:
                r = r / tr
                l = l * np.conj(tr)
        rights.append(r)
        lefts.append(l)
    return ChannelSpectrum(eigenvalues=w, rights=tuple(rights), lefts=tuple(lefts),
                           labels=tuple(labels), dim=ch.dim)


def _psd_state(h: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    w = np.clip(w, 0.0, None)
    h = (v * w) @ v.conj().T
    return h / np.trace(h).real


def stationary_states(spec: ChannelSpectrum) -> list[np.ndarray]:
    """Hermitian unit-trace states spanning the fixed-point space.

    Eigensolvers return arbitrary representatives of a degenerate lambda=1
    block.  For a commuting (QND) fixed-point algebra the minimal spectral
    projectors are extracted by diagonalizing a generic combination; the
    non-commuting fallback Hermitizes and orthogonalizes the raw basis.
    """
    idx = spec.indices(FIXED)
    raw = [linalg.hermitize(spec.rights[i]) for i in idx]
    if len(raw) == 1:
        return [_psd_state(raw[0])]
    commuting = all(
        np.abs(a @ b - b @ a).max() < 1e-8
        for i, a in enumerate(raw) for b in raw[i + 1:])
    if commuting:
        # generic element of the algebra separates the joint eigenspaces
        coeffs = np.cos(1.0 + np.arange(len(raw)))  # deterministic, incommensurate
        g = sum(c * h for c, h in zip(coeffs, raw))
        w, v = np.linalg.eigh(g)
        out = []
        for grp in linalg._degenerate_groups(w, 1e-8):
            vs = v[:, grp]
            p = vs @ vs.conj().T
            out.append(p / np.trace(p).real)
        if len(out) == len(raw):
            return out
    out = []
    for h in raw:
        # remove components along already-extracted states (HS inner product)
        for prev in out:
            h = h - np.trace(prev.conj().T @ h) / np.trace(prev.conj().T @ prev) * prev
        tr = np.trace(h).real
        if abs(tr) < 1e-10:
            continue
        out.append(_psd_state(h / tr))
    return out


def metastable_window(spec: ChannelSpectrum) -> MetastableWindow:
    """Window bounds of the surviving long-lived direction.

    The upper edge comes from the slowest metastable point, the lower edge
    from the next eigenvalue after it; with one metastable point this is the
    textbook 1/|ln|lambda|| pair, with several it bounds the regime where
    only the slowest direction is still alive (the faster ones set m_lo).
    """
    meta = spec.indices(METASTABLE)
    if not meta:
        raise ValueError("spectrum has no metastable points")
    q = min(meta)
    lam_q = abs(spec.eigenvalues[q])
    if q + 1 < len(spec.eigenvalues):
        lam_next = abs(spec.eigenvalues[q + 1])
    else:
        lam_next = 0.0
    m_hi = 1.0 / abs(np.log(lam_q))
    m_lo = 1.0 / abs(np.log(lam_next)) if lam_next > 0 else 0.0
    hi_approx = 1.0 / (1.0 - lam_q)
    lo_approx = 1.0 / (1.0 - lam_next) if lam_next < 1 else np.inf
    return MetastableWindow(m_lo=m_lo, m_hi=m_hi, lo_approx=lo_approx, hi_approx=hi_approx)


def _gauge_hermitian_pair(r: np.ndarray, l: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotate a real-eigenvalue pair to Hermitian representatives."""
    v = r.reshape(-1)
    k = int(np.argmax(np.abs(v)))
    ph = v[k] / abs(v[k])
    r = r / ph
    l = l * ph
    return linalg.hermitize(r), linalg.hermitize(l)


def ems_1d(spec: ChannelSpectrum) -> tuple[ExtremeMetastableState, ExtremeMetastableState]:
    """Extremal states of the one-dimensional long-lived manifold.

    Requires one fixed point; among the metastable points only the slowest
    survives (the faster ones are treated as decayed).  The extremes are
    rho_fix + c R / h with c the extreme eigenvalues of the matching left
    eigenoperator and h the geometric mean of the pair's HS norms.
    """
    fixed = spec.indices(FIXED)
    meta = spec.indices(METASTABLE)
    if len(fixed) != 1:
        raise ValueError(f"need exactly one fixed point, got {len(fixed)}")
    if not meta:
        raise ValueError("need at least one metastable point")
    i2 = min(meta)  # slowest metastable point (largest |lambda|)
    rho_fix = linalg.hermitize(spec.rights[fixed[0]])
    rho_fix = rho_fix / np.trace(rho_fix).real
    r2, l2 = _gauge_hermitian_pair(spec.rights[i2], spec.lefts[i2])
    h = np.sqrt(abs(np.vdot(l2, l2) * np.vdot(r2, r2)))
    cvals = np.linalg.eigvalsh(l2)
    states = []
    for c in (cvals.max(), cvals.min()):
        m = linalg.hermitize(rho_fix + c * r2 / h)
        states.append(m)
    # label by eigenstructure: "a" is the extreme along +R, "b" along -R
    return (ExtremeMetastableState(matrix=states[0], label="ems+"),
            ExtremeMetastableState(matrix=states[1], label="ems-"))


def mm_coordinates(spec: ChannelSpectrum, ems: list[np.ndarray],
                   rho: np.ndarray) -> np.ndarray:
    """Barycentric weights of a state on the long-lived manifold.

    The dual functionals are built in the span of the manifold's left
    eigenoperators by solving <P_nu, ems_mu> = delta.  Weights sum to 1;
    small negativity reflects that the manifold is only approximately convex.
    """
    keep = spec.indices(FIXED) + spec.indices(METASTABLE)
    keep = sorted(keep)[: len(ems)]
    if len(keep) != len(ems):
        raise ValueError(f"{len(ems)} extremal states but manifold dimension {len(keep)}")
    lbasis = [spec.lefts[i] for i in keep]
    c = np.array([[np.vdot(l, e) for e in ems] for l in lbasis])  # (q, q)
    if np.linalg.cond(c) > 1e12:
        raise ValueError("dual system is singular; extremal states are degenerate")
    # P_nu = sum_j conj(A_nu j) L_j with conj(A) C = I, so the weights
    # <P_nu, rho> are inv(C) applied to the left-eigenoperator overlaps
    overlaps = np.array([np.vdot(l, rho) for l in lbasis])
    return np.linalg.solve(c, overlaps).real


def spectrum_to_dict(spec: ChannelSpectrum,
                     window: MetastableWindow | None = None,
                     ems: list[ExtremeMetastableState] | None = None) -> dict:
    """JSON-ready summary: eigenvalues with class, window bounds, EMS matrices."""
    def mat_entries(m):
        return [[float(x.real), float(x.imag)] for x in np.asarray(m).reshape(-1)]

    out = {
        "dim": spec.dim,
        "eigenvalues": [
            {"re": float(w.real), "im": float(w.imag), "abs": float(abs(w)),
             "class": lab}
            for w, lab in zip(spec.eigenvalues, spec.labels)
        ],
        "counts": {lab: spec.labels.count(lab)
                   for lab in (FIXED, ROTATING, METASTABLE, DECAYING)},
    }
    if window is not None:
        out["window"] = {"m_lo": window.m_lo, "m_hi": window.m_hi,
                         "lo_approx": window.lo_approx, "hi_approx": window.hi_approx}
    if ems is not None:
        out["ems"] = [{"label": e.label, "matrix": mat_entries(e.matrix)} for e in ems]
    return out


def spectrum_to_json(spec, window=None, ems=None, indent=2) -> str:
    return json.dumps(spectrum_to_dict(spec, window, ems), indent=indent)
