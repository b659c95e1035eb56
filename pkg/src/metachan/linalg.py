"""Dense complex linear algebra on operators and their vectorized form.

Operators live in a d-dimensional Hilbert space; vectorization stacks the
matrix row-major into a d^2 vector, so a map X (.) Y turns into the matrix
kron(X, Y.T) acting on vectorized operators.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

HERMITICITY_TOL = 1e-10
DEGENERACY_RTOL = 1e-9
BIORTH_TOL = 1e-8


class BiorthogonalizationError(ValueError):
    """Raised when an eigenvalue group cannot be biorthonormalized.

    Attributes
    ----------
    group : list of int
        Indices (in the sorted spectrum) of the offending eigenvalue group.
    """

    def __init__(self, message, group):
        super().__init__(message)
        self.group = list(group)


def vectorize(x: np.ndarray) -> np.ndarray:
    """Stack a square matrix row-major into a length-d^2 vector."""
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {x.shape}")
    return x.reshape(-1)

def devectorize(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vectorize`; the length must be a perfect square."""
    v = np.asarray(v)
    d = round(np.sqrt(v.size))
    if d * d != v.size:
        raise ValueError(f"length {v.size} is not a perfect square")
    return v.reshape(d, d)


def sandwich_superoperator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of rho -> a @ rho @ b on vectorized operators, i.e. kron(a, b.T)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return np.kron(a, b.T)


def hermitize(a: np.ndarray) -> np.ndarray:
    """Hermitian part (a + a^dagger)/2."""
    return (a + a.conj().T) / 2


def herm_deviation(a: np.ndarray) -> float:
    """Max-entry distance from Hermiticity."""
    return float(np.abs(a - a.conj().T).max())


def hermitian_exp(h: np.ndarray, t: float = 1.0, sign: float = -1.0) -> np.ndarray:
    """exp(sign * 1j * h * t) for Hermitian h, via eigendecomposition.

    Defaults give the propagator exp(-1j h t).  Raises if h is not Hermitian
    within HERMITICITY_TOL.
    """
    h = np.asarray(h)
    dev = herm_deviation(h)
    if dev > HERMITICITY_TOL:
        raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    w, v = np.linalg.eigh(hermitize(h))
    phases = np.exp(sign * 1j * w * t)
    return (v * phases) @ v.conj().T


def _check_state(rho: np.ndarray, name: str) -> np.ndarray:
    rho = hermitize(np.asarray(rho))
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-9:
        raise ValueError(f"{name} is not normalized (trace {tr!r})")
    w = np.linalg.eigvalsh(rho)
    if w.min() < -1e-10:
        raise ValueError(f"{name} is not positive semidefinite (min eig {w.min():.3e})")
    return rho


def psd_sqrt(rho: np.ndarray) -> np.ndarray:
    """Square root of a PSD Hermitian matrix; eigenvalues in [-1e-10, 0) clip to 0."""
    w, v = np.linalg.eigh(hermitize(rho))
    if w.min() < -1e-10:
        raise ValueError(f"matrix is not PSD (min eig {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)) of two density matrices."""
    rho = _check_state(rho, "rho")
    sigma = _check_state(sigma, "sigma")
    sr = psd_sqrt(rho)
    inner = sr @ sigma @ sr
    w = np.linalg.eigvalsh(hermitize(inner))
    return float(np.sqrt(np.clip(w, 0.0, None)).sum())


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """(1/2) * trace norm of rho - sigma (Hermitian arguments)."""
    w = np.linalg.eigvalsh(hermitize(np.asarray(rho) - np.asarray(sigma)))
    return float(0.5 * np.abs(w).sum())


def _degenerate_groups(w: np.ndarray, rtol: float) -> list[list[int]]:
    groups: list[list[int]] = []
    used = np.zeros(len(w), bool)
    for i in range(len(w)):
        if used[i]:
            continue
        grp = [i]
        used[i] = True
        for j in range(i + 1, len(w)):
            if not used[j] and abs(w[i] - w[j]) < rtol * max(1.0, abs(w[i])):
                grp.append(j)
                used[j] = True
        groups.append(grp)
    return groups


def general_eig(a: np.ndarray, rtol: float = DEGENERACY_RTOL):
    """Full eigensystem of a general complex matrix with left/right pairs.

    Returns (w, right, left) where right[:, i] and left[:, i] satisfy
    a r = w_i r and a^dagger l = conj(w_i) l, biorthonormalized so that
    left[:, i]^dagger @ right[:, j] = delta_ij.  Eigenvalues are sorted by
    descending magnitude; degenerate groups (relative gap < rtol) are
    biorthonormalized blockwise through the pseudo-inverse of the block
    overlap.  The phase gauge makes the largest-magnitude component of each
    right vector real positive.
    """
    a = np.asarray(a)
    w, vl, vr = sla.eig(a, left=True, right=True)
    order = np.argsort(-np.abs(w), kind="stable")
    w = w[order]
    vl = vl[:, order]
    vr = vr[:, order]

    for grp in _degenerate_groups(w, rtol):
        lg = vl[:, grp]
        rg = vr[:, grp]
        overlap = lg.conj().T @ rg
        # a defective (Jordan) block shows up as a numerically singular
        # overlap between unit-norm left and right eigenvectors
        smin = np.linalg.svd(overlap, compute_uv=False).min()
        if smin < 1e-10:
            raise BiorthogonalizationError(
                f"eigenvalue group {[w[i] for i in grp]} is defective "
                f"(left/right overlap singular value {smin:.3e})",
                grp,
            )
        # L' = L @ pinv(overlap)^dagger gives L'^dagger R = I on the block
        lg = lg @ np.linalg.pinv(overlap).conj().T
        vl[:, grp] = lg
        err = np.abs(lg.conj().T @ rg - np.eye(len(grp))).max()
        if err > BIORTH_TOL:
            raise BiorthogonalizationError(
                f"eigenvalue group {[w[i] for i in grp]} is defective "
                f"(biorthonormalization residual {err:.3e})",
                grp,
            )

    # phase gauge: rotate both vectors of a pair by the same phase so that
    # the dominant component of the right vector is real positive
    for i in range(len(w)):
        k = int(np.argmax(np.abs(vr[:, i])))
        ph = vr[k, i] / abs(vr[k, i])
        vr[:, i] /= ph
        vl[:, i] /= ph

    resid = np.abs(vl.conj().T @ vr - np.eye(len(w))).max()
    if resid > BIORTH_TOL:
        raise BiorthogonalizationError(
            f"global biorthonormalization residual {resid:.3e}", list(range(len(w)))
        )
    return w, vr, vl
