"""Quantum channels induced on a bath spin by one probe interferometry cycle.

A cycle consists of two pi/2 probe rotations separated by free evolution
under a pure-dephasing coupling; tracing out the probe leaves a two-outcome
Kraus channel on the bath.  A photon-counting readout of the probe refines
the two outcomes into a photon-number alphabet.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .linalg import (
    hermitian_exp,
    herm_deviation,
    sandwich_superoperator,
    vectorize,
    devectorize,
    hermitize,
)

CPTP_TOL = 1e-10


@dataclass(frozen=True)
class PureDephasingModel:
    """Coupling data for one measurement-induced channel.

    b_op is the probe-conditioned (interaction) bath operator, c_op the
    unconditioned (free) one, both Hermitian in rad/us.  tau is the free
    evolution time in us and delta_phi the phase difference between the two
    probe rotation axes, in radians.
    """

    b_op: np.ndarray
    c_op: np.ndarray
    tau: float
    delta_phi: float = np.pi / 2

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.b_op, complex))
        c = np.atleast_2d(np.asarray(self.c_op, complex))
        if b.shape != c.shape or b.shape[0] != b.shape[1]:
            raise ValueError(f"operator shapes {b.shape}, {c.shape} are invalid")
        for name, op in (("b_op", b), ("c_op", c)):
            dev = herm_deviation(op)
            if dev > 1e-10:
                raise ValueError(f"{name} is not Hermitian (max deviation {dev:.3e})")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        object.__setattr__(self, "b_op", b)
        object.__setattr__(self, "c_op", c)

    @property
    def dim(self) -> int:
        return self.b_op.shape[0]

    def conditional_unitaries(self) -> tuple[np.ndarray, np.ndarray]:
        """Propagators exp(-i (+/-b + c) tau) for probe outcome 0 / 1."""
        u0 = hermitian_exp(self.b_op + self.c_op, self.tau)
        u1 = hermitian_exp(-self.b_op + self.c_op, self.tau)
        return u0, u1


@dataclass(frozen=True)
class QuantumChannel:
    """A CPTP map given by an ordered list of Kraus operators."""

    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        ks = tuple(np.asarray(k, complex) for k in self.kraus)
        if not ks:
            raise ValueError("need at least one Kraus operator")
        d = ks[0].shape[0]
        if any(k.shape != (d, d) for k in ks):
            raise ValueError("Kraus operators must share one square shape")
        object.__setattr__(self, "kraus", ks)
        err = self.cptp_deviation()
        if err > CPTP_TOL:
            raise ValueError(f"Kraus set violates trace preservation by {err:.3e}")

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    def cptp_deviation(self) -> float:
        acc = sum(k.conj().T @ k for k in self.kraus)
        return float(np.abs(acc - np.eye(self.dim)).max())


@dataclass(frozen=True)
class WeakReadout:
    """Poisson photon-count readout of the probe.

    n0 / n1 are the mean photon numbers for probe outcome 0 / 1; counts above
    max_photons are folded into the last letter so the alphabet stays finite
    and exactly trace preserving.
    """

    n0: float
    n1: float
    max_photons: int = 5

    def __post_init__(self):
        if self.n0 < 0 or self.n1 < 0:
            raise ValueError("mean photon numbers must be nonnegative")
        if self.max_photons < 1:
            raise ValueError("max_photons must be >= 1")

    def count_probabilities(self) -> np.ndarray:
        """(max_photons+1, 2) array p(n | probe outcome), tail mass folded."""
        ns = np.arange(self.max_photons + 1)
        out = np.empty((self.max_photons + 1, 2))
        for col, mean in enumerate((self.n0, self.n1)):
            p = stats.poisson.pmf(ns, mean)
            p[-1] = 1.0 - stats.poisson.cdf(self.max_photons - 1, mean)
            out[:, col] = p
        return out


@dataclass(frozen=True)
class PhotonResolvedChannel:
    """Channel with a photon-count outcome alphabet.

    Outcome n is the completely positive map
    rho -> sum_alpha p(n|alpha) M_alpha rho M_alpha^dagger; the maps sum to
    the underlying two-outcome channel.
    """

    base: QuantumChannel
    count_probs: np.ndarray  # (n_outcomes, 2)

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def n_outcomes(self) -> int:
        return self.count_probs.shape[0]

    def scaled_kraus(self) -> np.ndarray:
        """(n_outcomes, 2, d, d) stack sqrt(p(n|alpha)) M_alpha."""
        m = np.stack(self.base.kraus)  # (2, d, d)
        return np.sqrt(self.count_probs)[:, :, None, None] * m[None, :, :, :]

    def cptp_deviation(self) -> float:
        sk = self.scaled_kraus().reshape(-1, self.dim, self.dim)
        acc = np.einsum("kij,kil->jl", sk.conj(), sk)
        return float(np.abs(acc - np.eye(self.dim)).max())

    def outcome_map(self, n: int, rho: np.ndarray) -> np.ndarray:
        """Unnormalized post-measurement state for photon count n."""
        out = np.zeros_like(np.asarray(rho, complex))
        for alpha, m in enumerate(self.base.kraus):
            out += self.count_probs[n, alpha] * (m @ rho @ m.conj().T)
        return out


def rim_kraus(model: PureDephasingModel) -> QuantumChannel:
    """Two-outcome Kraus pair of the measurement-induced channel.

    M_alpha = [U_0 - (-1)^alpha e^{i delta_phi} U_1] / 2 with the
    probe-conditioned propagators U_alpha.
    """
    u0, u1 = model.conditional_unitaries()
    phase = np.exp(1j * model.delta_phi)
    m0 = (u0 - phase * u1) / 2
    m1 = (u0 + phase * u1) / 2
    return QuantumChannel(kraus=(m0, m1))


def natural_representation(ch) -> np.ndarray:
    """d^2 x d^2 matrix acting on vectorized states: sum_a kron(M_a, conj(M_a))."""
    if isinstance(ch, PhotonResolvedChannel):
        ch = ch.base
    acc = np.zeros((ch.dim**2, ch.dim**2), complex)
    for m in ch.kraus:
        acc += np.kron(m, m.conj())
    return acc


def apply_kraus(ch: QuantumChannel, rho: np.ndarray) -> np.ndarray:
    """One application of the channel in the Kraus representation."""
    out = np.zeros_like(np.asarray(rho, complex))
    for m in ch.kraus:
        out += m @ rho @ m.conj().T
    return out


def apply_channel(ch: QuantumChannel, rho: np.ndarray, repetitions: int = 1) -> np.ndarray:
    """repetitions-fold application of the channel to a density matrix.

    Small repetition counts loop over the Kraus form; large ones go through a
    matrix power of the natural representation, which is exact for the linear
    map and far cheaper for m ~ 1e6.
    """
    rho = np.asarray(rho, complex)
    if repetitions < 0:
        raise ValueError("repetitions must be >= 0")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-9 or np.linalg.eigvalsh(hermitize(rho)).min() < -1e-10:
        raise ValueError("input is not a density matrix")
    if repetitions == 0:
        return rho
    if repetitions <= 64:
        out = rho
        for _ in range(repetitions):
            out = apply_kraus(ch, out)
        return out
    phi = natural_representation(ch)
    powered = np.linalg.matrix_power(phi, repetitions)
    return devectorize(powered @ vectorize(rho))


def measurement_probability(ch: QuantumChannel, rho: np.ndarray, outcome: int) -> float:
    """Tr(M_a rho M_a^dagger) for outcome label a."""
    if not 0 <= outcome < len(ch.kraus):
        raise ValueError(f"outcome {outcome} outside alphabet of size {len(ch.kraus)}")
    m = ch.kraus[outcome]
    return float(np.trace(m @ rho @ m.conj().T).real)


def strong_readout(ch: QuantumChannel) -> PhotonResolvedChannel:
    """Ideal readout: the outcome alphabet is the probe outcome itself."""
    if len(ch.kraus) != 2:
        raise ValueError("strong readout is defined for two-outcome channels")
    return PhotonResolvedChannel(base=ch, count_probs=np.eye(2))


def weak_kraus(ch: QuantumChannel, readout: WeakReadout) -> PhotonResolvedChannel:
    """Refine a two-outcome channel by the Poisson photon-count readout."""
    if len(ch.kraus) != 2:
        raise ValueError("photon readout is defined for two-outcome channels")
    out = PhotonResolvedChannel(base=ch, count_probs=readout.count_probabilities())
    err = out.cptp_deviation()
    if err > CPTP_TOL:
        raise ValueError(f"photon-resolved channel violates trace preservation by {err:.3e}")
    return out
