"""Nitrogen-vacancy electron probe coupled to its intrinsic 14N nuclear spin.

The electron spin is optically read out and acts as the probe; the spin-1
nitrogen nucleus is the bath.  For a static field tilted off the symmetry
axis, second-order mixing through the zero-field splitting adds an effective
transverse nuclear term whose strength depends on the probed electron level,
so the two conditional nuclear Hamiltonians do not commute.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import PureDephasingModel

# frequencies in MHz, fields in G, gyromagnetic ratios in MHz/G
D_SPLITTING = 2870.0
A_PARALLEL = -2.16
A_PERP = -2.63
QUADRUPOLE = -4.95
GAMMA_E = 2.8025
GAMMA_N = 3.077e-4


def spin1_operators() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin-1 angular momentum matrices (Ix, Iy, Iz) in the m = +1, 0, -1 basis."""
    ix = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], complex) / np.sqrt(2)
    iy = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], complex) / np.sqrt(2)
    iz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    return ix, iy, iz


@dataclass(frozen=True)
class NVParams:
    """Model parameters; defaults match a 108.4 G field tilted 8.8 degrees.

    Angles in degrees, tau in us, delta_phi in radians.  probe_levels names
    the electron m_s pair driven by the pi/2 pulses.  nuclear_zeeman_sign
    flips the sign convention of the bare nuclear Zeeman term.
    """

    b_field: float = 108.4
    theta: float = 8.8
    phi_azimuth: float = 0.0
    tau: float = 0.374
    delta_phi: float = np.pi / 2
    probe_levels: tuple[int, int] = (0, -1)
    nuclear_zeeman_sign: int = +1
    d_splitting: float = D_SPLITTING
    a_parallel: float = A_PARALLEL
    a_perp: float = A_PERP
    quadrupole: float = QUADRUPOLE
    gamma_e: float = GAMMA_E
    gamma_n: float = GAMMA_N

    def __post_init__(self):
        if self.b_field < 0:
            raise ValueError("field magnitude must be nonnegative")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        if self.nuclear_zeeman_sign not in (+1, -1):
            raise ValueError("nuclear_zeeman_sign must be +1 or -1")
        levels = tuple(self.probe_levels)
        if len(levels) != 2 or any(m not in (-1, 0, 1) for m in levels) \
                or levels[0] == levels[1]:
            raise ValueError(f"probe_levels {levels} must be two distinct m_s values")
        object.__setattr__(self, "probe_levels", levels)

    def field_vector(self) -> np.ndarray:
        th = np.deg2rad(self.theta)
        ph = np.deg2rad(self.phi_azimuth)
        return self.b_field * np.array(
            [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])


def perturbation_term(params: NVParams, ms: int) -> np.ndarray:
    """Second-order nuclear term for electron level ms, in MHz.

    The transverse field mixes electron levels across the zero-field
    splitting; to leading order this adds
    (gamma_e (2 - 3|ms|) / 2D) [-gamma_e B_perp^2 + 2 A_perp (Bx Ix + By Iy)].
    """
    ix, iy, _ = spin1_operators()
    bx, by, _ = params.field_vector()
    pref = params.gamma_e * (2 - 3 * abs(ms)) / (2 * params.d_splitting)
    return pref * (-params.gamma_e * (bx**2 + by**2) * np.eye(3)
                   + 2 * params.a_perp * (bx * ix + by * iy))


def conditional_hamiltonian(params: NVParams, ms: int) -> np.ndarray:
    """Nuclear Hamiltonian given electron level ms, in rad/us.

    Hyperfine a_parallel * ms * Iz, quadrupole, nuclear Zeeman, plus the
    level-dependent second-order term; 2 pi converts MHz to rad/us.
    """
    ix, iy, iz = spin1_operators()
    b = params.field_vector()
    h = (params.a_parallel * ms * iz
         + params.quadrupole * (iz @ iz)
         + params.nuclear_zeeman_sign * params.gamma_n
         * (b[0] * ix + b[1] * iy + b[2] * iz)
         + perturbation_term(params, ms))
    return 2 * np.pi * h


def to_dephasing_model(params: NVParams) -> PureDephasingModel:
    """Interaction / free bath operators for the probe-level pair."""
    m_a, m_b = params.probe_levels
    ha = conditional_hamiltonian(params, m_a)
    hb = conditional_hamiltonian(params, m_b)
    return PureDephasingModel(b_op=(ha - hb) / 2, c_op=(ha + hb) / 2,
                              tau=params.tau, delta_phi=params.delta_phi)
