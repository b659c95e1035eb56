"""Sequential-measurement quantum channels on a bath spin.

Spectral decomposition and metastability analysis of the channel induced by
repeated probe interferometry, Monte Carlo photon-count trajectories with
weak readout, and the statistics/HMM tooling to analyze the traces.
"""

from ._accel import NUMBA_ENABLED
from .channel import (
    PhotonResolvedChannel,
    PureDephasingModel,
    QuantumChannel,
    WeakReadout,
    apply_channel,
    measurement_probability,
    natural_representation,
    rim_kraus,
    strong_readout,
    weak_kraus,
)
from .nv import NVParams, to_dephasing_model
from .spectral import (
    ChannelSpectrum,
    MetastableWindow,
    decompose,
    ems_1d,
    metastable_window,
    mm_coordinates,
    stationary_states,
)
from .trajectory import SimConfig, Trajectory, enumerate_exact, run_batch, run_trajectory

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED",
    "PhotonResolvedChannel",
    "PureDephasingModel",
    "QuantumChannel",
    "WeakReadout",
    "apply_channel",
    "measurement_probability",
    "natural_representation",
    "rim_kraus",
    "strong_readout",
    "weak_kraus",
    "NVParams",
    "to_dephasing_model",
    "ChannelSpectrum",
    "MetastableWindow",
    "decompose",
    "ems_1d",
    "metastable_window",
    "mm_coordinates",
    "stationary_states",
    "SimConfig",
    "Trajectory",
    "enumerate_exact",
    "run_batch",
    "run_trajectory",
    "__version__",
]
