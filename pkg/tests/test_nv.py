import numpy as np
import pytest

from metachan import linalg
from metachan.nv import (
    NVParams,
    conditional_hamiltonian,
    perturbation_term,
    spin1_operators,
    to_dephasing_model,
)


def test_spin1_algebra():
    ix, iy, iz = spin1_operators()
    assert np.abs(ix @ iy - iy @ ix - 1j * iz).max() < 1e-14
    for op in (ix, iy, iz):
        assert linalg.herm_deviation(op) < 1e-14
    # Casimir I^2 = s(s+1) = 2
    assert np.abs(ix @ ix + iy @ iy + iz @ iz - 2 * np.eye(3)).max() < 1e-14


def test_field_vector():
    p = NVParams(b_field=100.0, theta=90.0, phi_azimuth=0.0)
    assert np.abs(p.field_vector() - np.array([100.0, 0.0, 0.0])).max() < 1e-10
    p2 = NVParams(theta=0.0)
    bx, by, bz = p2.field_vector()
    assert abs(bx) < 1e-10 and abs(by) < 1e-10 and abs(bz - 108.4) < 1e-10


def test_params_validation():
    with pytest.raises(ValueError):
        NVParams(b_field=-1.0)
    with pytest.raises(ValueError):
        NVParams(tau=-0.1)
    with pytest.raises(ValueError):
        NVParams(nuclear_zeeman_sign=2)
    with pytest.raises(ValueError):
        NVParams(probe_levels=(0, 0))
    with pytest.raises(ValueError):
        NVParams(probe_levels=(0, 2))


def test_perturbation_prefactor_scaling():
    p = NVParams()
    h0 = perturbation_term(p, 0)
    h1 = perturbation_term(p, -1)
    hp1 = perturbation_term(p, 1)
    # level 0 carries prefactor 2, levels +-1 carry -1 (relative factor -2)
    assert np.abs(h0 + 2 * h1).max() < 1e-12
    assert np.abs(h1 - hp1).max() < 1e-12


def test_perturbation_vanishes_on_axis():
    p = NVParams(theta=0.0)
    for ms in (-1, 0, 1):
        assert np.abs(perturbation_term(p, ms)).max() < 1e-12


def test_conditional_hamiltonians_hermitian():
    p = NVParams()
    for ms in (-1, 0, 1):
        h = conditional_hamiltonian(p, ms)
        assert linalg.herm_deviation(h) < 1e-12


def test_on_axis_hamiltonians_commute():
    p = NVParams(theta=0.0)
    model = to_dephasing_model(p)
    comm = model.b_op @ model.c_op - model.c_op @ model.b_op
    assert np.abs(comm).max() < 1e-12


def test_off_axis_hamiltonians_do_not_commute():
    model = to_dephasing_model(NVParams())
    comm = model.b_op @ model.c_op - model.c_op @ model.b_op
    assert np.abs(comm).max() > 1e-6


def test_dephasing_model_reconstruction():
    p = NVParams()
    model = to_dephasing_model(p)
    h0 = conditional_hamiltonian(p, 0)
    h1 = conditional_hamiltonian(p, -1)
    assert np.abs((model.b_op + model.c_op) - h0).max() < 1e-12
    assert np.abs((model.c_op - model.b_op) - h1).max() < 1e-12
    assert model.tau == p.tau
    assert model.delta_phi == p.delta_phi


def test_units_conversion_frozen_oracle():
    # diagonal entries of the ms=0 Hamiltonian at theta=0: quadrupole plus
    # nuclear Zeeman only, in rad/us
    p = NVParams(theta=0.0)
    h = conditional_hamiltonian(p, 0)
    q = 2 * np.pi * p.quadrupole
    z = 2 * np.pi * p.gamma_n * p.b_field
    expected = np.array([q + z, 0.0, q - z])
    assert np.abs(np.diag(h).real - expected).max() < 1e-10


def test_zeeman_sign_switch():
    hplus = conditional_hamiltonian(NVParams(theta=0.0), 0)
    hminus = conditional_hamiltonian(NVParams(theta=0.0, nuclear_zeeman_sign=-1), 0)
    diff = np.diag(hplus - hminus).real
    z = 2 * np.pi * NVParams().gamma_n * 108.4
    assert np.abs(diff - np.array([2 * z, 0.0, -2 * z])).max() < 1e-10
