import numpy as np
import pytest

from echo_lab.errors import IllConditionedError
from echo_lab.oscillator import (FockWeights, PDensitySpec, fock_to_p, geometric_weights,
                                 p_to_fock, thermal_fock_weights)

HBAR = 1e-3
DELTA = 5e-3


def test_vacuum():
    rho = p_to_fock(PDensitySpec("delta", center=0.0), HBAR, 10)
    assert rho.rho[0] == 1 and np.all(rho.rho[1:] == 0)
    inv = fock_to_p(rho, HBAR, np.linspace(0, 10 * HBAR, 11))
    assert inv.origin_mass == 1.0
    # no mass away from the origin
    assert np.all(inv.P == 0)


def test_exponential_maps_to_geometric():
    rho = p_to_fock(PDensitySpec("exponential", DELTA, 0.0), HBAR, 200)
    exact = geometric_weights(DELTA, HBAR, 200)
    assert np.max(np.abs(rho.rho - exact)) < 1e-6
    assert rho.rho.sum() == pytest.approx(1.0, abs=1e-8)


def test_callable_density_and_tail_overflow():
    P = PDensitySpec("exponential", DELTA, 0.0)
    rho = p_to_fock(P.radial_density, HBAR, 200)
    assert rho.rho.sum() == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(ValueError):
        p_to_fock(P, HBAR, 10)


def test_off_center_density_rejected():
    with pytest.raises(ValueError):
        p_to_fock(PDensitySpec("delta", center=1.0), HBAR, 10)


def test_geometric_weights_invert_to_exponential():
    I = np.linspace(0, 5 * DELTA, 101)
    rho = geometric_weights(DELTA, HBAR, 200)
    inv = fock_to_p(rho / rho.sum(), HBAR, I)
    exact = np.exp(-I / DELTA) / (np.pi * DELTA)
    assert np.max(np.abs(inv.P - exact) / exact) < 1e-4
    assert inv.roundtrip_error < 1e-4


def test_thermal_round_trip():
    th = thermal_fock_weights(0.5, 1.0, 0.1, 120)
    inv = fock_to_p(th, 0.1, np.linspace(0, 3, 50))
    back = p_to_fock(inv.evaluate, 0.1, 120)
    scale = 1.0 - inv.origin_mass
    recon = scale * back.rho
    recon[0] += inv.origin_mass
    assert np.max(np.abs(recon - th.rho)) < 1e-4


def test_fock_state_inversion_is_rejected():
    rho = np.zeros(30)
    rho[1] = 1.0
    with pytest.raises(IllConditionedError):
        fock_to_p(rho, 0.1, np.linspace(0, 1, 5))


def test_thermal_weights():
    cold = thermal_fock_weights(1e-4, 1.0, 0.1, 20)
    assert cold.rho[0] == pytest.approx(1.0)
    th = thermal_fock_weights(0.5, 1.0, 0.1, 120)
    assert th.rho[1] / th.rho[0] == pytest.approx(np.exp(-(0.1 + 0.01) / 0.5))
    n = np.arange(121)
    direct = np.exp(-(0.1 * n + 0.01 * n**2) / 0.5)
    assert np.allclose(th.rho, direct / direct.sum(), rtol=1e-12)
    with pytest.raises(ValueError):
        thermal_fock_weights(0.0, 1.0, 0.1, 10)
    with pytest.raises(ValueError):
        thermal_fock_weights(50.0, 1.0, 0.1, 10)


def test_fock_weight_validation():
    with pytest.raises(ValueError):
        FockWeights([0.5, 0.4])
    with pytest.raises(ValueError):
        FockWeights([1.1, -0.1])
    w = FockWeights([1.0 + 1e-13, -1e-13])
    assert w.rho[1] == 0.0
    assert list(w.rows())[0] == (0, w.rho[0])
