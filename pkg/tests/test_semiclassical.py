import numpy as np
import pytest

from echo_lab.oscillator import OscillatorParams, early_time_fidelity, semiclassical_amplitude
from echo_lab.oscillator.semiclassical import growth_rate

HBAR = 1e-5
SIGMA = 2.0
ALPHA0 = 2.0 + 0j


@pytest.fixture(scope="module")
def params():
    return OscillatorParams(hbar=HBAR)


@pytest.fixture(scope="module")
def early(params):
    return early_time_fidelity(ALPHA0, params, SIGMA * HBAR, HBAR, 4.0)


def test_zero_perturbation_gives_unit_amplitude(params):
    mc = semiclassical_amplitude(ALPHA0, params, 0.0, 3.0, n_mc=2000)
    assert np.allclose(mc.f, 1.0, atol=1e-14)


def test_no_quantum_fluctuations_no_decay(params):
    mc = semiclassical_amplitude(ALPHA0, params, SIGMA, 6.0, n_mc=1000, quantum_fluctuations=False)
    assert np.allclose(np.abs(mc.f), 1.0, atol=1e-12)


def test_sample_count_validated(params):
    with pytest.raises(ValueError):
        semiclassical_amplitude(ALPHA0, params, SIGMA, 2.0, n_mc=10)


def test_monte_carlo_is_reproducible(params):
    a = semiclassical_amplitude(ALPHA0, params, SIGMA, 2.0, n_mc=3000, seed=4)
    b = semiclassical_amplitude(ALPHA0, params, SIGMA, 2.0, n_mc=3000, seed=4, threads=2)
    assert np.array_equal(a.f, b.f)
    assert not a.undersampled


def test_early_time_matches_monte_carlo(params, early):
    mc = semiclassical_amplitude(ALPHA0, params, SIGMA, 4.0, n_mc=100_000)
    assert np.array_equal(mc.times, early.times)
    m = (early.F > 0.5) & (mc.fidelity > 0.5)
    assert m.sum() > 10
    assert np.max(np.abs(mc.fidelity[m] / early.F[m] - 1)) < 0.1


def test_zero_eps_gives_unit_fidelity(params):
    et = early_time_fidelity(ALPHA0, params, 0.0, HBAR, 3.0)
    assert np.all(et.F == 1.0)


def test_derivatives_grow_exponentially(early):
    assert early.rate_alpha > 0 and early.rate_omega > 0
    assert early.rate_alpha == pytest.approx(early.rate_omega, rel=0.3)
    assert early.fd_consistent
    assert np.isfinite(early.validity_time) and early.validity_time > 0


def test_superexponential_form_when_frequency_term_small(early):
    eps = SIGMA * HBAR
    small = (eps / 2) ** 2 * early.dphi_domega**2 < 0.05
    approx = np.exp(-(eps**2 / (4 * HBAR)) * early.grad_alpha_sq)
    assert np.max(np.abs(early.F[small] / approx[small] - 1)) < 0.05


def test_growth_rate_helper():
    t = np.arange(8.0)
    assert growth_rate(t, 3 * np.exp(0.7 * t)) == pytest.approx(0.7)
    assert np.isnan(growth_rate(t[:1], [1.0]))
