"""Semiclassical fidelity amplitude (initial-value representation) and its early-time expansion."""

from dataclasses import dataclass

import numpy as np

from ..rng import stream
from .model import run_orbits


@dataclass(frozen=True, eq=False)
class SemiclassicalAmplitude:
    times: np.ndarray
    f: np.ndarray
    stderr: np.ndarray
    undersampled: bool

    @property
    def fidelity(self):
        return np.abs(self.f) ** 2


def semiclassical_amplitude(alpha0, params, sigma, T, n_mc=20_000, seed=0,
                            samples_per_period=8, quantum_fluctuations=True, threads=None):
    """Monte Carlo estimate of f(t) = <exp(i sigma/2 phi~(t))> over the IVR Gaussian.

    Each sample starts at alpha0 + delta, with delta complex Gaussian of
    variance hbar/4 per quadrature. It evolves with linear frequency
    omega0 - 2|delta|^2. With ``quantum_fluctuations=False`` every delta is
    zero, so the single orbit gives |f| = 1.
    """
    if n_mc < 1000:
        raise ValueError("n_mc must be >= 10^3")
    n_periods = int(np.ceil(T - 1e-12))
    if quantum_fluctuations:
        rng = stream(seed, "ivr")
        z = rng.standard_normal((n_mc, 2))
        delta = np.sqrt(params.hbar / 4.0) * (z[:, 0] + 1j * z[:, 1])
    else:
        delta = np.zeros(1, dtype=complex)
    omega = params.omega0 - 2.0 * np.abs(delta) ** 2
    times, _, phi = run_orbits(alpha0 + delta, params, n_periods, samples_per_period,
                               omega=omega, threads=threads)
    z = np.exp(0.5j * sigma * phi)
    f = z.mean(axis=0)
    n = z.shape[0]
    if n > 1:
        stderr = np.sqrt((z.real.var(axis=0) + z.imag.var(axis=0)) / n)
    else:
        stderr = np.zeros(len(times))
    keep = times <= T + 1e-12
    return SemiclassicalAmplitude(times[keep], f[keep], stderr[keep], bool(np.max(stderr) > 0.05))


@dataclass(frozen=True, eq=False)
class EarlyTimeFidelity:
    times: np.ndarray
    F: np.ndarray
    dphi_dx: np.ndarray
    dphi_dy: np.ndarray
    dphi_domega: np.ndarray
    rate_alpha: float
    rate_omega: float
    validity_time: float
    fd_disagreement: float
    fd_consistent: bool

    @property
    def grad_alpha_sq(self):
        """|d phi/d alpha|^2 for the Wirtinger derivative (d/dx - i d/dy)/2."""
        return (self.dphi_dx**2 + self.dphi_dy**2) / 4.0


def _derivatives(alpha0, params, n_periods, spp, rel_step):
    hx = rel_step * max(abs(alpha0), 1.0)
    hw = rel_step * max(abs(params.omega0), 1.0)
    starts = np.array([alpha0 + hx, alpha0 - hx, alpha0 + 1j * hx, alpha0 - 1j * hx,
                       alpha0, alpha0], dtype=complex)
    omega = np.full(6, params.omega0)
    omega[4] += hw
    omega[5] -= hw
    times, _, phi = run_orbits(starts, params, n_periods, spp, omega=omega, threads=1)
    dx = (phi[0] - phi[1]) / (2 * hx)
    dy = (phi[2] - phi[3]) / (2 * hx)
    dw = (phi[4] - phi[5]) / (2 * hw)
    return times, dx, dy, dw


def growth_rate(times, values, t_min=1.0):
    """Log-linear growth rate of |values| for t >= t_min."""
    t = np.asarray(times)
    v = np.abs(np.asarray(values))
    m = (t >= t_min) & (v > 0)
    if m.sum() < 2:
        return float("nan")
    return float(np.polyfit(t[m], np.log(v[m]), 1)[0])


def early_time_fidelity(alpha0, params, eps, hbar, T, samples_per_period=8, rel_step=1e-6):
    """Early-time fidelity from the phase derivatives along the reference orbit.

    F = [1 + (eps/2)^2 w^2]^-1 exp(-(eps^2/(4 hbar)) |d phi/d alpha|^2 / [1 + (eps/2)^2 w^2]),
    with w = d phi/d omega0. All derivatives come from central finite
    differences with relative step ``rel_step``. The same derivatives at
    half the step must agree to 1%, else ``fd_consistent`` is cleared.
    """
    n_periods = int(np.ceil(T - 1e-12))
    times, dx, dy, dw = _derivatives(alpha0, params, n_periods, samples_per_period, rel_step)
    _, dx2, dy2, dw2 = _derivatives(alpha0, params, n_periods, samples_per_period, rel_step / 2)
    disagreement = 0.0
    for a, b in ((dx, dx2), (dy, dy2), (dw, dw2)):
        scale = np.maximum(np.abs(b), 1e-6)
        m = np.abs(b) > 1e-6
        if m.any():
            disagreement = max(disagreement, float(np.max(np.abs(a - b)[m] / scale[m])))
    grad_sq = (dx**2 + dy**2) / 4.0
    den = 1.0 + (eps / 2.0) ** 2 * dw**2
    F = np.exp(-(eps**2 / (4.0 * hbar)) * grad_sq / den) / den
    rate_a = growth_rate(times, np.sqrt(grad_sq))
    rate_w = growth_rate(times, dw)
    validity = float(np.log(2.0 / eps) / rate_a) if eps > 0 and rate_a > 0 else float("inf")
    keep = times <= T + 1e-12
    return EarlyTimeFidelity(times[keep], F[keep], dx[keep], dy[keep], dw[keep], rate_a, rate_w,
                             validity, disagreement, disagreement <= 0.01)
