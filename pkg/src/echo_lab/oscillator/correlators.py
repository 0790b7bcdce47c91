"""Ensemble correlators of the oscillator phase and action."""

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import ConvergenceWarning, FitError
from ..metrics import fit_exp_rate
from ..rng import stream
from .model import run_orbits


class DensityKind(str, Enum):
    GAUSSIAN_RING = "gaussian_ring"
    EXPONENTIAL = "exponential"
    DELTA = "delta"


@dataclass(frozen=True)
class PDensitySpec:
    """Isotropic phase-plane density of initial amplitudes.

    ``gaussian_ring`` is proportional to exp(-|alpha - center|^2 / width);
    ``exponential`` is the same law about the origin, written in the action
    I = |alpha|^2 as exp(-I/width)/(pi*width); ``delta`` is a single point.
    """

    kind: DensityKind = DensityKind.GAUSSIAN_RING
    width: float = 1e-2
    center: complex = 2.0 + 0.0j
    n_samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", DensityKind(self.kind))
        object.__setattr__(self, "center", complex(self.center))
        if self.kind != DensityKind.DELTA and not self.width > 0:
            raise ValueError("width must be positive for non-delta densities")
        if self.kind == DensityKind.EXPONENTIAL and self.center != 0:
            raise ValueError("the exponential density is centered at the origin")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")

    def sample(self):
        """Initial amplitudes; a delta density yields its single point."""
        if self.kind == DensityKind.DELTA:
            return np.array([self.center])
        rng = stream(self.seed, "density")
        z = rng.standard_normal((self.n_samples, 2))
        return self.center + np.sqrt(self.width / 2.0) * (z[:, 0] + 1j * z[:, 1])

    def radial_density(self, I):
        """P(I) for densities centered at the origin (None for a delta)."""
        if self.center != 0:
            raise ValueError("radial density needs a density centered at the origin")
        if self.kind == DensityKind.DELTA:
            return None
        I = np.asarray(I, dtype=float)
        return np.exp(-I / self.width) / (np.pi * self.width)


@dataclass(frozen=True, eq=False)
class OscillatorEnsemble:
    times: np.ndarray
    phi: np.ndarray
    I: np.ndarray


def simulate_density(P, params, T, samples_per_period=1, threads=None, backend=None):
    """Evolve every sample of P for ``T`` periods (T rounded up to an integer)."""
    n_periods = int(np.ceil(T - 1e-12))
    times, alpha, phi = run_orbits(P.sample(), params, n_periods, samples_per_period,
                                   threads=threads, backend=backend)
    I = alpha.real**2 + alpha.imag**2
    return OscillatorEnsemble(times, phi, I)


def _ensemble(P, params, T, ensemble):
    if ensemble is not None:
        return ensemble
    if P.kind != DensityKind.DELTA and P.n_samples < 1000:
        raise ValueError("phase correlations need at least 10^3 samples")
    return simulate_density(P, params, T)


def phase_correlation(P, params, c, T, ensemble=None):
    """<exp(i c [phi(t) - phi(0)])> over P, as a complex series."""
    ens = _ensemble(P, params, T, ensemble)
    z = np.exp(1j * c * ens.phi)
    out = z.mean(axis=0)
    out[0] = 1.0
    return out


def allegiance_classical(P, params, sigma, T, ensemble=None):
    """|<exp(i sigma/2 [phi(t) - phi(0)])>|^2."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return np.abs(phase_correlation(P, params, sigma / 2.0, T, ensemble)) ** 2


def correlator_fit(times, series, floor=1e-2, min_points=4):
    """Exponential fit from t = 0 up to the point before the series first drops below ``floor``."""
    s = np.asarray(series)
    below = np.flatnonzero(s < floor)
    stop = below[0] if len(below) else len(s)
    return fit_exp_rate(s[:stop], times=np.asarray(times)[:stop], min_points=min_points)


@dataclass(frozen=True, eq=False)
class ActionCumulant:
    times: np.ndarray
    chi2: np.ndarray
    K_int: float
    tau_I: float
    D: float
    D_r2: float
    lags: np.ndarray
    kernel: np.ndarray
    decaying: bool


def _stationary_kernel(I, n_window, n_lags):
    """Covariance <dI(t0) dI(t0+lag)> averaged over t0 in the first n_window samples."""
    dI = I - I.mean(axis=0)
    n_lags = min(n_lags, I.shape[1] - 1)
    n_window = max(1, min(n_window, I.shape[1] - n_lags))
    K = np.empty(n_lags + 1)
    for lag in range(n_lags + 1):
        K[lag] = np.mean(np.mean(dI[:, :n_window] * dI[:, lag:lag + n_window], axis=0))
    return K


def _fit_tau(lags, K):
    ratio = K / K[0]
    ok = np.flatnonzero((ratio <= 1e-3) | ~np.isfinite(ratio))
    stop = ok[0] if len(ok) else len(ratio)
    if stop >= 3:
        slope = np.polyfit(lags[:stop], np.log(ratio[:stop]), 1)[0]
        if slope < 0:
            return -1.0 / slope
    step = lags[1] - lags[0]
    r1 = max(ratio[1], 1e-3) if len(ratio) > 1 else 1e-3
    return step / np.log(1.0 / min(r1, 0.999))


def action_cumulant(P, params, T, ensemble=None):
    """Second cumulant chi2(t) of the action integral, with K, tau_I and D.

    chi2(t) is the variance of integral_0^t I(tau) dtau, which is the double
    integral of the action covariance. It is evaluated exactly through the
    accumulated phase, phi(t) - omega0*t = 2*integral_0^t I, so no
    quadrature is needed across the kicks.
    """
    ens = _ensemble(P, params, T, ensemble)
    t = ens.times
    action_integral = (ens.phi - params.omega0 * t[None, :]) / 2.0
    chi2 = action_integral.var(axis=0)
    chi2[0] = 0.0

    step = t[1] - t[0]
    tau = 1.0
    for _ in range(2):
        n_w = max(2, int(np.ceil(5 * tau / step)))
        K = _stationary_kernel(ens.I, n_w, n_w)
        lags = np.arange(len(K)) * step
        tau = _fit_tau(lags, K)
    decaying = bool(np.any(K[1:] / K[0] < 0.5))
    if not decaying:
        warnings.warn("action covariance does not decay: the drive may be below the chaos threshold",
                      ConvergenceWarning, stacklevel=2)
    peak = K[0]
    small = np.flatnonzero(np.abs(K) < 1e-3 * peak)
    stop = small[0] if len(small) else len(K)
    K_int = float(np.trapezoid(K[:stop], lags[:stop])) if stop > 1 else float(0.5 * K[0] * step)

    meanI = ens.I.mean(axis=0)
    c = np.polyfit(t, meanI, 1)
    resid = meanI - np.polyval(c, t)
    ss = np.sum((meanI - meanI.mean()) ** 2)
    r2 = float(1 - np.sum(resid**2) / ss) if ss > 0 else 1.0
    return ActionCumulant(t, chi2, K_int, float(tau), float(c[0]), r2, lags, K, decaying)


@dataclass(frozen=True)
class ChaosCheck:
    phase_rate: float
    D: float
    D_r2: float
    relative_growth: float
    ok: bool
    message: str


def chaos_check(ensemble, params, min_r2=0.95, min_growth=0.1):
    """Decide whether a drive configuration is in the chaotic regime.

    Needs a positive decay rate of the c=1 phase correlator, and a mean
    action that grows linearly (R^2 >= ``min_r2``) by at least
    ``min_growth`` of its initial value over the run.
    """
    t = ensemble.times
    C = np.abs(np.mean(np.exp(1j * ensemble.phi), axis=0)) ** 2
    try:
        rate = correlator_fit(t, C).rate
    except FitError:
        rate = float("nan")
    meanI = ensemble.I.mean(axis=0)
    D, _, r2 = linear_fit_r2(t, meanI)
    growth = float((meanI[-1] - meanI[0]) / max(meanI[0], 1e-300))
    problems = []
    if not rate > 0:
        problems.append("the phase correlator does not decay")
    if growth < min_growth:
        problems.append(f"the mean action grows by only {growth:.3g} of its initial value")
    elif r2 < min_r2:
        problems.append(f"the mean action is not linear in time (R^2 = {r2:.3f})")
    msg = "chaotic" if not problems else (
        "; ".join(problems) + ". Increase the drive (kick strength or harmonic amplitudes) "
        "or move the initial density to larger action.")
    return ChaosCheck(float(rate), D, r2, growth, not problems, msg)


def fgr_prediction(chi2, sigma):
    """Second-cumulant law exp(-sigma^2 chi2(t))."""
    if sigma > 0.3:
        warnings.warn(f"sigma={sigma} > 0.3: the second-cumulant law is outside its validity range",
                      stacklevel=2)
    return np.exp(-(sigma**2) * np.asarray(chi2))


def linear_fit_r2(t, y):
    """Slope, intercept and R^2 of a straight-line fit."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    c = np.polyfit(t, y, 1)
    ss = np.sum((y - y.mean()) ** 2)
    r2 = float(1 - np.sum((y - np.polyval(c, t)) ** 2) / ss) if ss > 0 else 1.0
    return float(c[0]), float(c[1]), r2
