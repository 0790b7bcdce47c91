"""Classical orbits of the driven quartic oscillator.

The amplitude obeys d(alpha)/dt = -i[(omega0 + 2|alpha|^2) alpha - g(t)] with
a period-one force g(t). The force may combine smooth harmonics
g_m cos(2 pi m t + chi_m) with a train of delta kicks of strength k at
t = m + 1/2. Each kick shifts alpha by i*k exactly. Without smooth
harmonics the motion between kicks is a free rotation, which is evaluated
in closed form. Otherwise fixed-step RK4 is used.

Orbit values at a kick instant are left limits (taken just before the kick).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from .. import kernels
from ..errors import AccuracyError
from ..parallel import map_chunks

HALVING_TOL = 1e-5


@dataclass(frozen=True)
class DriveSpec:
    """Period-one force: smooth harmonics ``modes`` = ((m, g_m, chi_m), ...) plus a kick train."""

    modes: tuple = ()
    kick: float = 0.0

    def __post_init__(self):
        modes = tuple((int(m), float(g), float(chi)) for m, g, chi in self.modes)
        for m, g, chi in self.modes:
            if int(m) != m or m < 1:
                raise ValueError(f"harmonic index must be an integer >= 1, got {m!r}")
        if not modes and self.kick == 0.0:
            raise ValueError("drive needs at least one harmonic or a nonzero kick")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "kick", float(self.kick))

    @classmethod
    def two_mode(cls, g1=1.5, g2=1.5, chi=np.pi / 3):
        return cls(modes=((1, g1, 0.0), (2, g2, chi)))

    @classmethod
    def kicked(cls, k=1.0):
        return cls(kick=k)

    @property
    def smooth(self):
        return bool(self.modes)

    def g_smooth(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for m, g, chi in self.modes:
            out = out + g * np.cos(2 * np.pi * m * t + chi)
        return out

    def mode_arrays(self):
        if not self.modes:
            e = np.zeros(0)
            return e, e.copy(), e.copy()
        arr = np.array(self.modes, dtype=float)
        return (np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1]),
                np.ascontiguousarray(arr[:, 2]))


DEFAULT_DRIVE = DriveSpec(kick=1.0)


@dataclass(frozen=True)
class OscillatorParams:
    omega0: float = 1.0
    hbar: float = 1e-4
    drive: DriveSpec = field(default_factory=lambda: DEFAULT_DRIVE)
    dt: float = 1e-3

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.drive.smooth:
            steps = 1.0 / self.dt
            if abs(steps - round(steps)) > 1e-9 * steps or round(steps) % 2:
                raise ValueError("1/dt must be an even integer so kicks fall on the step grid")

    @property
    def steps_per_period(self):
        return int(round(1.0 / self.dt))

    def with_dt(self, dt):
        return OscillatorParams(self.omega0, self.hbar, self.drive, dt)


def _check_spp(params, spp):
    if spp < 1:
        raise ValueError("samples per period must be >= 1")
    if params.drive.smooth and params.steps_per_period % spp:
        raise ValueError(f"samples per period {spp} must divide the {params.steps_per_period} RK4 steps")


def run_orbits(alpha0, params, n_periods, spp=1, omega=None, threads=None, backend=None):
    """Integrate many orbits; returns (times, alpha, phi) with arrays of shape (n, n_periods*spp + 1)."""
    _check_spp(params, spp)
    a = np.atleast_1d(np.asarray(alpha0, dtype=complex))
    n = len(a)
    om = np.full(n, float(params.omega0)) if omega is None else np.ascontiguousarray(omega, dtype=float)
    x0 = np.ascontiguousarray(a.real)
    y0 = np.ascontiguousarray(a.imag)
    mm, gg, chi = params.drive.mode_arrays()
    nt = n_periods * spp + 1
    out_x = np.empty((n, nt))
    out_y = np.empty((n, nt))
    out_phi = np.empty((n, nt))

    def work(start, stop):
        kernels.osc_orbits(x0[start:stop], y0[start:stop], om[start:stop], params.drive.kick,
                           mm, gg, chi, float(params.dt), int(n_periods), int(spp),
                           out_x[start:stop], out_y[start:stop], out_phi[start:stop],
                           backend=backend)

    map_chunks(work, n, threads=threads, min_chunk=256)
    times = np.arange(nt) / spp
    return times, out_x + 1j * out_y, out_phi


@dataclass(frozen=True, eq=False)
class OscillatorTrajectory:
    times: np.ndarray
    alpha: np.ndarray
    I: np.ndarray
    phi: np.ndarray
    eq7_residual: float
    halving_error: float


def action_integral(times, alpha, phi, params):
    """alpha0 + i * integral_0^t g(tau) exp(i phi(tau)) dtau on the sample grid.

    Requires the samples to include every kick instant; the smooth part is
    integrated with cumulative Simpson.
    """
    alpha0 = alpha[0]
    out = np.full(len(times), alpha0, dtype=complex)
    if params.drive.smooth:
        integrand = params.drive.g_smooth(times) * np.exp(1j * phi)
        # cumulative_simpson is real-only, so the two parts go separately
        acc = (cumulative_simpson(integrand.real, x=times)
               + 1j * cumulative_simpson(integrand.imag, x=times))
        out[1:] += 1j * acc
    if params.drive.kick != 0.0:
        kick_times = np.arange(0.5, times[-1], 1.0)
        for tk in kick_times:
            j = int(np.argmin(np.abs(times - tk)))
            if abs(times[j] - tk) > 1e-9:
                raise ValueError("sample grid misses a kick instant")
            out[times > tk + 1e-12] += 1j * params.drive.kick * np.exp(1j * phi[j])
    return out


def integrate_orbit(alpha0, params, T, samples_per_period=None, check_halving=True):
    """Single orbit on [0, T] with the integral-equation residual and a step-halving check.

    Raises AccuracyError when halving dt moves alpha(T) by more than 1e-5
    (relative). The kick-only drive is integrated in closed form, so the
    check is trivially met there.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    n_periods = int(np.ceil(T - 1e-12))
    if params.drive.smooth:
        internal = params.steps_per_period
    else:
        internal = samples_per_period or 20
        if internal % 2:
            internal *= 2
    spp = samples_per_period or internal
    if internal % spp:
        raise ValueError(f"samples per period {spp} must divide {internal}")
    times, alpha, phi = run_orbits(alpha0, params, n_periods, internal, threads=1)
    alpha, phi = alpha[0], phi[0]
    I = np.abs(alpha) ** 2
    a_int = action_integral(times, alpha, phi, params)
    residual = float(np.max(np.abs(I - np.abs(a_int) ** 2)))

    keep = (np.arange(len(times)) % (internal // spp) == 0) & (times <= T + 1e-12)
    halving = 0.0
    if check_halving and params.drive.smooth:
        # compared at the end of the integrated span, ceil(T)
        _, a2, _ = run_orbits(alpha0, params.with_dt(params.dt / 2), n_periods, spp=1, threads=1)
        ref = a2[0, -1]
        halving = float(abs(alpha[-1] - ref) / max(abs(ref), 1e-300))
        if halving > HALVING_TOL:
            raise AccuracyError(
                f"halving dt moved alpha(T) by {halving:.2e} (relative) > {HALVING_TOL}; "
                "reduce dt or shorten T")
    return OscillatorTrajectory(times[keep], alpha[keep], I[keep], phi[keep], residual, halving)

