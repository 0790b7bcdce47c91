"""Classical standard map: ensembles, Lyapunov exponent, angular correlation, diffusion."""

import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConvergenceWarning
from .kicked_rotor import KickOrder
from .parallel import map_chunks
from .rng import stream
from .torus import TWO_PI, Region


def wrap_theta(theta):
    return np.mod(theta, TWO_PI)


def wrap_p(p):
    return p - TWO_PI * np.floor((p + np.pi) / TWO_PI)


@dataclass(frozen=True)
class PhasePoint:
    theta: float
    p: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(wrap_theta(self.theta)))
        object.__setattr__(self, "p", float(wrap_p(self.p)))


def std_map_step(pt, K, order=KickOrder.KICK_THEN_DRIFT):
    """One map step: p' = p + K sin(theta), theta' = theta + p' (reduced to the torus).

    With ``order=drift_then_kick`` the drift comes first, matching the quantum
    Floquet ordering of the same name.
    """
    th, p = pt.theta, pt.p
    if KickOrder(order) == KickOrder.KICK_THEN_DRIFT:
        p = wrap_p(p + K * np.sin(th))
        th = wrap_theta(th + p)
    else:
        th = wrap_theta(th + p)
        p = wrap_p(p + K * np.sin(th))
    return PhasePoint(th, p)


def step_jacobian(theta, p, K, order=KickOrder.KICK_THEN_DRIFT):
    """Analytic Jacobian d(theta', p')/d(theta, p) of one step."""
    if KickOrder(order) == KickOrder.KICK_THEN_DRIFT:
        c = K * np.cos(theta)
        return np.array([[1.0 + c, 1.0], [c, 1.0]])
    c = K * np.cos(theta + p)
    return np.array([[1.0, 1.0], [c, 1.0 + c]])


@dataclass(frozen=True, eq=False)
class ClassicalEnsemble:
    theta: np.ndarray
    p: np.ndarray
    seed: int

    def __post_init__(self):
        th = np.array(self.theta, dtype=float)
        p = np.array(self.p, dtype=float)
        if th.shape != p.shape:
            raise ValueError("theta and p must have equal length")
        th.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "p", p)

    def __len__(self):
        return len(self.theta)

    def __getitem__(self, i):
        return PhasePoint(self.theta[i], self.p[i])

    @property
    def points(self):
        return [self[i] for i in range(len(self))]

    @property
    def initial_points(self):
        # the stored arrays are read-only, so the initial state is frozen by construction
        return self.points

    def halves(self):
        """Two disjoint sub-ensembles (first and second half)."""
        m = len(self) // 2
        return (ClassicalEnsemble(self.theta[:m], self.p[:m], self.seed),
                ClassicalEnsemble(self.theta[m:], self.p[m:], self.seed))


def make_ensemble(region, n, seed):
    """n points uniform in ``region`` (scaled coordinates theta/2pi, p/2pi)."""
    if n < 1:
        raise ValueError("ensemble size must be >= 1")
    if not isinstance(region, Region):
        region = Region(tuple(region[0]), tuple(region[1]))
    rng = stream(seed, "ensemble")
    u = rng.uniform(region.theta[0], region.theta[1], n)
    v = rng.uniform(region.p[0], region.p[1], n)
    return ClassicalEnsemble(TWO_PI * u, TWO_PI * v, int(seed))


@dataclass(frozen=True)
class EnsembleStats:
    times: np.ndarray
    correlation: np.ndarray
    msd_p: np.ndarray


def ensemble_stats(ens, K, gamma=2.0, T=20, order=KickOrder.DRIFT_THEN_KICK,
                   unwrapped=True, threads=None, backend=None):
    """Angular correlation |<exp(i gamma (theta_t - theta_0))>|^2 and momentum MSD for t = 0..T.

    The angle is accumulated along each orbit when ``unwrapped`` is set and
    taken modulo 2*pi otherwise; the momentum used for the MSD is never
    reduced.
    """
    T = int(T)
    if T < 1:
        raise ValueError("T must be >= 1")
    drift_first = KickOrder(order) == KickOrder.DRIFT_THEN_KICK
    th, p = ens.theta, ens.p

    def work(a, b):
        c = np.zeros(T + 1)
        s = np.zeros(T + 1)
        m = np.zeros(T + 1)
        kernels.std_map_stats(np.ascontiguousarray(th[a:b]), np.ascontiguousarray(p[a:b]),
                              float(K), float(gamma), T, drift_first, bool(unwrapped),
                              c, s, m, backend=backend)
        return c, s, m

    parts = map_chunks(work, len(ens), threads=threads, min_chunk=16384)
    c = np.zeros(T + 1)
    s = np.zeros(T + 1)
    m = np.zeros(T + 1)
    for pc, ps, pm in parts:
        c += pc
        s += ps
        m += pm
    n = len(ens)
    corr = (c / n) ** 2 + (s / n) ** 2
    corr[0] = 1.0
    return EnsembleStats(np.arange(T + 1), corr, m / n)


def angular_correlation(ens, K, gamma=2.0, T=20, order=KickOrder.DRIFT_THEN_KICK,
                        unwrapped=True, threads=None):
    return ensemble_stats(ens, K, gamma, T, order, unwrapped, threads).correlation


def momentum_msd(ens, K, T=50, order=KickOrder.DRIFT_THEN_KICK, threads=None):
    """<(p_t - p_0)^2> with p accumulated (never reduced)."""
    return ensemble_stats(ens, K, 0.0, T, order, True, threads).msd_p


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    per_point: np.ndarray
    spread: float
    converged: bool

    def __float__(self):
        return self.value


def lyapunov(K, n_transient=100, n_iter=100_000, seed=0, n_points=16, renorm_every=10,
             order=KickOrder.KICK_THEN_DRIFT, backend=None):
    """Largest Lyapunov exponent by tangent-map iteration, averaged over random start points.

    The tangent vector is renormalized every ``renorm_every`` steps. A
    relative spread above 10% among start points emits a ConvergenceWarning
    and clears ``converged``.
    """
    if n_iter < 10_000:
        raise ValueError("n_iter must be >= 10^4")
    if n_points < 10:
        raise ValueError("average over at least 10 start points")
    rng = stream(seed, "lyapunov")
    th = rng.uniform(0.0, TWO_PI, n_points)
    p = rng.uniform(-np.pi, np.pi, n_points)
    out = np.zeros(n_points)
    drift_first = KickOrder(order) == KickOrder.DRIFT_THEN_KICK
    kernels.lyapunov_tangent(th, p, float(K), int(n_transient), int(n_iter), int(renorm_every),
                             drift_first, out, backend=backend)
    value = float(np.mean(out))
    spread = float(np.max(out) - np.min(out))
    converged = True
    if abs(value) > 1e-2 and spread > 0.1 * abs(value):
        converged = False
        warnings.warn(f"Lyapunov estimates spread {spread:.3g} exceeds 10% of the mean {value:.3g}",
                      ConvergenceWarning, stacklevel=2)
    return LyapunovEstimate(value, out, spread, converged)
