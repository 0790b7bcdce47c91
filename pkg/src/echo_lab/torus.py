"""Torus-quantized Hilbert space for the kicked rotor.

Position nodes are theta_j = 2*pi*j/N and momentum nodes are
p_n = hbar*(n - N//2), so momentum amplitudes are stored in ascending
momentum order starting from p = -pi.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import GridMismatchError
from .rng import stream

TWO_PI = 2.0 * np.pi


class Basis(str, Enum):
    POSITION = "position"
    MOMENTUM = "momentum"


@dataclass(frozen=True)
class TorusGrid:
    N: int
    hbar_eff: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"grid size must be an integer >= 2, got {self.N!r}")

    @property
    def theta(self):
        return TWO_PI * np.arange(self.N) / self.N

    @property
    def p(self):
        """Momentum nodes in storage order (ascending from -pi)."""
        return self.hbar_eff * (np.arange(self.N) - self.N // 2)

    @property
    def p_fft(self):
        """Momentum nodes in raw FFT order, used inside the propagators."""
        return np.fft.ifftshift(self.p)


def make_grid(N):
    """Grid of N points with hbar_eff = 2*pi/N."""
    if isinstance(N, bool) or int(N) != N:
        raise ValueError(f"grid size must be an integer, got {N!r}")
    N = int(N)
    if N < 2:
        raise ValueError(f"grid size must be >= 2, got {N}")
    return TorusGrid(N=N, hbar_eff=TWO_PI / N)


@dataclass(frozen=True, eq=False)
class WaveFunction:
    grid: TorusGrid
    amplitudes: np.ndarray
    basis: Basis = Basis.POSITION

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.grid.N,):
            raise ValueError(f"expected {self.grid.N} amplitudes, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "basis", Basis(self.basis))

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def __mul__(self, scalar):
        return WaveFunction(self.grid, self.amplitudes * scalar, self.basis)

    __rmul__ = __mul__


def to_momentum(amps):
    """Position amplitudes (last axis) to momentum amplitudes in storage order."""
    return np.fft.fftshift(np.fft.fft(amps, axis=-1, norm="ortho"), axes=-1)


def to_position(amps):
    return np.fft.ifft(np.fft.ifftshift(amps, axes=-1), axis=-1, norm="ortho")


def transform(psi, target):
    """Unitary change of basis; returns psi unchanged if already in ``target``."""
    target = Basis(target)
    if psi.basis == target:
        return psi
    if target == Basis.MOMENTUM:
        return WaveFunction(psi.grid, to_momentum(psi.amplitudes), Basis.MOMENTUM)
    return WaveFunction(psi.grid, to_position(psi.amplitudes), Basis.POSITION)


def inner_product(psi, phi):
    """<psi|phi> = sum_j conj(psi_j) phi_j."""
    if psi.grid != phi.grid:
        raise GridMismatchError(f"grids differ: N={psi.grid.N} vs N={phi.grid.N}")
    if psi.basis != phi.basis:
        raise GridMismatchError("states are stored in different bases; transform one first")
    return complex(np.vdot(psi.amplitudes, phi.amplitudes))


def default_width(grid):
    """Minimum-uncertainty packet width sqrt(hbar/2)."""
    return float(np.sqrt(grid.hbar_eff / 2.0))


def packet_amplitudes(grid, centers, sigma_theta):
    """Normalized position amplitudes of periodic Gaussian packets, shape (k, N).

    The winding-number sum over images stops once the newly added terms are
    all below 1e-16 in magnitude.
    """
    if not sigma_theta > 0:
        raise ValueError(f"packet width must be positive, got {sigma_theta}")
    if sigma_theta > np.pi / 4:
        raise ValueError(f"packet width {sigma_theta} > pi/4: periodic images overlap")
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    hbar = grid.hbar_eff
    theta = grid.theta[None, :]
    th0 = centers[:, 0:1]
    p0 = centers[:, 1:2]
    d = np.mod(theta - th0 + np.pi, TWO_PI) - np.pi
    inv4s2 = 1.0 / (4.0 * sigma_theta**2)

    def term(shift):
        x = d + shift
        return np.exp(-x * x * inv4s2 + 1j * p0 * x / hbar)

    psi = term(0.0)
    w = 1
    while True:
        plus = term(TWO_PI * w)
        minus = term(-TWO_PI * w)
        psi = psi + plus + minus
        if max(np.max(np.abs(plus)), np.max(np.abs(minus))) < 1e-16:
            break
        w += 1
    psi /= np.linalg.norm(psi, axis=1)[:, None]
    return psi


def gaussian_packet(grid, theta0, p0, sigma_theta=None):
    """Periodic Gaussian packet centered at (theta0, p0), normalized to one."""
    if sigma_theta is None:
        sigma_theta = default_width(grid)
    amps = packet_amplitudes(grid, [[theta0, p0]], sigma_theta)[0]
    return WaveFunction(grid, amps, Basis.POSITION)


@dataclass(frozen=True)
class Region:
    """Rectangle in scaled coordinates (theta/2pi, p/2pi)."""

    theta: tuple
    p: tuple

    def __post_init__(self):
        for lo, hi in (self.theta, self.p):
            if not hi > lo:
                raise ValueError(f"empty region interval [{lo}, {hi}]")

    @property
    def area(self):
        """Area in (theta, p) units."""
        return TWO_PI**2 * (self.theta[1] - self.theta[0]) * (self.p[1] - self.p[0])

    def contains(self, theta, p):
        u = np.asarray(theta) / TWO_PI
        v = np.asarray(p) / TWO_PI
        eps = 1e-12
        return ((u >= self.theta[0] - eps) & (u <= self.theta[1] + eps)
                & (v >= self.p[0] - eps) & (v <= self.p[1] + eps))


REFERENCE_REGION = Region(theta=(0.2, 0.3), p=(0.3, 0.4))


@dataclass(frozen=True, eq=False)
class MixtureSpec:
    weights: np.ndarray
    centers: np.ndarray
    sigma_theta: float
    region: Region
    seed: int = 0
    layout: str = field(default="random")

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        c = np.array(self.centers, dtype=float).reshape(-1, 2)
        if len(w) != len(c) or len(w) == 0:
            raise ValueError("weights and centers must be nonempty and of equal length")
        if np.any(w <= 0):
            raise ValueError("mixture weights must be positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {w.sum()!r}, expected 1")
        if not np.all(self.region.contains(c[:, 0], c[:, 1])):
            raise ValueError("a packet center lies outside the mixture region")
        for arr in (w, c):
            arr.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "centers", c)

    @property
    def size(self):
        return len(self.weights)

    @classmethod
    def uniform_random(cls, region, n, seed, sigma_theta):
        """n equal-weight packets with centers drawn uniformly in ``region``."""
        if n < 1:
            raise ValueError("a mixture needs at least one packet")
        rng = stream(seed, "mixture")
        u = rng.uniform(region.theta[0], region.theta[1], n)
        v = rng.uniform(region.p[0], region.p[1], n)
        centers = TWO_PI * np.column_stack([u, v])
        return cls(np.full(n, 1.0 / n), centers, sigma_theta, region, seed, "random")

    @classmethod
    def regular_grid(cls, region, n_theta, n_p, sigma_theta):
        """Equal-weight packets on the cell centers of an n_theta x n_p lattice."""
        gu = region.theta[0] + (np.arange(n_theta) + 0.5) * (region.theta[1] - region.theta[0]) / n_theta
        gv = region.p[0] + (np.arange(n_p) + 0.5) * (region.p[1] - region.p[0]) / n_p
        uu, vv = np.meshgrid(gu, gv, indexing="ij")
        centers = TWO_PI * np.column_stack([uu.ravel(), vv.ravel()])
        n = len(centers)
        return cls(np.full(n, 1.0 / n), centers, sigma_theta, region, 0, "grid")
