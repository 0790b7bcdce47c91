"""Quantum kicked rotor on the torus and its echo amplitudes.

One Floquet period multiplies by exp(-i K cos(theta)/hbar) in the position
basis and by exp(-i c p^2/(2 hbar)) in the momentum basis. The perturbed
propagator uses c = 1 + eps (asymmetric split) or c = 1 +/- eps/2
(symmetric split, with the minus sign for the reference evolution).
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NormalizationError, PropagationError
from .parallel import map_chunks
from .torus import Basis, WaveFunction, packet_amplitudes, to_momentum, transform

NORM_TOL = 1e-6


class KickOrder(str, Enum):
    KICK_THEN_DRIFT = "kick_then_drift"
    DRIFT_THEN_KICK = "drift_then_kick"


class PerturbationSplit(str, Enum):
    ASYMMETRIC = "asymmetric"
    SYMMETRIC = "symmetric"


@dataclass(frozen=True)
class KickedRotorParams:
    K: float
    eps: float
    grid: object
    kick_order: KickOrder = KickOrder.DRIFT_THEN_KICK
    split: PerturbationSplit = PerturbationSplit.ASYMMETRIC

    def __post_init__(self):
        object.__setattr__(self, "kick_order", KickOrder(self.kick_order))
        object.__setattr__(self, "split", PerturbationSplit(self.split))
        if not np.isfinite(self.K) or not np.isfinite(self.eps):
            raise ValueError("K and eps must be finite")
        # a negative eps is only meaningful for the symmetric split, where it
        # swaps the roles of the two evolutions
        if self.eps < 0 and self.split == PerturbationSplit.ASYMMETRIC:
            raise ValueError("eps must be >= 0 for the asymmetric split")

    @property
    def sigma(self):
        """Perturbation strength in units of hbar, eps/hbar."""
        return self.eps / self.grid.hbar_eff

    def drift_coefficient(self, perturbed):
        if self.split == PerturbationSplit.ASYMMETRIC:
            return 1.0 + self.eps if perturbed else 1.0
        return 1.0 + 0.5 * self.eps if perturbed else 1.0 - 0.5 * self.eps


def _factors(params, perturbed, fft_order=True):
    grid = params.grid
    hbar = grid.hbar_eff
    p = grid.p_fft if fft_order else grid.p
    c = params.drift_coefficient(perturbed)
    drift = np.exp(-1j * c * p * p / (2.0 * hbar))
    kick = np.exp(-1j * params.K * np.cos(grid.theta) / hbar)
    return kick, drift


def _propagate(amps, kick, drift, order):
    """One period for a batch of position amplitudes on the last axis."""
    if order == KickOrder.KICK_THEN_DRIFT:
        return np.fft.ifft(np.fft.fft(amps * kick, axis=-1) * drift, axis=-1)
    return np.fft.ifft(np.fft.fft(amps, axis=-1) * drift, axis=-1) * kick


def _check_normalized(psi):
    n = psi.norm()
    if abs(n - 1.0) > NORM_TOL:
        raise NormalizationError(f"state norm {n:.3e} deviates from 1 by more than {NORM_TOL}")


def kr_step(psi, params, perturbed=False):
    """Apply one Floquet period; the result is returned in the position basis."""
    _check_normalized(psi)
    pos = transform(psi, Basis.POSITION)
    kick, drift = _factors(params, perturbed)
    out = _propagate(pos.amplitudes, kick, drift, params.kick_order)
    return WaveFunction(psi.grid, out, Basis.POSITION)


def dft_matrix(grid):
    """Dense unitary F with F[n, j] = exp(-i p_n theta_j / hbar)/sqrt(N)."""
    phase = np.outer(grid.p, grid.theta) / grid.hbar_eff
    return np.exp(-1j * phase) / np.sqrt(grid.N)


def floquet_matrix(params, perturbed=False):
    """Explicit N x N Floquet unitary acting on position amplitudes (N <= 64)."""
    grid = params.grid
    if grid.N > 64:
        raise ValueError(f"dense oracle limited to N <= 64, got N={grid.N}")
    kick, drift = _factors(params, perturbed, fft_order=False)
    F = dft_matrix(grid)
    D = np.diag(drift)
    Kmat = np.diag(kick)
    free = F.conj().T @ D @ F
    if params.kick_order == KickOrder.KICK_THEN_DRIFT:
        return free @ Kmat
    return Kmat @ free


def dense_oracle_step(psi, params, perturbed=False):
    """Reference step by dense matrix-vector multiplication."""
    U = floquet_matrix(params, perturbed)
    _check_normalized(psi)
    pos = transform(psi, Basis.POSITION)
    return WaveFunction(psi.grid, U @ pos.amplitudes, Basis.POSITION)


@dataclass(frozen=True, eq=False)
class EchoRecord:
    """Echo amplitudes f[k, t] for t = 0..T, plus optional cross amplitudes.

    ``cross[t, k, k']`` holds <psi_k(t)|psi_k'^eps(t)>; at t = 0 it is the
    packet Gram matrix.
    """

    times: np.ndarray
    amplitudes: np.ndarray
    weights: np.ndarray
    cross: np.ndarray = None
    gram: np.ndarray = None

    @property
    def n_packets(self):
        return self.amplitudes.shape[0]

    def rows(self):
        """(t, k, re_f, im_f) tuples in time-major order."""
        for ti, t in enumerate(self.times):
            for k in range(self.n_packets):
                z = self.amplitudes[k, ti]
                yield int(t), k, z.real, z.imag


def echo_amplitudes(mixture, params, T, want_cross=False, threads=None):
    """Echo amplitudes of every packet in the mixture for t = 0..T."""
    if int(T) != T or T < 1:
        raise ValueError(f"T must be a positive integer, got {T!r}")
    T = int(T)
    grid = params.grid
    psi0 = packet_amplitudes(grid, mixture.centers, mixture.sigma_theta)
    k0, d0 = _factors(params, False)
    k1, d1 = _factors(params, True)
    order = params.kick_order
    n = len(psi0)

    if want_cross:
        a0 = psi0.copy()
        a1 = psi0.copy()
        cross = np.empty((T + 1, n, n), dtype=complex)
        cross[0] = a0.conj() @ a1.T
        f = np.empty((n, T + 1), dtype=complex)
        f[:, 0] = np.einsum("kj,kj->k", a0.conj(), a1)
        for t in range(1, T + 1):
            a0 = _propagate(a0, k0, d0, order)
            a1 = _propagate(a1, k1, d1, order)
            _check_batch_norm(a0, t)
            _check_batch_norm(a1, t)
            cross[t] = a0.conj() @ a1.T
            f[:, t] = np.diagonal(cross[t])
        gram = cross[0].copy()
        return EchoRecord(np.arange(T + 1), f, mixture.weights.copy(), cross, gram)

    def work(start, stop):
        a0 = psi0[start:stop].copy()
        a1 = a0.copy()
        out = np.empty((stop - start, T + 1), dtype=complex)
        out[:, 0] = np.einsum("kj,kj->k", a0.conj(), a1)
        for t in range(1, T + 1):
            a0 = _propagate(a0, k0, d0, order)
            a1 = _propagate(a1, k1, d1, order)
            _check_batch_norm(a0, t)
            _check_batch_norm(a1, t)
            out[:, t] = np.einsum("kj,kj->k", a0.conj(), a1)
        return out

    parts = map_chunks(work, n, threads=threads, min_chunk=8)
    f = np.concatenate(parts, axis=0)
    gram = psi0.conj() @ psi0.T
    return EchoRecord(np.arange(T + 1), f, mixture.weights.copy(), None, gram)


def _check_batch_norm(amps, t):
    norms = np.sqrt(np.sum(np.abs(amps) ** 2, axis=-1))
    drift = float(np.max(np.abs(norms - 1.0)))
    if drift > NORM_TOL:
        raise PropagationError(f"norm drift {drift:.3e} at step {t} exceeds {NORM_TOL}")


def momentum_distribution(psi):
    """|psi_n|^2 on the momentum nodes (storage order)."""
    if psi.basis == Basis.MOMENTUM:
        return np.abs(psi.amplitudes) ** 2
    return np.abs(to_momentum(psi.amplitudes)) ** 2
