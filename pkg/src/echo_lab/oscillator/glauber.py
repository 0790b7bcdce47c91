"""Glauber P density <-> Fock-state weights for isotropic mixtures centered at the origin.

Forward map:
    rho_n = (pi/n!) * integral_0^inf P(I) exp(-I/hbar) (I/hbar)^n dI

Inverse map:
    P(I) = exp(I/hbar)/(2 pi^2) * integral dk exp(ikI) R(k),   R(k) = sum_n rho_n (-i hbar k)^n

The series R has a finite radius of convergence, and exp(I/hbar)
amplifies any quadrature error. So the k-integral is done by residues of
a Pade resummation of R. A simple pole z_j of R(z), with z = -i hbar k and
residue c_j, contributes
    P(I) += -(c_j / (pi hbar)) exp(-(z_j - 1) I / hbar).
This is exact whenever R is rational, which covers every mixture of
exponential densities. The result is certified by mapping the pole
expansion back to Fock weights and comparing with the input.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import pade
from scipy.linalg import LinAlgWarning
from scipy.special import logsumexp
from scipy.stats import poisson

from ..errors import IllConditionedError

SUM_TOL = 1e-8
TAIL_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class FockWeights:
    rho: np.ndarray

    def __post_init__(self):
        r = np.array(self.rho, dtype=float)
        if np.any(r < -1e-12):
            raise ValueError(f"Fock weight {r.min():.3e} is negative beyond rounding")
        r = np.clip(r, 0.0, None)
        if abs(r.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"Fock weights sum to {r.sum():.12f}, expected 1")
        r.setflags(write=False)
        object.__setattr__(self, "rho", r)

    @property
    def n_max(self):
        return len(self.rho) - 1

    def rows(self):
        return ((n, float(v)) for n, v in enumerate(self.rho))


def _radial(P):
    if callable(P):
        return P
    return P.radial_density


def p_to_fock(P, hbar, n_max, n_grid=20001):
    """Fock weights of an isotropic P density centered at the origin.

    ``P`` is a PDensitySpec or any callable P(I) normalized so that
    pi * integral P(I) dI = 1. Mass beyond ``n_max`` above 1e-6 raises.
    """
    if not callable(P) and getattr(P, "kind", None) == "delta":
        if P.center != 0:
            raise ValueError("P must be centered at the origin")
        rho = np.zeros(n_max + 1)
        rho[0] = 1.0
        return FockWeights(rho)
    density = _radial(P)
    n = np.arange(n_max + 1)
    # x = I/hbar; the Poisson weight exp(-x) x^n / n! has negligible mass past n_max + 12 sqrt(n_max) + 60
    x_max = n_max + 12.0 * np.sqrt(n_max + 1.0) + 60.0
    x = np.linspace(0.0, x_max, n_grid)
    h = np.pi * hbar * density(hbar * x)
    total = simpson(h, x=x)
    weights = poisson.pmf(n[:, None], x[None, :])
    rho = simpson(weights * h[None, :], x=x, axis=1)
    tail = total - rho.sum()
    if tail > TAIL_TOL:
        raise ValueError(f"mass {tail:.2e} lies beyond n_max={n_max}; raise n_max")
    rho = np.clip(rho, 0.0, None)
    return FockWeights(rho / rho.sum())


@dataclass(frozen=True, eq=False)
class PDensity:
    """P(I) on a grid, plus the point mass at I = 0 (coefficient of delta(I)/pi)."""

    I: np.ndarray
    P: np.ndarray
    origin_mass: float
    poles: np.ndarray
    residues: np.ndarray
    roundtrip_error: float
    hbar: float

    def evaluate(self, I):
        """P at arbitrary actions from the stored pole expansion."""
        return _p_from_poles(np.asarray(I, dtype=float), self.poles, self.residues, self.hbar)


def _p_from_poles(I, poles, residues, hbar):
    out = np.zeros(I.shape, dtype=complex)
    for z, c in zip(poles, residues):
        out += -(c / (np.pi * hbar)) * np.exp(-(z - 1.0) * I / hbar)
    return out.real


def _pole_expansion(rho, m):
    """Pade [m-1/m] of R(z) = sum rho_n z^n as (poles, residues, polynomial part)."""
    p, q = pade(rho[: 2 * m], m, m - 1)
    poles = q.roots
    dq = np.polyder(q)
    residues = p(poles) / dq(poles)
    quotient, _ = np.polydiv(p.coeffs, q.coeffs)
    return poles, residues, np.poly1d(quotient)


def _series_from_poles(poles, residues, poly, n_max):
    n = np.arange(n_max + 1)
    coeffs = np.zeros(n_max + 1, dtype=complex)
    for z, c in zip(poles, residues):
        coeffs += -c * z ** (-(n + 1.0))
    pc = poly.coeffs[::-1]
    coeffs[: len(pc)] += pc
    return coeffs


def fock_to_p(rho, hbar, I_grid, max_poles=24, tol=1e-4):
    """Invert Fock weights to P(I) on ``I_grid``.

    Pade orders 1..max_poles are tried, and the order whose pole expansion
    best reproduces ``rho`` is kept. Raises IllConditionedError when no order
    reproduces the weights within ``tol``, or when a pole sits where the
    inversion blows up (Re z <= 1).
    """
    r = np.asarray(rho.rho if isinstance(rho, FockWeights) else rho, dtype=float)
    n_max = len(r) - 1
    I = np.asarray(I_grid, dtype=float)
    if n_max == 0 or np.all(r[1:] == 0):
        return PDensity(I, np.zeros_like(I), float(r[0]), np.zeros(0), np.zeros(0), 0.0, hbar)
    # trim the numerically zero tail so the Pade system stays well posed
    last = int(np.max(np.flatnonzero(r > 1e-300)))
    r_eff = r[: last + 1]
    best = None
    for m in range(1, min(max_poles, len(r_eff) // 2) + 1):
        # high orders are often ill-conditioned; the round trip below decides
        with np.errstate(all="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore", LinAlgWarning)
            try:
                poles, res, poly = _pole_expansion(r_eff, m)
            except (np.linalg.LinAlgError, ValueError):
                continue
        if not np.all(np.isfinite(poles)) or not np.all(np.isfinite(res)):
            continue
        active = np.abs(res) > 1e-14
        if not np.any(active) or np.any(np.abs(poles[active]) < 1e-12):
            continue
        with np.errstate(all="ignore"):
            series = _series_from_poles(poles[active], res[active], poly, n_max)
        err = float(np.max(np.abs(series - r)))
        if not np.isfinite(err):
            continue
        if best is None or err < best[0]:
            best = (err, poles[active], res[active], poly)
        if err < 1e-12:
            break
    if best is None:
        raise IllConditionedError("no Pade resummation of the Fock series could be formed")
    err, poles, res, poly = best
    if err > tol:
        raise IllConditionedError(f"inversion does not reproduce the Fock weights (error {err:.2e} > {tol})")
    if np.any(poles.real <= 1.0):
        raise IllConditionedError("a pole with Re z <= 1 makes P grow like exp(I/hbar); inversion rejected")
    origin = float(np.real(poly.coeffs[-1])) if len(poly.coeffs) else 0.0
    return PDensity(I, _p_from_poles(I, poles, res, hbar), origin, poles, res, err, hbar)


def thermal_fock_weights(temperature, omega0, hbar, n_max):
    """rho_n proportional to exp(-(hbar omega0 n + hbar^2 n^2)/T), normalized."""
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    n_ext = np.arange(4 * n_max + 200)
    logw = -(hbar * omega0 * n_ext + hbar**2 * n_ext**2) / temperature
    logz = logsumexp(logw)
    w = np.exp(logw - logz)
    tail = float(w[n_max + 1:].sum())
    if tail > SUM_TOL:
        raise ValueError(f"thermal tail beyond n_max={n_max} is {tail:.2e} > {SUM_TOL}")
    rho = w[: n_max + 1]
    return FockWeights(rho / rho.sum())


def geometric_weights(delta, hbar, n_max):
    """Closed-form Fock weights of the exponential density exp(-I/delta)/(pi delta)."""
    n = np.arange(n_max + 1)
    q = delta / (delta + hbar)
    return (hbar / (hbar + delta)) * q**n

