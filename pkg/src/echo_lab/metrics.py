"""Echo observables built from per-packet amplitudes f[k, t]."""

from dataclasses import dataclass

import numpy as np

from .errors import FitError

QUANTUM_CELL = 2.0 * np.pi  # cell area in units of hbar


def _check(p, f):
    p = np.asarray(p, dtype=float)
    f = np.asarray(f, dtype=complex)
    if f.ndim == 1:
        f = f[:, None]
    if p.ndim != 1 or f.shape[0] != p.shape[0]:
        raise ValueError(f"weights of shape {p.shape} do not match amplitudes of shape {f.shape}")
    return p, f


def allegiance(p, f):
    """|sum_k p_k f_k(t)|^2 for each t (f has shape (k, T+1))."""
    p, f = _check(p, f)
    return np.abs(p @ f) ** 2


def averaged_fidelity(p, f):
    """sum_k p_k |f_k(t)|^2."""
    p, f = _check(p, f)
    return p @ (np.abs(f) ** 2)


def decomposition_check(p, f):
    """Residual of averaged = allegiance + weighted spread of the amplitudes; zero up to rounding."""
    p, f = _check(p, f)
    mean = p @ f
    spread = p @ (np.abs(f - mean[None, :]) ** 2)
    return averaged_fidelity(p, f) - allegiance(p, f) - spread


def orthogonality_defect(gram):
    """Largest off-diagonal modulus of the packet Gram matrix."""
    g = np.asarray(gram)
    if g.shape[0] < 2:
        return 0.0
    off = np.abs(g - np.diag(np.diag(g)))
    return float(off.max())


@dataclass(frozen=True)
class MixedFidelity:
    values: np.ndarray
    purity: float
    defect: float
    certified: bool

    @property
    def status(self):
        return "certified" if self.certified else "approximate"


def mixed_state_fidelity(p, cross, gram, defect_tol=1e-3):
    """Mixed-state fidelity from the cross amplitudes g[t, k, k'].

    The purity Tr(rho^2) uses the full Gram quadratic form, so overlapping
    packets are handled; the result is only certified exact when the Gram
    matrix is orthogonal to within ``defect_tol``.
    """
    p = np.asarray(p, dtype=float)
    cross = np.asarray(cross)
    if cross.ndim == 2:
        cross = cross[None]
    pp = np.outer(p, p)
    purity = float(np.sum(pp * np.abs(gram) ** 2))
    values = np.einsum("kl,tkl->t", pp, np.abs(cross) ** 2) / purity
    defect = orthogonality_defect(gram)
    return MixedFidelity(values, purity, defect, defect < defect_tol)


@dataclass(frozen=True)
class EchoObservables:
    times: np.ndarray
    allegiance: np.ndarray
    avg_fidelity: np.ndarray
    mixed_fidelity: np.ndarray = None
    mixed_status: str = "absent"

    @property
    def fluct(self):
        return self.avg_fidelity - self.allegiance


def observables(record):
    """EchoObservables for an EchoRecord."""
    A = allegiance(record.weights, record.amplitudes)
    Fb = averaged_fidelity(record.weights, record.amplitudes)
    mixed, status = None, "absent"
    if record.cross is not None:
        m = mixed_state_fidelity(record.weights, record.cross, record.gram)
        mixed, status = m.values, m.status
    return EchoObservables(np.asarray(record.times), A, Fb, mixed, status)


@dataclass(frozen=True)
class FitResult:
    rate: float
    stderr: float
    r2: float
    t_start: float
    t_end: float
    n_points: int


def fit_exp_rate(series, window=None, times=None, saturation=None, min_points=4):
    """Least-squares slope of -ln(series) against t.

    ``window`` is an inclusive (t1, t2) pair. When ``saturation`` is given
    the fit stops before the first point below 3x that value; pass "auto" to
    estimate the plateau as the median of the last quarter of the series.
    """
    y = np.asarray(series, dtype=float)
    t = np.arange(len(y), dtype=float) if times is None else np.asarray(times, dtype=float)
    if t.shape != y.shape:
        raise FitError("times and series differ in length")
    if saturation == "auto":
        saturation = float(np.median(y[-max(1, len(y) // 4):]))
    mask = np.ones(len(y), dtype=bool)
    if window is not None:
        t1, t2 = window
        mask &= (t >= t1 - 1e-12) & (t <= t2 + 1e-12)
    idx = np.flatnonzero(mask)
    if saturation is not None and len(idx):
        below = np.flatnonzero(y[idx] < 3.0 * saturation)
        if len(below):
            idx = idx[: below[0]]
    if len(idx) < min_points:
        raise FitError(f"fit window holds {len(idx)} points, need at least {min_points}")
    ty, yy = t[idx], y[idx]
    if np.any(yy <= 0) or not np.all(np.isfinite(yy)):
        raise FitError("series must be positive and finite on the fit window")
    z = -np.log(yy)
    A = np.column_stack([ty, np.ones_like(ty)])
    coef, *_ = np.linalg.lstsq(A, z, rcond=None)
    resid = z - A @ coef
    dof = len(ty) - 2
    sxx = np.sum((ty - ty.mean()) ** 2)
    stderr = float(np.sqrt(np.sum(resid**2) / dof / sxx)) if dof > 0 and sxx > 0 else float("nan")
    ss_tot = np.sum((z - z.mean()) ** 2)
    r2 = 1.0 if ss_tot == 0 else float(1.0 - np.sum(resid**2) / ss_tot)
    return FitResult(float(coef[0]), stderr, r2, float(ty[0]), float(ty[-1]), len(ty))


def log_residual_rms(series, times, fit):
    """RMS of ln(series) about the fitted line over the fit's span."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(series, dtype=float)
    m = (t >= fit.t_start) & (t <= fit.t_end)
    z = -np.log(y[m])
    A = np.column_stack([t[m], np.ones(m.sum())])
    coef, *_ = np.linalg.lstsq(A, z, rcond=None)
    return float(np.sqrt(np.mean((z - A @ coef) ** 2)))


@dataclass(frozen=True)
class Saturations:
    sat_avg: float
    sat_alleg: float
    M: int


def saturation_estimates(N, mixture_area, hbar):
    """Plateaus 1/N and 1/(N M), with M the number of cells of area 2*pi*hbar in the mixture."""
    cell = QUANTUM_CELL * hbar
    if mixture_area < cell * (1.0 - 1e-12):
        raise ValueError(f"mixture area {mixture_area:.4g} is smaller than one quantum cell {cell:.4g}")
    M = max(1, int(round(mixture_area / cell)))
    return Saturations(1.0 / N, 1.0 / (N * M), M)


def crossing_time(times, series, level=0.5):
    """First time the series falls below ``level``, by log-linear interpolation.

    Returns None when the series never crosses.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(series, dtype=float)
    below = np.flatnonzero(y < level)
    if len(below) == 0:
        return None
    i = below[0]
    if i == 0:
        return float(t[0])
    y0, y1 = y[i - 1], y[i]
    if y1 <= 0:
        return float(t[i])
    frac = (np.log(y0) - np.log(level)) / (np.log(y0) - np.log(y1))
    return float(t[i - 1] + frac * (t[i] - t[i - 1]))
