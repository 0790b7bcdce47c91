"""Experiment pipelines behind ``echo-lab run``.

Each pipeline computes its curves, writes them as CSV, and fills a RunReport.
Acceptance flags are named after the numbered acceptance criteria. A flag is
only evaluated when the configuration matches the setup that criterion
describes; otherwise the report says so and no flag is set.
"""

import hashlib
import os
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import ConfigError, ConvergenceWarning, FitError
from .io import write_csv, write_rows
from .kicked_rotor import (KickedRotorParams, dense_oracle_step, echo_amplitudes, kr_step)
from .metrics import (allegiance, averaged_fidelity, crossing_time, decomposition_check,
                      fit_exp_rate, log_residual_rms, observables, saturation_estimates)
from .rng import stream
from .standard_map import ensemble_stats, lyapunov, make_ensemble
from .torus import (Basis, MixtureSpec, Region, WaveFunction, default_width, make_grid,
                    packet_amplitudes)
from . import kernels

REFERENCE = dict(K=10.0, sigma=1.1)
LYAPUNOV_TARGET = 1.61


@dataclass
class RunReport:
    experiment: str
    values: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    files: list = field(default_factory=list)

    @property
    def passed(self):
        return all(self.flags.values())

    def to_text(self):
        lines = [f"experiment = {self.experiment}", f"version = {__version__}",
                 f"backend = {kernels.BACKEND}"]
        for k, v in self.values.items():
            lines.append(f"{k} = {_fmt(v)}")
        for k, v in self.flags.items():
            lines.append(f"flag.{k} = {'PASS' if v else 'FAIL'}")
        for k, v in self.timings.items():
            lines.append(f"time.{k}_s = {v:.3f}")
        for n in self.notes:
            lines.append(f"note = {n}")
        lines.append(f"all_flags_pass = {str(self.passed).lower()}")
        return "\n".join(lines) + "\n"


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.10g" % v
    if v is None:
        return "none"
    return str(v)


class _Timer:
    def __init__(self, report, name):
        self.report, self.name = report, name

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.report.timings[self.name] = time.perf_counter() - self.t0


def _threads(cfg):
    return cfg["threads"] or None


def _fit_or_none(report, key, *args, **kwargs):
    try:
        fit = fit_exp_rate(*args, **kwargs)
    except FitError as exc:
        report.notes.append(f"{key}: fit failed ({exc})")
        return None
    report.values[f"{key}.rate"] = fit.rate
    report.values[f"{key}.stderr"] = fit.stderr
    report.values[f"{key}.r2"] = fit.r2
    report.values[f"{key}.window"] = f"{fit.t_start:g}:{fit.t_end:g}"
    return fit


# ---------------------------------------------------------------- kicked rotor

def build_mixture(cfg, grid):
    region = Region(cfg["region_theta"], cfg["region_p"])
    width = cfg["packet_width"] or default_width(grid)
    if cfg["layout"] == "random":
        return MixtureSpec.uniform_random(region, cfg["n_packets"], cfg["seed"], width)
    if cfg["layout"] == "grid":
        nt, npp = cfg["grid_shape"]
        return MixtureSpec.regular_grid(region, nt, npp, width)
    raise ValueError(f"layout must be 'random' or 'grid', got {cfg['layout']!r}")


def _kr_params(cfg, grid, sigma=None):
    s = cfg["sigma"] if sigma is None else sigma
    return KickedRotorParams(cfg["K"], s * grid.hbar_eff, grid, cfg["kick_order"], cfg["split"])


def _is_reference_setup(cfg):
    region = Region(cfg["region_theta"], cfg["region_p"])
    n = cfg["n_packets"] if cfg["layout"] == "random" else int(np.prod(cfg["grid_shape"]))
    return (cfg["K"] == REFERENCE["K"] and cfg["sigma"] == REFERENCE["sigma"] and n >= 100
            and region.theta == (0.2, 0.3) and region.p == (0.3, 0.4))


def kr_run(cfg, N, T, threads=None):
    """Echo observables and fits for one grid size."""
    grid = make_grid(N)
    mix = build_mixture(cfg, grid)
    params = _kr_params(cfg, grid)
    record = echo_amplitudes(mix, params, T, want_cross=cfg.values.get("want_cross", False),
                             threads=threads)
    obs = observables(record)
    sat = saturation_estimates(N, mix.region.area, grid.hbar_eff)
    return grid, mix, record, obs, sat


def oracle_difference(seed=0, sizes=(8, 16, 32), steps=10):
    """Largest state difference between split-operator and dense propagation."""
    rng = stream(seed, "oracle")
    worst = 0.0
    for N in sizes:
        grid = make_grid(N)
        K = float(rng.uniform(0.5, 12.0))
        eps = float(rng.uniform(0.0, 0.3))
        params = KickedRotorParams(K, eps, grid)
        z = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        psi = WaveFunction(grid, z / np.linalg.norm(z), Basis.POSITION)
        for perturbed in (False, True):
            a = b = psi
            for _ in range(steps):
                a = kr_step(a, params, perturbed)
                b = dense_oracle_step(b, params, perturbed)
                worst = max(worst, float(np.max(np.abs(a.amplitudes - b.amplitudes))))
    return worst


def identity_residuals(seed=0, n_sets=1000):
    """(eps=0 echo deviation, worst Jensen violation, worst decomposition residual)."""
    grid = make_grid(256)
    region = Region((0.2, 0.3), (0.3, 0.4))
    mix = MixtureSpec.uniform_random(region, 10, seed, default_width(grid))
    rec = echo_amplitudes(mix, KickedRotorParams(10.0, 0.0, grid), 10)
    echo_dev = float(np.max(np.abs(rec.amplitudes - 1.0)))
    rng = stream(seed, "identities")
    jensen = 0.0
    decomp = 0.0
    for _ in range(n_sets):
        k = int(rng.integers(1, 20))
        p = rng.uniform(0.01, 1.0, k)
        p /= p.sum()
        r = np.sqrt(rng.uniform(0, 1, (k, 5)))
        f = r * np.exp(2j * np.pi * rng.uniform(0, 1, (k, 5)))
        jensen = max(jensen, float(np.max(allegiance(p, f) - averaged_fidelity(p, f))))
        decomp = max(decomp, float(np.max(np.abs(decomposition_check(p, f)))))
    return echo_dev, jensen, decomp


def _plateau(series, start):
    return float(np.mean(series[start:]))


def run_kr_echo(cfg, out, report):
    th = _threads(cfg)
    N, T = cfg["N"], cfg["T"]
    with _Timer(report, "echo"):
        grid, mix, record, obs, sat = kr_run(cfg, N, T, th)
    t = obs.times
    mixed = obs.mixed_fidelity if obs.mixed_fidelity is not None else np.full(len(t), np.nan)
    write_csv(os.path.join(out, "curves.csv"), ["t", "allegiance", "avg_fidelity", "mixed_fidelity", "fluct"],
              [t, obs.allegiance, obs.avg_fidelity, mixed, obs.fluct])
    write_rows(os.path.join(out, "amplitudes.csv"), ["t", "k", "re_f", "im_f"], record.rows())
    report.files += ["curves.csv", "amplitudes.csv"]

    v = report.values
    v.update({"N": N, "hbar": grid.hbar_eff, "sigma": cfg["sigma"], "eps": cfg["sigma"] * grid.hbar_eff,
              "n_packets": mix.size, "layout": mix.layout, "M": sat.M,
              "sat_avg": sat.sat_avg, "sat_alleg": sat.sat_alleg})
    if obs.mixed_fidelity is not None:
        v["mixed_fidelity.status"] = obs.mixed_status
    decomp = float(np.max(np.abs(decomposition_check(record.weights, record.amplitudes))))
    v["decomposition_residual"] = decomp

    fa = _fit_or_none(report, "allegiance", obs.allegiance, cfg["fit_window"], t, saturation=sat.sat_alleg)
    td = crossing_time(t, obs.avg_fidelity, 0.5)
    v["t_d"] = td
    fb = None
    if td is not None and fa is not None:
        fb = _fit_or_none(report, "avg_fidelity", obs.avg_fidelity, (float(np.ceil(td)), float(T)), t,
                          saturation=sat.sat_avg)
        tau_c = 1.0 / fa.rate
        v["t_d_predicted"] = tau_c * np.log(mix.region.area / grid.hbar_eff)
        v["t_d_ratio"] = td / v["t_d_predicted"]

    start = cfg["plateau_from"]
    plateau_ok = T >= start + 10
    if plateau_ok:
        v["plateau_avg"] = _plateau(obs.avg_fidelity, start)
        v["plateau_alleg"] = _plateau(obs.allegiance, start)
        v["plateau_avg_ratio"] = v["plateau_avg"] / sat.sat_avg
        v["plateau_alleg_ratio"] = v["plateau_alleg"] / sat.sat_alleg
    else:
        report.notes.append(f"plateaus not measured: T must be at least plateau_from + 10 = {start + 10}")

    ref = _is_reference_setup(cfg)
    if not ref:
        report.notes.append("criteria 1, 3, 4, 5 not evaluated: parameters differ from the reference setup (K=10, sigma=1.1, at least 100 packets in the standard region)")
    else:
        report.flags["c1_allegiance_rate"] = fa is not None and abs(fa.rate / 1.1 - 1) <= 0.15
        delay = (td is not None and td > 0 and fb is not None and fa is not None
                 and abs(fb.rate / fa.rate - 1) <= 0.25 and 0.5 <= v["t_d_ratio"] <= 2.0)
        if plateau_ok:
            report.flags["c5_saturation"] = (0.5 <= v["plateau_avg_ratio"] <= 2
                                             and 0.5 <= v["plateau_alleg_ratio"] <= 2)
        if cfg["compare_N"]:
            rates, delays = {N: fa.rate if fa else np.nan}, {N: td}
            for Nc in cfg["compare_N"]:
                with _Timer(report, f"echo_N{Nc}"):
                    _, _, _, o2, s2 = kr_run(cfg, Nc, T, th)
                f2 = _fit_or_none(report, f"allegiance_N{Nc}", o2.allegiance, cfg["fit_window"], o2.times,
                                  saturation=s2.sat_alleg)
                rates[Nc] = f2.rate if f2 else np.nan
                delays[Nc] = crossing_time(o2.times, o2.avg_fidelity, 0.5)
                v[f"t_d_N{Nc}"] = delays[Nc]
            report.flags["c3_hbar_robustness"] = bool(all(abs(r / rates[N] - 1) < 0.2
                                                          for r in rates.values()))
            ordered = [delays[n] for n in sorted(delays)]
            mono = all(d is not None for d in ordered) and all(
                b > a for a, b in zip(ordered, ordered[1:]))
            v["t_d_monotonic"] = mono
            delay = delay and mono
        report.flags["c4_delay"] = bool(delay)

    if cfg["self_checks"]:
        with _Timer(report, "self_checks"):
            v["oracle_difference"] = oracle_difference(cfg["seed"])
            echo_dev, jensen, dres = identity_residuals(cfg["seed"])
        v["eps0_echo_deviation"] = echo_dev
        v["jensen_worst"] = jensen
        v["decomposition_random_worst"] = dres
        report.flags["c6_oracle"] = v["oracle_difference"] < 1e-9
        report.flags["c11_identities"] = (echo_dev < 1e-12 and jensen <= 1e-12 and dres < 1e-12
                                          and decomp < 1e-12)
    return ["allegiance", "avg_fidelity", "mixed_fidelity"]


def run_kr_classical(cfg, out, report):
    th = _threads(cfg)
    region = Region(cfg["region_theta"], cfg["region_p"])
    if cfg["angle"] not in ("unwrapped", "reduced"):
        raise ValueError("angle must be 'unwrapped' or 'reduced'")
    T = cfg["T"]
    with _Timer(report, "ensemble"):
        ens = make_ensemble(region, cfg["n_points"], cfg["seed"])
        st = ensemble_stats(ens, cfg["K"], cfg["gamma"], T, cfg["kick_order"],
                            cfg["angle"] == "unwrapped", th)
    write_csv(os.path.join(out, "curves.csv"), ["t", "C"], [st.times, st.correlation])
    write_csv(os.path.join(out, "msd.csv"), ["t", "msd_p"], [st.times, st.msd_p])
    report.files += ["curves.csv", "msd.csv"]
    v = report.values
    v.update({"K": cfg["K"], "gamma": cfg["gamma"], "n_points": cfg["n_points"]})
    fc = _fit_or_none(report, "correlation", st.correlation, cfg["fit_window"], st.times)
    if T >= 10:
        m = st.times >= 5
        v["msd_slope"] = float(np.polyfit(st.times[m], st.msd_p[m], 1)[0])

    if cfg["lyapunov"]:
        with _Timer(report, "lyapunov"):
            lam = lyapunov(cfg["K"], n_iter=cfg["lyapunov_iter"], seed=cfg["seed"])
        v["lyapunov"] = lam.value
        v["lyapunov_spread"] = lam.spread
        if cfg["K"] == 10.0:
            report.flags["c7_lyapunov"] = abs(lam.value - LYAPUNOV_TARGET) <= 0.03

    if cfg["compare_quantum"]:
        with _Timer(report, "quantum"):
            grid, mix, record, obs, sat = kr_run(cfg, cfg["N"], T, th)
        write_csv(os.path.join(out, "quantum.csv"), ["t", "allegiance", "avg_fidelity", "mixed_fidelity", "fluct"],
                  [obs.times, obs.allegiance, obs.avg_fidelity, np.full(len(obs.times), np.nan), obs.fluct])
        report.files.append("quantum.csv")
        fa = _fit_or_none(report, "allegiance", obs.allegiance, cfg["fit_window"], obs.times,
                          saturation=sat.sat_alleg)
        both = (obs.allegiance > 10 * sat.sat_alleg) & (st.correlation > 10 * sat.sat_alleg)
        gap = float(np.max(np.abs(obs.allegiance - st.correlation)[both]))
        v["pointwise_gap"] = gap
        if fa is not None and fc is not None:
            v["rate_ratio"] = fc.rate / fa.rate
        if _is_reference_setup(cfg) and cfg["gamma"] == 2.0 and cfg["n_points"] >= 1_000_000:
            report.flags["c2_correspondence"] = (fa is not None and fc is not None
                                                 and abs(v["rate_ratio"] - 1) <= 0.2 and gap <= 0.15)
        else:
            report.notes.append("criterion 2 not evaluated: parameters differ from its setup")
    return ["C"]


# ---------------------------------------------------------------- oscillator

def parse_modes(text):
    """'m:g:chi, ...' into ((m, g, chi), ...)."""
    modes = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 3:
            raise ValueError(f"mode {item!r} must look like m:g:chi")
        modes.append((int(parts[0]), float(parts[1]), float(parts[2])))
    return tuple(modes)


def osc_params(cfg):
    from .oscillator import DriveSpec, OscillatorParams
    drive = DriveSpec(modes=parse_modes(cfg["modes"]), kick=cfg["kick"])
    return OscillatorParams(cfg["omega0"], cfg["hbar"], drive, cfg["dt"])


def osc_density(cfg):
    from .oscillator import PDensitySpec
    return PDensitySpec(cfg["density"], cfg["width_over_hbar"] * cfg["hbar"],
                        complex(cfg["center_re"], cfg["center_im"]), cfg["n_samples"], cfg["seed"])


def _require_chaos(ens, params, report):
    from .oscillator import chaos_check
    check = chaos_check(ens, params)
    report.values["chaos_check"] = "pass" if check.ok else "fail"
    if not check.ok:
        raise ConfigError(f"drive configuration rejected: {check.message}")


def _is_default_drive(cfg):
    return cfg["kick"] == 1.0 and not parse_modes(cfg["modes"]) and cfg["omega0"] == 1.0


def run_osc_classical(cfg, out, report):
    from .oscillator import action_cumulant, correlator_fit, phase_correlation, simulate_density
    from .oscillator.correlators import linear_fit_r2
    params, P = osc_params(cfg), osc_density(cfg)
    with _Timer(report, "ensemble"):
        ens = simulate_density(P, params, cfg["T"], threads=_threads(cfg))
    _require_chaos(ens, params, report)
    t = ens.times
    z = phase_correlation(P, params, 1.0, cfg["T"], ens)
    write_csv(os.path.join(out, "curves.csv"), ["t", "re", "im"], [t, z.real, z.imag])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        ac = action_cumulant(P, params, cfg["T"], ens)
    report.notes += [str(w.message) for w in caught]
    write_csv(os.path.join(out, "action.csv"), ["t", "mean_I", "chi2"], [t, ens.I.mean(axis=0), ac.chi2])
    report.files += ["curves.csv", "action.csv"]
    v = report.values
    C = np.abs(z) ** 2
    try:
        fit = correlator_fit(t, C)
        v.update({"tau_c": 1.0 / fit.rate, "phase_rate": fit.rate, "phase_rate.stderr": fit.stderr,
                  "phase_log_rms": log_residual_rms(C, t, fit)})
    except FitError as exc:
        report.notes.append(f"phase correlation fit failed ({exc})")
    slope, _, r2 = linear_fit_r2(t, ens.I.mean(axis=0))
    v.update({"D": slope, "D_r2": r2, "K_int": ac.K_int, "tau_I": ac.tau_I,
              "kernel_decaying": ac.decaying})
    if _is_default_drive(cfg):
        report.flags["c10_action_diffusion"] = r2 > 0.99
    return ["re"]


def run_osc_allegiance(cfg, out, report):
    from .oscillator import (action_cumulant, allegiance_classical, correlator_fit, fgr_prediction,
                             phase_correlation, simulate_density)
    params, P = osc_params(cfg), osc_density(cfg)
    T = cfg["T"]
    with _Timer(report, "ensemble"):
        ens = simulate_density(P, params, T, threads=_threads(cfg))
    _require_chaos(ens, params, report)
    t = ens.times
    v = report.values
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ac = action_cumulant(P, params, T, ens)
    sigmas = list(cfg["sigmas_fgr"]) + list(cfg["sigmas_strong"])
    curves = {s: allegiance_classical(P, params, s, T, ens) for s in sigmas}
    cols, names = [t], ["t"]
    for s in sigmas:
        names.append(f"allegiance_sigma_{s:g}")
        cols.append(curves[s])
    names.append("chi2")
    cols.append(ac.chi2)
    write_csv(os.path.join(out, "curves.csv"), names, cols)
    report.files.append("curves.csv")

    fgr = cfg["sigmas_fgr"]
    if len(fgr) == 2:
        lo, hi = sorted(fgr)
        below = np.flatnonzero(curves[hi] < 0.1)
        t_end = float(t[below[0] - 1]) if len(below) else float(t[-1])
        window = (0.0, t_end)
        f_lo = _fit_or_none(report, f"fgr_sigma_{lo:g}", curves[lo], window, t)
        f_hi = _fit_or_none(report, f"fgr_sigma_{hi:g}", curves[hi], window, t)
        m = t <= t_end
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            dev = max(float(np.max(np.abs(curves[s][m] / fgr_prediction(ac.chi2[m], s) - 1))) for s in fgr)
        v["fgr_prediction_max_rel_dev"] = dev
        if f_lo and f_hi:
            v["fgr_rate_ratio"] = f_hi.rate / f_lo.rate
            expected = (hi / lo) ** 2
            v["fgr_expected_ratio"] = expected
            if _is_default_drive(cfg) and (lo, hi) == (0.05, 0.1):
                report.flags["c8_fgr_scaling"] = abs(v["fgr_rate_ratio"] / expected - 1) <= 0.2 and dev <= 0.1

    z = phase_correlation(P, params, 1.0, T, ens)
    strong = {}
    for s in cfg["sigmas_strong"]:
        try:
            strong[s] = correlator_fit(t, curves[s]).rate
            v[f"strong_sigma_{s:g}.rate"] = strong[s]
        except FitError as exc:
            report.notes.append(f"sigma={s:g} fit failed ({exc})")
    try:
        c1 = correlator_fit(t, np.abs(z) ** 2).rate
        v["phase_rate"] = c1
    except FitError:
        c1 = None
    if (_is_default_drive(cfg) and sorted(cfg["sigmas_strong"]) == [1.0, 2.0]
            and len(strong) == 2 and c1):
        r1, r2 = strong[1.0], strong[2.0]
        report.flags["c9_sigma_independence"] = (abs(r2 / r1 - 1) <= 0.2 and abs(r1 / c1 - 1) <= 0.2
                                                 and abs(r2 / c1 - 1) <= 0.2)
    return names[1:-1]


def run_osc_semiclassical(cfg, out, report):
    from .oscillator import early_time_fidelity, semiclassical_amplitude
    from .oscillator import DriveSpec, OscillatorParams
    drive = DriveSpec(modes=parse_modes(cfg["modes"]), kick=cfg["kick"])
    params = OscillatorParams(cfg["omega0"], cfg["hbar"], drive, cfg["dt"])
    alpha0 = complex(cfg["center_re"], cfg["center_im"])
    eps = cfg["sigma"] * cfg["hbar"]
    spp = cfg["samples_per_period"]
    with _Timer(report, "monte_carlo"):
        mc = semiclassical_amplitude(alpha0, params, cfg["sigma"], cfg["T"], n_mc=cfg["n_mc"],
                                     seed=cfg["seed"], samples_per_period=spp, threads=_threads(cfg))
    et = early_time_fidelity(alpha0, params, eps, cfg["hbar"], cfg["T"], samples_per_period=spp)
    t = mc.times
    write_csv(os.path.join(out, "curves.csv"), ["t", "re", "im"], [t, mc.f.real, mc.f.imag])
    write_csv(os.path.join(out, "early_time.csv"), ["t", "F_early", "F_mc", "mc_stderr"],
              [t, et.F, mc.fidelity, mc.stderr])
    report.files += ["curves.csv", "early_time.csv"]
    v = report.values
    m = et.F > 0.5
    dev = float(np.max(np.abs(mc.fidelity[m] / et.F[m] - 1))) if m.any() else float("nan")
    v.update({"eps": eps, "max_rel_dev_F_gt_half": dev, "rate_alpha": et.rate_alpha,
              "rate_omega": et.rate_omega, "validity_time": et.validity_time,
              "fd_disagreement": et.fd_disagreement, "mc_undersampled": mc.undersampled,
              "mc_max_stderr": float(np.max(mc.stderr))})
    if not et.fd_consistent:
        report.notes.append("finite-difference derivatives change by more than 1% under step halving")
    report.flags["c12_early_time"] = bool(m.any() and dev <= 0.1 and et.rate_alpha > 0)
    return []


def run_glauber(cfg, out, report):
    from .oscillator import PDensitySpec, fock_to_p, geometric_weights, p_to_fock, thermal_fock_weights
    hbar = cfg["hbar"]
    delta = cfg["width_over_hbar"] * hbar
    n_max = cfg["n_max"]
    P = PDensitySpec("exponential", delta, 0.0)
    with _Timer(report, "forward"):
        fw = p_to_fock(P, hbar, n_max)
    exact = geometric_weights(delta, hbar, n_max)
    exact = exact / exact.sum()
    forward_err = float(np.max(np.abs(fw.rho - exact)))
    I = np.linspace(0.0, 10 * delta, 201)
    inv = fock_to_p(exact, hbar, I)
    p_exact = P.radial_density(I)
    inverse_err = float(np.max(np.abs(inv.P - p_exact)) / np.max(p_exact))
    write_rows(os.path.join(out, "curves.csv"), ["n", "rho_n"], fw.rows())
    write_csv(os.path.join(out, "p_density.csv"), ["I", "P", "P_exact"], [I, inv.P, p_exact])
    report.files += ["curves.csv", "p_density.csv"]
    v = report.values
    v.update({"delta": delta, "forward_max_abs_err": forward_err, "inverse_max_rel_err": inverse_err,
              "inverse_roundtrip_err": inv.roundtrip_error, "n_poles": int(np.sum(np.abs(inv.residues) > 1e-14))})
    th = thermal_fock_weights(cfg["temperature"], cfg["omega0"], cfg["thermal_hbar"], cfg["thermal_n_max"])
    try:
        tinv = fock_to_p(th, cfg["thermal_hbar"], I)
        v["thermal_roundtrip_err"] = tinv.roundtrip_error
    except Exception as exc:  # ill-conditioning is reported, not hidden
        report.notes.append(f"thermal inversion rejected: {exc}")
    report.flags["c11_glauber_roundtrip"] = forward_err <= 1e-4 and inverse_err <= 1e-4
    return []


PIPELINES = {
    "kr_echo": run_kr_echo,
    "kr_classical": run_kr_classical,
    "osc_classical": run_osc_classical,
    "osc_allegiance": run_osc_allegiance,
    "osc_semiclassical": run_osc_semiclassical,
    "glauber_roundtrip": run_glauber,
}


def sha256(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def run_experiment(config, plot=None):
    """Run one configured experiment; returns a RunReport and writes its outputs."""
    from .parallel import thread_count
    out = config["output_dir"]
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "manifest.txt"), "w", encoding="utf-8") as fh:
        fh.write(f"# echo_lab {__version__}, backend {kernels.BACKEND}\n")
        fh.write(config.to_text())
    report = RunReport(config.experiment)
    report.values["threads"] = thread_count(config["threads"] or None)
    t0 = time.perf_counter()
    plot_cols = PIPELINES[config.experiment](config, out, report)
    report.timings["total"] = time.perf_counter() - t0
    curves = os.path.join(out, "curves.csv")
    report.values["curves_sha256"] = sha256(curves)
    do_plot = config["plot"] if plot is None else plot
    if do_plot and plot_cols:
        from .plotting import plot_csv
        plot_csv(curves, os.path.join(out, "plot.svg"), columns=plot_cols)
        if sha256(curves) != report.values["curves_sha256"]:
            raise RuntimeError("plotting modified curves.csv")
        report.files.append("plot.svg")
    with open(os.path.join(out, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(report.to_text())
    return report
