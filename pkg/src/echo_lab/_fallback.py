"""Pure numpy versions of the compiled kernels (same signatures, in-place outputs).

Loops run over time and are vectorized over ensemble members, so they are
fine for moderate ensembles but much slower than the compiled path for the
RK4 integrator.
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def _wrap_p(p):
    return p - TWO_PI * np.floor((p + np.pi) / TWO_PI)


def _wrap_theta(t):
    return t - TWO_PI * np.floor(t / TWO_PI)


def _rotate(x, y, angle):
    c = np.cos(angle)
    s = np.sin(angle)
    return x * c + y * s, y * c - x * s


def osc_orbits(x0, y0, omega, kick, modes_m, modes_g, modes_chi, dt,
               n_periods, spp, out_x, out_y, out_phi):
    x = np.array(x0, dtype=float)
    y = np.array(y0, dtype=float)
    om = np.asarray(omega, dtype=float)
    ph = np.zeros_like(x)
    out_x[:, 0] = x
    out_y[:, 0] = y
    out_phi[:, 0] = 0.0
    col = 1
    if len(modes_m) == 0:
        for _ in range(n_periods):
            w = om + 2.0 * (x * x + y * y)
            xk, yk = _rotate(x, y, 0.5 * w)
            yk = yk + kick
            phk = ph + 0.5 * w
            wk = om + 2.0 * (xk * xk + yk * yk)
            for j in range(1, spp + 1):
                tau = j / spp
                if tau <= 0.5:
                    xs, ys = _rotate(x, y, tau * w)
                    phs = ph + tau * w
                else:
                    xs, ys = _rotate(xk, yk, (tau - 0.5) * wk)
                    phs = phk + (tau - 0.5) * wk
                out_x[:, col] = xs
                out_y[:, col] = ys
                out_phi[:, col] = phs
                col += 1
            x, y = _rotate(xk, yk, 0.5 * wk)
            ph = phk + 0.5 * wk
        return

    mm = np.asarray(modes_m, dtype=float)
    gg = np.asarray(modes_g, dtype=float)
    chi = np.asarray(modes_chi, dtype=float)

    def drive(tau):
        return float(np.sum(gg * np.cos(TWO_PI * mm * tau + chi)))

    S = int(1.0 / dt + 0.5)
    half = S // 2
    stride = S // spp
    h = dt
    for _ in range(n_periods):
        for s in range(S):
            tau = s * h
            g0 = drive(tau)
            g1 = drive(tau + 0.5 * h)
            g2 = drive(tau + h)
            I1 = x * x + y * y
            w = om + 2.0 * I1
            k1x = w * y
            k1y = -w * x + g0
            x2 = x + 0.5 * h * k1x
            y2 = y + 0.5 * h * k1y
            I2 = x2 * x2 + y2 * y2
            w = om + 2.0 * I2
            k2x = w * y2
            k2y = -w * x2 + g1
            x3 = x + 0.5 * h * k2x
            y3 = y + 0.5 * h * k2y
            I3 = x3 * x3 + y3 * y3
            w = om + 2.0 * I3
            k3x = w * y3
            k3y = -w * x3 + g1
            x4 = x + h * k3x
            y4 = y + h * k3y
            I4 = x4 * x4 + y4 * y4
            w = om + 2.0 * I4
            k4x = w * y4
            k4y = -w * x4 + g2
            x = x + h * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
            y = y + h * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0
            ph = ph + h * (om + 2.0 * (I1 + 2.0 * I2 + 2.0 * I3 + I4) / 6.0)
            if (s + 1) % stride == 0:
                out_x[:, col] = x
                out_y[:, col] = y
                out_phi[:, col] = ph
                col += 1
            if s + 1 == half:
                y = y + kick


def std_map_stats(theta0, p0, K, gamma, T, drift_first, unwrapped,
                  out_cos, out_sin, out_msd):
    th0 = np.asarray(theta0, dtype=float)
    th = th0.copy()
    p = np.array(p0, dtype=float)
    acc = np.zeros_like(th)
    pu = np.zeros_like(th)
    out_cos[0] += len(th)
    for t in range(1, T + 1):
        if drift_first:
            th = _wrap_theta(th + p)
            acc = acc + p
            dk = K * np.sin(th)
            pu = pu + dk
            p = _wrap_p(p + dk)
        else:
            dk = K * np.sin(th)
            pu = pu + dk
            p = _wrap_p(p + dk)
            th = _wrap_theta(th + p)
            acc = acc + p
        arg = gamma * acc if unwrapped else gamma * (th - th0)
        out_cos[t] += _ordered_sum(np.cos(arg))
        out_sin[t] += _ordered_sum(np.sin(arg))
        out_msd[t] += _ordered_sum(pu * pu)


def _ordered_sum(v):
    # left-to-right summation, matching the compiled loop bit for bit
    return float(np.add.accumulate(v)[-1]) if len(v) else 0.0


def lyapunov_tangent(theta0, p0, K, n_transient, n_iter, renorm, drift_first, out):
    th = np.array(theta0, dtype=float)
    p = np.array(p0, dtype=float)
    for _ in range(n_transient):
        if drift_first:
            th = _wrap_theta(th + p)
            p = _wrap_p(p + K * np.sin(th))
        else:
            p = _wrap_p(p + K * np.sin(th))
            th = _wrap_theta(th + p)
    a = np.ones_like(th)
    b = np.zeros_like(th)
    total = np.zeros_like(th)
    for t in range(1, n_iter + 1):
        if drift_first:
            th = _wrap_theta(th + p)
            c = K * np.cos(th)
            a = a + b
            b = b + c * a
            p = _wrap_p(p + K * np.sin(th))
        else:
            c = K * np.cos(th)
            b = b + c * a
            a = a + b
            p = _wrap_p(p + K * np.sin(th))
            th = _wrap_theta(th + p)
        if t % renorm == 0 or t == n_iter:
            nrm = np.sqrt(a * a + b * b)
            total += np.log(nrm)
            a = a / nrm
            b = b / nrm
    out[:] = total / n_iter
