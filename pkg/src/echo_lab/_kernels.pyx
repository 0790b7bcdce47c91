# cython: language_level=3
"""Compiled inner loops. Every function here has a numpy twin in
``_fallback.py`` with the same signature and the same arithmetic order."""

from libc.math cimport sin, cos, fmod, floor, log, sqrt, M_PI

cdef double TWO_PI = 2.0 * M_PI


cdef inline double _wrap_p(double p) nogil:
    # reduce into [-pi, pi)
    return p - TWO_PI * floor((p + M_PI) / TWO_PI)


cdef inline double _wrap_theta(double t) nogil:
    return t - TWO_PI * floor(t / TWO_PI)


def osc_orbits(const double[::1] x0, const double[::1] y0, const double[::1] omega,
               double kick, const double[::1] modes_m, const double[::1] modes_g,
               const double[::1] modes_chi, double dt, long n_periods, long spp,
               double[:, ::1] out_x, double[:, ::1] out_y,
               double[:, ::1] out_phi):
    cdef Py_ssize_t n = x0.shape[0]
    cdef Py_ssize_t nm = modes_m.shape[0]
    cdef Py_ssize_t i, j, s, m, col
    cdef long per, S, half, stride
    cdef double x, y, ph, w, om, c, sn, tau, xs, ys, phs
    cdef double xk, yk, phk, wk
    cdef double k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y
    cdef double x2, y2, x3, y3, x4, y4, I1, I2, I3, I4, g0, g1, g2, h

    with nogil:
        if nm == 0:
            # pure kick train: exact free rotation between kicks
            for i in range(n):
                x = x0[i]; y = y0[i]; ph = 0.0; om = omega[i]
                out_x[i, 0] = x; out_y[i, 0] = y; out_phi[i, 0] = 0.0
                col = 1
                for per in range(n_periods):
                    w = om + 2.0 * (x * x + y * y)
                    # post-kick state at mid-period
                    c = cos(0.5 * w); sn = sin(0.5 * w)
                    xk = x * c + y * sn
                    yk = y * c - x * sn + kick
                    phk = ph + 0.5 * w
                    wk = om + 2.0 * (xk * xk + yk * yk)
                    for j in range(1, spp + 1):
                        tau = j / <double>spp
                        if tau <= 0.5:
                            c = cos(tau * w); sn = sin(tau * w)
                            xs = x * c + y * sn
                            ys = y * c - x * sn
                            phs = ph + tau * w
                        else:
                            c = cos((tau - 0.5) * wk); sn = sin((tau - 0.5) * wk)
                            xs = xk * c + yk * sn
                            ys = yk * c - xk * sn
                            phs = phk + (tau - 0.5) * wk
                        out_x[i, col] = xs; out_y[i, col] = ys; out_phi[i, col] = phs
                        col += 1
                    c = cos(0.5 * wk); sn = sin(0.5 * wk)
                    x, y = xk * c + yk * sn, yk * c - xk * sn
                    ph = phk + 0.5 * wk
        else:
            S = <long>(1.0 / dt + 0.5)
            half = S // 2
            stride = S // spp
            h = dt
            for i in range(n):
                x = x0[i]; y = y0[i]; ph = 0.0; om = omega[i]
                out_x[i, 0] = x; out_y[i, 0] = y; out_phi[i, 0] = 0.0
                col = 1
                for per in range(n_periods):
                    for s in range(S):
                        tau = s * h
                        g0 = 0.0; g1 = 0.0; g2 = 0.0
                        for m in range(nm):
                            g0 = g0 + modes_g[m] * cos(TWO_PI * modes_m[m] * tau + modes_chi[m])
                            g1 = g1 + modes_g[m] * cos(TWO_PI * modes_m[m] * (tau + 0.5 * h) + modes_chi[m])
                            g2 = g2 + modes_g[m] * cos(TWO_PI * modes_m[m] * (tau + h) + modes_chi[m])
                        I1 = x * x + y * y
                        w = om + 2.0 * I1
                        k1x = w * y; k1y = -w * x + g0
                        x2 = x + 0.5 * h * k1x; y2 = y + 0.5 * h * k1y
                        I2 = x2 * x2 + y2 * y2
                        w = om + 2.0 * I2
                        k2x = w * y2; k2y = -w * x2 + g1
                        x3 = x + 0.5 * h * k2x; y3 = y + 0.5 * h * k2y
                        I3 = x3 * x3 + y3 * y3
                        w = om + 2.0 * I3
                        k3x = w * y3; k3y = -w * x3 + g1
                        x4 = x + h * k3x; y4 = y + h * k3y
                        I4 = x4 * x4 + y4 * y4
                        w = om + 2.0 * I4
                        k4x = w * y4; k4y = -w * x4 + g2
                        x = x + h * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
                        y = y + h * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0
                        ph = ph + h * (om + 2.0 * (I1 + 2.0 * I2 + 2.0 * I3 + I4) / 6.0)
                        if (s + 1) % stride == 0:
                            out_x[i, col] = x; out_y[i, col] = y; out_phi[i, col] = ph
                            col += 1
                        if s + 1 == half:
                            y = y + kick


def std_map_stats(const double[::1] theta0, const double[::1] p0, double K, double gamma,
                  long T, bint drift_first, bint unwrapped,
                  double[::1] out_cos, double[::1] out_sin, double[::1] out_msd):
    cdef Py_ssize_t n = theta0.shape[0]
    cdef Py_ssize_t i
    cdef long t
    cdef double th, p, acc, pu, arg, dk
    with nogil:
        for i in range(n):
            th = theta0[i]; p = p0[i]; acc = 0.0; pu = 0.0
            out_cos[0] += 1.0
            for t in range(1, T + 1):
                if drift_first:
                    th = _wrap_theta(th + p); acc = acc + p
                    dk = K * sin(th)
                    pu = pu + dk
                    p = _wrap_p(p + dk)
                else:
                    dk = K * sin(th)
                    pu = pu + dk
                    p = _wrap_p(p + dk)
                    th = _wrap_theta(th + p); acc = acc + p
                if unwrapped:
                    arg = gamma * acc
                else:
                    arg = gamma * (th - theta0[i])
                out_cos[t] += cos(arg)
                out_sin[t] += sin(arg)
                out_msd[t] += pu * pu


def lyapunov_tangent(const double[::1] theta0, const double[::1] p0, double K,
                     long n_transient, long n_iter, long renorm,
                     bint drift_first, double[::1] out):
    cdef Py_ssize_t n = theta0.shape[0]
    cdef Py_ssize_t i
    cdef long t
    cdef double th, p, a, b, a2, b2, c, nrm, total
    with nogil:
        for i in range(n):
            th = theta0[i]; p = p0[i]
            for t in range(n_transient):
                if drift_first:
                    th = _wrap_theta(th + p); p = _wrap_p(p + K * sin(th))
                else:
                    p = _wrap_p(p + K * sin(th)); th = _wrap_theta(th + p)
            a = 1.0; b = 0.0; total = 0.0
            for t in range(1, n_iter + 1):
                if drift_first:
                    th = _wrap_theta(th + p)
                    c = K * cos(th)
                    a2 = a + b
                    b2 = b + c * a2
                    p = _wrap_p(p + K * sin(th))
                else:
                    c = K * cos(th)
                    b2 = b + c * a
                    a2 = a + b2
                    p = _wrap_p(p + K * sin(th)); th = _wrap_theta(th + p)
                a = a2; b = b2
                if t % renorm == 0 or t == n_iter:
                    nrm = sqrt(a * a + b * b)
                    total = total + log(nrm)
                    a = a / nrm; b = b / nrm
            out[i] = total / n_iter
