# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.

Same signatures and results as ``_kernels_py``; see that module for the
reference implementation.
"""
from libc.math cimport sin, cos, tanh, cosh, sqrt, fabs, fmax, fmin, pow, M_PI

cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40


cdef inline void _rhs(double xi, double th, double al, double sign, double m, double m1,
                      double m2, double c, double H, double ts, double* out) noexcept nogil:
    cdef double s = sin(2.0 * th)
    cdef double ca = cos(al)
    cdef double sa = sin(al)
    cdef double d2 = m * s * tanh(c * xi) * sa - 2.0 * (m1 + m2) * sin(th + ts) * sin(th - ts) * ca
    if H != 0.0:
        if fabs(c * xi) <= 700.0:
            d2 += c * H * s / cosh(c * xi)
    out[0] = sign * s * ca
    out[1] = sign * s * sa
    out[2] = sign * d2


def cmc_rhs(double xi, double th, double al, double sign, double m, double m1, double m2,
            double c, double H, double ts):
    cdef double out[3]
    _rhs(xi, th, al, sign, m, m1, m2, c, H, ts, out)
    return out[0], out[1], out[2]


def cmc_rhs_into(double[::1] y, double sign, double m, double m1, double m2, double c,
                 double H, double ts, double[::1] out):
    cdef double buf[3]
    _rhs(y[0], y[1], y[2], sign, m, m1, m2, c, H, ts, buf)
    out[0] = buf[0]
    out[1] = buf[1]
    out[2] = buf[2]


cdef double _dopri(double* y, double* f0, double h, double sign, double m, double m1,
                   double m2, double c, double H, double ts, double rtol, double atol,
                   double k[7][3], double* y_new) noexcept nogil:
    cdef double yt[3]
    cdef double e, sc, acc = 0.0
    cdef int i
    for i in range(3):
        k[0][i] = f0[i]
    for i in range(3):
        yt[i] = y[i] + h * A21 * k[0][i]
    _rhs(yt[0], yt[1], yt[2], sign, m, m1, m2, c, H, ts, k[1])
    for i in range(3):
        yt[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i])
    _rhs(yt[0], yt[1], yt[2], sign, m, m1, m2, c, H, ts, k[2])
    for i in range(3):
        yt[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i])
    _rhs(yt[0], yt[1], yt[2], sign, m, m1, m2, c, H, ts, k[3])
    for i in range(3):
        yt[i] = y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i])
    _rhs(yt[0], yt[1], yt[2], sign, m, m1, m2, c, H, ts, k[4])
    for i in range(3):
        yt[i] = y[i] + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i]
                            + A65 * k[4][i])
    _rhs(yt[0], yt[1], yt[2], sign, m, m1, m2, c, H, ts, k[5])
    for i in range(3):
        y_new[i] = y[i] + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i]
                               + B6 * k[5][i])
    _rhs(y_new[0], y_new[1], y_new[2], sign, m, m1, m2, c, H, ts, k[6])
    for i in range(3):
        e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i]
                 + E7 * k[6][i])
        sc = atol + rtol * fmax(fabs(y[i]), fabs(y_new[i]))
        acc += (e / sc) * (e / sc)
    return sqrt(acc / 3.0)


def cmc_dopri_step(double[::1] y, double[::1] f0, double h, double sign, double m,
                   double m1, double m2, double c, double H, double ts, double rtol,
                   double atol, double[:, ::1] K, double[::1] y_new):
    cdef double k[7][3]
    cdef double yy[3]
    cdef double ff[3]
    cdef double yn[3]
    cdef int i, j
    for i in range(3):
        yy[i] = y[i]
        ff[i] = f0[i]
    cdef double err = _dopri(yy, ff, h, sign, m, m1, m2, c, H, ts, rtol, atol, k, yn)
    for i in range(3):
        y_new[i] = yn[i]
    for j in range(7):
        for i in range(3):
            K[j, i] = k[j][i]
    return err


cdef inline double _event(int code, double par, double* y) noexcept nogil:
    if code == 0:
        return y[0]
    if code == 1:
        return sin(y[2])
    if code == 2:
        return y[1] - par
    if code == 3:
        return cos(y[2])
    return fmin(y[1] - par, (0.5 * M_PI - par) - y[1])


def cmc_advance(double[::1] y, double[::1] f0, double s, double h, double horizon,
                double max_step, double min_step, double rtol, double atol, double sign,
                double m, double m1, double m2, double c, double H, double ts,
                int[::1] codes, double[::1] pars, double[::1] S, double[:, ::1] Y,
                double[:, :, ::1] KK, double[::1] HH, Py_ssize_t cap):
    cdef double k[7][3]
    cdef double yc[3]
    cdef double fc[3]
    cdef double yn[3]
    cdef double prev[16]
    cdef double val, err, hu
    cdef Py_ssize_t n = 0
    cdef int i, j, status = 1, nev = codes.shape[0], last, hit
    if nev > 16:
        raise ValueError("at most 16 watched events")
    for i in range(3):
        yc[i] = y[i]
        fc[i] = f0[i]
    for j in range(nev):
        prev[j] = _event(codes[j], pars[j], yc)
    with nogil:
        while n < cap:
            h = fmin(h, max_step)
            last = 0
            if horizon - (s + h) < min_step:
                h = horizon - s
                last = 1
            if h < min_step:
                status = 3
                break
            err = _dopri(yc, fc, h, sign, m, m1, m2, c, H, ts, rtol, atol, k, yn)
            if not (err <= 1.0):
                if err != err or err > 1e308:
                    h *= 0.2
                else:
                    h *= fmax(0.2, 0.9 * pow(err, -0.2))
                continue
            hu = h
            s = horizon if last else s + h
            S[n] = s
            HH[n] = hu
            for i in range(3):
                Y[n, i] = yn[i]
                yc[i] = yn[i]
                fc[i] = k[6][i]
            for j in range(7):
                for i in range(3):
                    KK[n, j, i] = k[j][i]
            n += 1
            if err == 0.0:
                h *= 5.0
            else:
                h *= fmin(5.0, fmax(0.2, 0.9 * pow(err, -0.2)))
            hit = 0
            for j in range(nev):
                val = _event(codes[j], pars[j], yc)
                if prev[j] != 0.0 and (val == 0.0 or (prev[j] < 0.0) != (val < 0.0)):
                    hit = 1
                prev[j] = val
            if hit:
                status = 0
                break
            if last:
                status = 2
                break
    return n, status, h


cdef inline double _orient(double px, double py, double qx, double qy, double rx,
                           double ry) noexcept nogil:
    return (qx - px) * (ry - py) - (qy - py) * (rx - px)


cdef inline bint _on_box(double px, double py, double qx, double qy, double rx,
                         double ry) noexcept nogil:
    return (fmin(px, qx) <= rx and rx <= fmax(px, qx)
            and fmin(py, qy) <= ry and ry <= fmax(py, qy))


def polyline_crossings(x, y, bint closed):
    cdef double[::1] xv = _as_contiguous(x)
    cdef double[::1] yv = _as_contiguous(y)
    cdef Py_ssize_t nseg = xv.shape[0] - 1
    cdef Py_ssize_t i, j
    cdef long count = 0
    cdef double d1, d2, d3, d4
    cdef double ax, ay, bx, by, cx, cy, dx, dy
    if nseg < 3:
        return 0
    with nogil:
        for i in range(nseg - 2):
            ax = xv[i]; ay = yv[i]; bx = xv[i + 1]; by = yv[i + 1]
            for j in range(i + 2, nseg):
                if closed and i == 0 and j == nseg - 1:
                    continue
                cx = xv[j]; cy = yv[j]; dx = xv[j + 1]; dy = yv[j + 1]
                d1 = _orient(ax, ay, bx, by, cx, cy)
                d2 = _orient(ax, ay, bx, by, dx, dy)
                d3 = _orient(cx, cy, dx, dy, ax, ay)
                d4 = _orient(cx, cy, dx, dy, bx, by)
                if d1 * d2 < 0 and d3 * d4 < 0:
                    count += 1
                elif ((d1 == 0 and _on_box(ax, ay, bx, by, cx, cy))
                      or (d2 == 0 and _on_box(ax, ay, bx, by, dx, dy))
                      or (d3 == 0 and _on_box(cx, cy, dx, dy, ax, ay))
                      or (d4 == 0 and _on_box(cx, cy, dx, dy, bx, by))):
                    count += 1
    return count


def _as_contiguous(a):
    import numpy as np
    return np.ascontiguousarray(a, dtype=np.float64)
