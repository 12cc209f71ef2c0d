"""Pure-Python hot kernels.

Reference implementation of the routines in ``_kernels.pyx``. Signatures and
results are identical; the compiled module is preferred when it is built.
"""
import math

import numpy as np

# Dormand-Prince 5(4) tableau.
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40


def _sech(x):
    if abs(x) > 700.0:
        return 0.0
    return 1.0 / math.cosh(x)


def cmc_rhs(xi, th, al, sign, m, m1, m2, c, H, ts):
    """Right-hand side of the transformed CMC system at one state.

    ``c`` is 2/g and ``ts`` the constant-solution angle. The restoring term
    is written as a product vanishing exactly at ``th == ts`` so the
    constant solution is a fixed set of the discrete flow.
    """
    s = math.sin(2.0 * th)
    ca = math.cos(al)
    sa = math.sin(al)
    d2 = m * s * math.tanh(c * xi) * sa - 2.0 * (m1 + m2) * math.sin(th + ts) * math.sin(th - ts) * ca
    if H != 0.0:
        d2 += c * H * s * _sech(c * xi)
    return sign * s * ca, sign * s * sa, sign * d2


def cmc_rhs_into(y, sign, m, m1, m2, c, H, ts, out):
    d = cmc_rhs(float(y[0]), float(y[1]), float(y[2]), sign, m, m1, m2, c, H, ts)
    out[0], out[1], out[2] = d


def cmc_dopri_step(y, f0, h, sign, m, m1, m2, c, H, ts, rtol, atol, K, y_new):
    """One Dormand-Prince step for the CMC field.

    Fills ``K`` (7 x 3 stage derivatives, row 6 is the FSAL derivative at
    ``y_new``) and ``y_new``; returns the scaled RMS error norm.
    """
    y0, y1, y2 = float(y[0]), float(y[1]), float(y[2])
    k1 = (float(f0[0]), float(f0[1]), float(f0[2]))
    args = (sign, m, m1, m2, c, H, ts)

    k2 = cmc_rhs(y0 + h * A21 * k1[0], y1 + h * A21 * k1[1], y2 + h * A21 * k1[2], *args)
    k3 = cmc_rhs(
        y0 + h * (A31 * k1[0] + A32 * k2[0]),
        y1 + h * (A31 * k1[1] + A32 * k2[1]),
        y2 + h * (A31 * k1[2] + A32 * k2[2]),
        *args,
    )
    k4 = cmc_rhs(
        y0 + h * (A41 * k1[0] + A42 * k2[0] + A43 * k3[0]),
        y1 + h * (A41 * k1[1] + A42 * k2[1] + A43 * k3[1]),
        y2 + h * (A41 * k1[2] + A42 * k2[2] + A43 * k3[2]),
        *args,
    )
    k5 = cmc_rhs(
        y0 + h * (A51 * k1[0] + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
        y1 + h * (A51 * k1[1] + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]),
        y2 + h * (A51 * k1[2] + A52 * k2[2] + A53 * k3[2] + A54 * k4[2]),
        *args,
    )
    k6 = cmc_rhs(
        y0 + h * (A61 * k1[0] + A62 * k2[0] + A63 * k3[0] + A64 * k4[0] + A65 * k5[0]),
        y1 + h * (A61 * k1[1] + A62 * k2[1] + A63 * k3[1] + A64 * k4[1] + A65 * k5[1]),
        y2 + h * (A61 * k1[2] + A62 * k2[2] + A63 * k3[2] + A64 * k4[2] + A65 * k5[2]),
        *args,
    )
    yn = [
        y0 + h * (B1 * k1[0] + B3 * k3[0] + B4 * k4[0] + B5 * k5[0] + B6 * k6[0]),
        y1 + h * (B1 * k1[1] + B3 * k3[1] + B4 * k4[1] + B5 * k5[1] + B6 * k6[1]),
        y2 + h * (B1 * k1[2] + B3 * k3[2] + B4 * k4[2] + B5 * k5[2] + B6 * k6[2]),
    ]
    k7 = cmc_rhs(yn[0], yn[1], yn[2], *args)

    acc = 0.0
    ys = (y0, y1, y2)
    for i in range(3):
        e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        sc = atol + rtol * max(abs(ys[i]), abs(yn[i]))
        acc += (e / sc) ** 2
    K[0, :] = k1
    K[1, :] = k2
    K[2, :] = k3
    K[3, :] = k4
    K[4, :] = k5
    K[5, :] = k6
    K[6, :] = k7
    y_new[0], y_new[1], y_new[2] = yn
    return math.sqrt(acc / 3.0)


def event_value(code, par, y):
    """Built-in event functions watched by :func:`cmc_advance`."""
    if code == 0:
        return y[0]
    if code == 1:
        return math.sin(y[2])
    if code == 2:
        return y[1] - par
    if code == 3:
        return math.cos(y[2])
    return min(y[1] - par, (0.5 * math.pi - par) - y[1])


def cmc_advance(y, f0, s, h, horizon, max_step, min_step, rtol, atol, sign, m, m1, m2, c, H,
                ts, codes, pars, S, Y, KK, HH, cap):
    """Adaptive steps until a watched event changes sign, the horizon or ``cap`` steps.

    Accepted steps go to ``S`` (end times), ``Y`` (end states), ``KK``
    (stages) and ``HH`` (step lengths). Returns ``(n, status, h_next)`` with
    status 0 sign change in the last step, 1 buffer full, 2 horizon reached,
    3 step below ``min_step``.
    """
    yc = np.array(y, dtype=float)
    fc = np.array(f0, dtype=float)
    prev = [event_value(cd, pr, yc) for cd, pr in zip(codes, pars)]
    K = np.empty((7, 3))
    yn = np.empty(3)
    n = 0
    status = 1
    while n < cap:
        h = min(h, max_step)
        last = False
        if horizon - (s + h) < min_step:
            h = horizon - s
            last = True
        if h < min_step:
            status = 3
            break
        err = cmc_dopri_step(yc, fc, h, sign, m, m1, m2, c, H, ts, rtol, atol, K, yn)
        if not err <= 1.0:
            h *= 0.2 if not math.isfinite(err) else max(0.2, 0.9 * err ** (-0.2))
            continue
        s = horizon if last else s + h
        S[n], HH[n] = s, h
        Y[n] = yn
        KK[n] = K
        yc = yn.copy()
        fc = K[6].copy()
        n += 1
        h *= 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** (-0.2)))
        hit = False
        for j, (cd, pr) in enumerate(zip(codes, pars)):
            val = event_value(cd, pr, yc)
            if prev[j] != 0 and (val == 0 or (prev[j] < 0) != (val < 0)):
                hit = True
            prev[j] = val
        if hit:
            status = 0
            break
        if last:
            status = 2
            break
    return n, status, h


def polyline_crossings(x, y, closed):
    """Count pairs of non-adjacent polyline segments that touch or cross."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nseg = len(x) - 1
    if nseg < 3:
        return 0
    ax, ay, bx, by = x[:-1], y[:-1], x[1:], y[1:]
    count = 0
    for i in range(nseg - 2):
        j = np.arange(i + 2, nseg)
        if closed and i == 0:
            j = j[j != nseg - 1]
        if j.size == 0:
            continue
        d1 = _orient(ax[i], ay[i], bx[i], by[i], ax[j], ay[j])
        d2 = _orient(ax[i], ay[i], bx[i], by[i], bx[j], by[j])
        d3 = _orient(ax[j], ay[j], bx[j], by[j], ax[i], ay[i])
        d4 = _orient(ax[j], ay[j], bx[j], by[j], bx[i], by[i])
        proper = (d1 * d2 < 0) & (d3 * d4 < 0)
        touch = (
            ((d1 == 0) & _on_box(ax[i], ay[i], bx[i], by[i], ax[j], ay[j]))
            | ((d2 == 0) & _on_box(ax[i], ay[i], bx[i], by[i], bx[j], by[j]))
            | ((d3 == 0) & _on_box(ax[j], ay[j], bx[j], by[j], ax[i], ay[i]))
            | ((d4 == 0) & _on_box(ax[j], ay[j], bx[j], by[j], bx[i], by[i]))
        )
        count += int(np.count_nonzero(proper | touch))
    return count


def _orient(px, py, qx, qy, rx, ry):
    return (qx - px) * (ry - py) - (qy - py) * (rx - px)


def _on_box(px, py, qx, qy, rx, ry):
    return (
        (np.minimum(px, qx) <= rx)
        & (rx <= np.maximum(px, qx))
        & (np.minimum(py, qy) <= ry)
        & (ry <= np.maximum(py, qy))
    )
