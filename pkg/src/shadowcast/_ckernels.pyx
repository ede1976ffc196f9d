# cython: language_level=3
"""Compiled numerical kernels; drop-in twin of ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, atan2, cos, sin, fabs, M_PI, INFINITY

cnp.import_array()


def prefix_posteriors(const double[:, ::1] points, const double[::1] start,
                      const double[:, ::1] goals, const double[::1] log_prior, double beta):
    cdef Py_ssize_t n = points.shape[0], g = goals.shape[0], d = points.shape[1]
    cdef Py_ssize_t k, j, c
    cdef double cost = 0.0, acc, diff, mx, total
    out_arr = np.empty((n, g), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] from_start = np.empty(g, dtype=np.float64)

    for j in range(g):
        acc = 0.0
        for c in range(d):
            diff = start[c] - goals[j, c]
            acc += diff * diff
        from_start[j] = sqrt(acc)

    for k in range(n):
        if k > 0:
            acc = 0.0
            for c in range(d):
                diff = points[k, c] - points[k - 1, c]
                acc += diff * diff
            cost += sqrt(acc)
        mx = -INFINITY
        for j in range(g):
            acc = 0.0
            for c in range(d):
                diff = points[k, c] - goals[j, c]
                acc += diff * diff
            out[k, j] = log_prior[j] - beta * (cost + sqrt(acc) - from_start[j])
            if out[k, j] > mx:
                mx = out[k, j]
        total = 0.0
        for j in range(g):
            out[k, j] = exp(out[k, j] - mx)
            total += out[k, j]
        for j in range(g):
            out[k, j] /= total
    return out_arr


def polyline_sqdist(const double[:, ::1] points, const double[:, ::1] polyline):
    cdef Py_ssize_t n = points.shape[0], m = polyline.shape[0], d = points.shape[1]
    cdef Py_ssize_t i, j, c
    cdef double best, ab2, dot, s, acc, diff
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr

    for i in range(n):
        best = INFINITY
        for j in range(m):
            acc = 0.0
            for c in range(d):
                diff = points[i, c] - polyline[j, c]
                acc += diff * diff
            if acc < best:
                best = acc
        for j in range(m - 1):
            ab2 = 0.0
            dot = 0.0
            for c in range(d):
                diff = polyline[j + 1, c] - polyline[j, c]
                ab2 += diff * diff
                dot += (points[i, c] - polyline[j, c]) * diff
            if ab2 <= 0.0:
                continue
            s = dot / ab2
            if s < 0.0:
                s = 0.0
            elif s > 1.0:
                s = 1.0
            acc = 0.0
            for c in range(d):
                diff = points[i, c] - polyline[j, c] - s * (polyline[j + 1, c] - polyline[j, c])
                acc += diff * diff
            if acc < best:
                best = acc
        out[i] = best
    return out_arr


cdef double CLAMP_SLACK = 1e-14
cdef double CLAMP_SHRINK = 1e-10


def rate_clamp(const double[:, ::1] vectors, const double[::1] budgets_deg):
    cdef Py_ssize_t n = vectors.shape[0], i, c
    cdef double pc, cx, cy, cz, s, theta, b, en, vn
    cdef double e[3]
    cdef double v[3]
    out_arr = np.array(vectors, dtype=np.float64)
    clamped_arr = np.zeros(n, dtype=bool)
    cdef double[:, ::1] out = out_arr
    cdef cnp.npy_bool[::1] clamped = clamped_arr

    for i in range(1, n):
        pc = 0.0
        for c in range(3):
            pc += out[i - 1, c] * vectors[i, c]
        cx = out[i - 1, 1] * vectors[i, 2] - out[i - 1, 2] * vectors[i, 1]
        cy = out[i - 1, 2] * vectors[i, 0] - out[i - 1, 0] * vectors[i, 2]
        cz = out[i - 1, 0] * vectors[i, 1] - out[i - 1, 1] * vectors[i, 0]
        s = sqrt(cx * cx + cy * cy + cz * cz)
        theta = atan2(s, pc)
        b = budgets_deg[i - 1] * M_PI / 180.0
        if theta <= b + CLAMP_SLACK:
            continue
        b *= 1.0 - CLAMP_SHRINK
        en = 0.0
        for c in range(3):
            e[c] = vectors[i, c] - pc * out[i - 1, c]
            en += e[c] * e[c]
        en = sqrt(en)
        vn = 0.0
        for c in range(3):
            v[c] = cos(b) * out[i - 1, c] + sin(b) * e[c] / en
            vn += v[c] * v[c]
        vn = sqrt(vn)
        for c in range(3):
            out[i, c] = v[c] / vn
        clamped[i] = True
    return out_arr, clamped_arr


def first_order_filter(const double[:, ::1] points, double gain):
    cdef Py_ssize_t n = points.shape[0], d = points.shape[1], k, c
    if gain == 1.0:
        return np.array(points, dtype=np.float64)
    out_arr = np.empty((n, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for c in range(d):
        out[0, c] = points[0, c]
    for k in range(1, n):
        for c in range(d):
            out[k, c] = out[k - 1, c] + gain * (points[k, c] - out[k - 1, c])
    return out_arr


def knot_legibility(const double[::1] knot_times, const double[:, ::1] knots, const double[::1] times,
                    const double[::1] weights, const double[::1] start, const double[:, ::1] goals,
                    const double[::1] log_prior, double beta, Py_ssize_t goal_index):
    cdef Py_ssize_t m = knot_times.shape[0], n = times.shape[0], g = goals.shape[0], d = knots.shape[1]
    cdef Py_ssize_t i, j, c, seg = 0
    cdef double t, w, acc, diff, mx, total, cost = 0.0, p, p_prev = 0.0, dt, num = 0.0, den = 0.0
    cdef double[::1] from_start = np.empty(g, dtype=np.float64)
    cdef double[::1] logit = np.empty(g, dtype=np.float64)
    cdef double[::1] cur = np.empty(d, dtype=np.float64)
    cdef double[::1] prev = np.empty(d, dtype=np.float64)

    for j in range(g):
        acc = 0.0
        for c in range(d):
            diff = start[c] - goals[j, c]
            acc += diff * diff
        from_start[j] = sqrt(acc)

    for i in range(n):
        # piecewise-linear position at times[i], clamped like np.interp
        t = times[i]
        if t <= knot_times[0]:
            for c in range(d):
                cur[c] = knots[0, c]
        elif t >= knot_times[m - 1]:
            for c in range(d):
                cur[c] = knots[m - 1, c]
        else:
            while seg < m - 2 and knot_times[seg + 1] <= t:
                seg += 1
            while seg > 0 and knot_times[seg] > t:
                seg -= 1
            if t == knot_times[seg]:
                for c in range(d):
                    cur[c] = knots[seg, c]
            else:
                for c in range(d):
                    w = (knots[seg + 1, c] - knots[seg, c]) / (knot_times[seg + 1] - knot_times[seg])
                    cur[c] = w * (t - knot_times[seg]) + knots[seg, c]

        if i > 0:
            acc = 0.0
            for c in range(d):
                diff = cur[c] - prev[c]
                acc += diff * diff
            cost += sqrt(acc)
        mx = -INFINITY
        for j in range(g):
            acc = 0.0
            for c in range(d):
                diff = cur[c] - goals[j, c]
                acc += diff * diff
            logit[j] = log_prior[j] - beta * (cost + sqrt(acc) - from_start[j])
            if logit[j] > mx:
                mx = logit[j]
        total = 0.0
        for j in range(g):
            total += exp(logit[j] - mx)
        p = exp(logit[goal_index] - mx) / total

        if i > 0:
            dt = times[i] - times[i - 1]
            num += 0.5 * (p * weights[i] + p_prev * weights[i - 1]) * dt
            den += 0.5 * (weights[i] + weights[i - 1]) * dt
        p_prev = p
        for c in range(d):
            prev[c] = cur[c]
    return num / den
