"""Pure numpy implementations of the numerical kernels.

Signatures mirror ``_ckernels.pyx`` exactly; ``shadowcast.kernels`` picks one.
All array arguments are float64 and C-contiguous.
"""

import math

import numpy as np


def prefix_posteriors(points, start, goals, log_prior, beta):
    """Goal posterior for every prefix of ``points``, shape (n, n_goals).

    logit_G(k) = log prior_G - beta * (C_k + |Q_k - G| - |S - G|), where C_k is
    the path length of the first k+1 samples.
    """
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    cost_so_far = np.concatenate([[0.0], np.cumsum(seg)])
    to_go = np.linalg.norm(points[:, None, :] - goals[None, :, :], axis=2)
    from_start = np.linalg.norm(start[None, :] - goals, axis=1)
    logits = log_prior[None, :] - beta * (cost_so_far[:, None] + to_go - from_start[None, :])
    logits -= logits.max(axis=1, keepdims=True)
    w = np.exp(logits)
    return w / w.sum(axis=1, keepdims=True)


def polyline_sqdist(points, polyline):
    """Squared distance from each point to the nearest point of a polyline, shape (n,)."""
    # exact zeros for points that coincide with a vertex
    d_vert = np.sum((points[:, None, :] - polyline[None, :, :]) ** 2, axis=2).min(axis=1)
    if polyline.shape[0] < 2:
        return d_vert
    a = polyline[:-1]
    b = polyline[1:]
    ab = b - a
    ab2 = np.einsum("ij,ij->i", ab, ab)
    ap = points[:, None, :] - a[None, :, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.einsum("nmj,mj->nm", ap, ab) / ab2[None, :]
    s = np.where(ab2[None, :] > 0, np.clip(s, 0.0, 1.0), 0.0)
    diff = ap - s[:, :, None] * ab[None, :, :]
    d_seg = np.einsum("nmj,nmj->nm", diff, diff)
    return np.minimum(d_seg.min(axis=1), d_vert)


# radians; see rate_clamp
CLAMP_SLACK = 1e-14
CLAMP_SHRINK = 1e-10


def rate_clamp(vectors, budgets_deg):
    """Geodesic per-step clamp of a sequence of unit vectors.

    Each output vector lies at most ``budgets_deg[i-1]`` degrees from the
    previous output and as close as possible to the input. Returns the output
    vectors and a boolean mask of the samples that were moved.
    """
    n = vectors.shape[0]
    out = np.array(vectors, dtype=float)
    clamped = np.zeros(n, dtype=bool)
    for i in range(1, n):
        p = out[i - 1]
        q = vectors[i]
        c = float(np.dot(p, q))
        s = float(np.linalg.norm(np.cross(p, q)))
        theta = math.atan2(s, c)
        b = math.radians(budgets_deg[i - 1])
        if theta <= b + CLAMP_SLACK:
            continue
        # land just inside the budget so round-off never re-triggers a clamp
        b *= 1.0 - CLAMP_SHRINK
        e = q - c * p
        e /= np.linalg.norm(e)
        v = math.cos(b) * p + math.sin(b) * e
        out[i] = v / np.linalg.norm(v)
        clamped[i] = True
    return out, clamped


def first_order_filter(points, gain):
    """s_0 = d_0, s_k = s_{k-1} + gain * (d_k - s_{k-1})."""
    if gain == 1.0:
        return np.array(points, dtype=float)
    out = np.empty_like(points)
    out[0] = points[0]
    for k in range(1, points.shape[0]):
        out[k] = out[k - 1] + gain * (points[k] - out[k - 1])
    return out


def knot_legibility(knot_times, knots, times, weights, start, goals, log_prior, beta, goal_index):
    """Weighted-trapezoid legibility of the polyline through ``knots`` sampled at ``times``.

    Fuses interpolation, prefix posteriors and the weighted average into one
    call; this is the optimizer's inner loop.
    """
    pts = np.column_stack([np.interp(times, knot_times, knots[:, j]) for j in range(knots.shape[1])])
    p = prefix_posteriors(pts, start, goals, log_prior, beta)[:, goal_index]
    dt = np.diff(times)
    num = np.sum(0.5 * (p[1:] * weights[1:] + p[:-1] * weights[:-1]) * dt)
    den = np.sum(0.5 * (weights[1:] + weights[:-1]) * dt)
    return float(num / den)
