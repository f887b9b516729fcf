"""Convex essentially-non-oscillatory (CENO) interface reconstruction.

Each cell i owns a limited linear candidate L_i and three quadratic
candidates Q^(k) (k = -1, 0, +1) built from the second-order slope/curvature
data of cells i-1, i, i+1.  At a face, if all three quadratic-minus-linear
differences d^(k) share a sign, the quadratic closest to L_i wins (convexity
test); otherwise the safe limited linear value is used.  Quadratics are
expanded about their own cell centers and include the cell-average
deconvolution term -S_hat h^2/24, so smooth quadratic profiles are
reconstructed exactly from averages and third-order accuracy is reached on
smooth monotone data.

Formulas support non-uniform center-to-center gaps; faces sit at the
midpoints between adjacent centers.
"""

import numpy as np


def minmod(*values):
    """Smallest-magnitude argument when all share a sign, else zero."""
    lo = min(values)
    hi = max(values)
    if lo > 0.0:
        return lo
    if hi < 0.0:
        return hi
    return 0.0


def _slope_curvature(u_m, u_0, u_p, d_m, d_p):
    """Quadratic-exact slope and curvature from three point/average values
    with backward/forward center gaps d_m, d_p."""
    denom = d_p * d_m * (d_p + d_m)
    slope = (d_m * d_m * u_p + (d_p * d_p - d_m * d_m) * u_0
             - d_p * d_p * u_m) / denom
    curv = 2.0 * (d_m * u_p - (d_p + d_m) * u_0 + d_p * u_m) / denom
    return slope, curv


def ceno_faces(u, spacing):
    """Reconstruct (u^L at face i+1/2, u^R at face i-1/2) for the center
    cell of a 5-value stencil u_{i-2..i+2}.

    ``spacing`` is either a uniform gap or the 4 center-to-center gaps.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (5,):
        raise ValueError(f"stencil must have 5 values, got shape {u.shape}")
    g = np.asarray(spacing, dtype=float)
    if g.ndim == 0:
        g = np.full(4, float(g))
    if g.shape != (4,) or (g <= 0).any():
        raise ValueError("spacing must be a positive scalar or 4 positive gaps")

    # centers relative to x_i = 0
    xc = np.array([-(g[0] + g[1]), -g[1], 0.0, g[2], g[2] + g[3]])
    # widths of cells i-1, i, i+1 (average of adjacent gaps)
    width = {-1: 0.5 * (g[0] + g[1]), 0: 0.5 * (g[1] + g[2]),
             1: 0.5 * (g[2] + g[3])}
    slope = {}
    curv = {}
    for k in (-1, 0, 1):
        j = 2 + k
        slope[k], curv[k] = _slope_curvature(u[j - 1], u[j], u[j + 1],
                                             xc[j] - xc[j - 1],
                                             xc[j + 1] - xc[j])
    S = minmod((u[3] - u[2]) / g[2], slope[0], (u[2] - u[1]) / g[1])

    def at_face(xf):
        L = u[2] + S * xf
        d = {}
        for k in (-1, 0, 1):
            dx = xf - xc[2 + k]
            Q = (u[2 + k] - curv[k] * width[k] ** 2 / 24.0
                 + slope[k] * dx + 0.5 * curv[k] * dx * dx)
            d[k] = Q - L
        dv = (d[-1], d[0], d[1])
        if (dv[0] > 0 and dv[1] > 0 and dv[2] > 0) or \
           (dv[0] < 0 and dv[1] < 0 and dv[2] < 0):
            best = 0
            for k in (-1, 1):
                if abs(d[k]) < abs(d[best]):
                    best = k
            return L + d[best]
        return L

    return at_face(0.5 * g[2]), at_face(-0.5 * g[1])


def ceno_profile(u, spacing):
    """Face values for a whole 1D array of cell averages.

    Returns (u_plus, u_minus): for each cell j with a full stencil
    (2 <= j <= n-3), u_plus[j] is the reconstruction at the right face of
    cell j and u_minus[j] at its left face; edge entries hold the cell
    average (piecewise-constant fallback).
    """
    u = np.asarray(u, dtype=float)
    n = u.size
    up = u.copy()
    um = u.copy()
    g = np.asarray(spacing, dtype=float)
    if g.ndim == 0:
        gaps = np.full(n - 1, float(g))
    else:
        gaps = g
    for j in range(2, n - 2):
        up[j], um[j] = ceno_faces(u[j - 2:j + 3], gaps[j - 2:j + 2])
    return up, um
