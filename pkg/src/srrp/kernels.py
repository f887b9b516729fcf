"""Fused finite-volume sweep kernels (numba, parallel, cache-persistent).

A sweep updates the RHS contribution of one coordinate axis for every 1D
pencil of the interior grid, always working in normal-first order: the
normal momentum is swapped into component slot 1 (and the normal velocity
into slot 0 of the velocity triple) during the gather, which is an exact
symmetry of the equations.  Per pencil:

    pad -> CENO faces -> primitive recovery (piecewise-constant fallback)
        -> Marquina or HLLE flux (HLLE fallback on ill-conditioned
           decompositions) -> flux difference

Pencils are padded with three rule-filled cells per side (outflow: edge
replication; periodic: wrap), so every face of the pencil -- boundary
faces included -- is reconstructed from a full five-cell stencil, and the
two copies of a periodic wrap face are computed from bitwise-identical
stencils (exact discrete conservation).

Thread-count determinism: the parallel loop writes disjoint slices only
(per-pencil RHS cells and counter rows); cross-pencil reductions happen
serially in the caller in a fixed order.  No fastmath anywhere.

The scalar helpers mirror, operation for operation, the reference
implementations in `state`, `reconstruction` and `flux`; the tests check
the sweep pipeline against those modules.
"""

import numpy as np
from numba import njit, prange

FLOOR = 1e-14
NEWTON_TOL = 1e-13
NEWTON_MAXIT = 50
GAP_TINY = 1e-14

BC_OUTFLOW = 0
BC_PERIODIC = 1
FLUX_MARQUINA = 0
FLUX_HLLE = 1

#: columns of the per-pencil counter rows
C_PC, C_HLLE, C_FLOOR, C_ERR = 0, 1, 2, 3


# ----------------------------------------------------------------------
# CENO reconstruction (uniform spacing)

@njit(cache=True)
def _slope_curv(u_m, u_0, u_p, d_m, d_p):
    denom = d_p * d_m * (d_p + d_m)
    slope = (d_m * d_m * u_p + (d_p * d_p - d_m * d_m) * u_0
             - d_p * d_p * u_m) / denom
    curv = 2.0 * (d_m * u_p - (d_p + d_m) * u_0 + d_p * u_m) / denom
    return slope, curv


@njit(cache=True)
def _minmod3(a, b, c):
    lo = min(a, b, c)
    hi = max(a, b, c)
    if lo > 0.0:
        return lo
    if hi < 0.0:
        return hi
    return 0.0


@njit(cache=True)
def _ceno_eval(xf, um1, u0, up1, s_m, c_m, s_0, c_0, s_p, c_p, S, h):
    """Selected face value at offset xf from the cell center."""
    L = u0 + S * xf
    w2 = h * h
    dxm = xf + h
    Qm = um1 - c_m * w2 / 24.0 + s_m * dxm + 0.5 * c_m * dxm * dxm
    Q0 = u0 - c_0 * w2 / 24.0 + s_0 * xf + 0.5 * c_0 * xf * xf
    dxp = xf - h
    Qp = up1 - c_p * w2 / 24.0 + s_p * dxp + 0.5 * c_p * dxp * dxp
    dm = Qm - L
    d0 = Q0 - L
    dp = Qp - L
    if (dm > 0.0 and d0 > 0.0 and dp > 0.0) or \
       (dm < 0.0 and d0 < 0.0 and dp < 0.0):
        best = d0
        if abs(dm) < abs(best):
            best = dm
        if abs(dp) < abs(best):
            best = dp
        return L + best
    return L


# ----------------------------------------------------------------------
# Primitive recovery (scalar mirrors of state.recover_primitive)

@njit(cache=True)
def _rec_I(E, mx, my, mz, cs2):
    """(ok, floored, rho, vx, vy, vz, p) from a 4-component conserved state."""
    if not (np.isfinite(E) and E > 0.0):
        return False, False, 0.0, 0.0, 0.0, 0.0, 0.0
    m2 = mx * mx + my * my + mz * mz
    disc = (1.0 - cs2) ** 2 * E * E + 4.0 * cs2 * (E * E - m2)
    if disc < 0.0 or m2 >= E * E:
        return False, False, 0.0, 0.0, 0.0, 0.0, 0.0
    p = 0.5 * (-(1.0 - cs2) * E + np.sqrt(disc))
    floored = False
    if p < FLOOR:
        p = FLOOR
        floored = True
    den = E + p
    vx = mx / den
    vy = my / den
    vz = mz / den
    if vx * vx + vy * vy + vz * vz >= 1.0:
        return False, False, 0.0, 0.0, 0.0, 0.0, 0.0
    rho = p / cs2
    return True, floored, rho, vx, vy, vz, p


@njit(cache=True)
def _rec_II(E, mx, my, mz, D, gamma):
    """(ok, floored, n, eps, vx, vy, vz, p) from a 5-component conserved state."""
    if not (np.isfinite(E) and E > 0.0 and D > 0.0):
        return False, False, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    m1 = np.sqrt(mx * mx + my * my + mz * mz)
    if m1 >= E:
        return False, False, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    p = max(1e-10, (gamma - 1.0) * (E - m1 - D))
    converged = False
    for _ in range(NEWTON_MAXIT):
        Ep = E + p
        v2 = (m1 / Ep) ** 2
        W2 = 1.0 / (1.0 - v2)
        W = np.sqrt(W2)
        nn = D / W
        ee = Ep / (D * W) - 1.0 - p * W / D
        f = (gamma - 1.0) * nn * ee - p
        df = (gamma - 1.0) * v2 * W2 * (nn * ee + p) / Ep - 1.0
        dp = f / df
        pn = p - dp
        if pn <= 0.0:
            pn = 0.5 * p
        if abs(pn - p) <= NEWTON_TOL * pn:
            p = pn
            converged = True
            break
        p = pn
    if not converged:
        return False, False, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    floored = False
    if p < FLOOR:
        p = FLOOR
        floored = True
    den = E + p
    vx = mx / den
    vy = my / den
    vz = mz / den
    v2 = vx * vx + vy * vy + vz * vz
    if v2 >= 1.0:
        return False, False, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    n = D * np.sqrt(1.0 - v2)
    if n < FLOOR:
        n = FLOOR
        floored = True
    eps = p / ((gamma - 1.0) * n)
    return True, floored, n, eps, vx, vy, vz, p


# ----------------------------------------------------------------------
# Physical fluxes and eigenvalues (normal-first order)

@njit(cache=True)
def _flux_I(rho, p, vx, vy, vz, out):
    W2 = 1.0 / (1.0 - (vx * vx + vy * vy + vz * vz))
    wW2 = (rho + p) * W2
    out[0] = wW2 * vx
    out[1] = wW2 * vx * vx + p
    out[2] = wW2 * vx * vy
    out[3] = wW2 * vx * vz


@njit(cache=True)
def _flux_II(n, h, p, vx, vy, vz, out):
    W2 = 1.0 / (1.0 - (vx * vx + vy * vy + vz * vz))
    nhW2 = n * h * W2
    out[0] = nhW2 * vx
    out[1] = nhW2 * vx * vx + p
    out[2] = nhW2 * vx * vy
    out[3] = nhW2 * vx * vz
    out[4] = n * np.sqrt(W2) * vx


@njit(cache=True)
def _lam_pm(vx, v2, cs2):
    W2 = 1.0 / (1.0 - v2)
    A = np.sqrt(cs2 / (cs2 + W2 * (1.0 - vx * vx) * (1.0 - cs2)))
    lam_p = (vx + A) / (1.0 + vx * A)
    lam_m = (vx - A) / (1.0 - vx * A)
    return lam_m, lam_p


# ----------------------------------------------------------------------
# Characteristic projections

@njit(cache=True)
def _acoustic_row_I(lam, lam_o, vx, vy, vz, v2, vt2, p, cs2, one_m_vx2, P, row):
    den = lam * (1.0 + cs2 * (vx * vx - vt2)) - (1.0 + cs2) * vx
    cmx = ((lam - vx) * vx
           + cs2 * (1.0 - vt2 - lam * vx * (2.0 - vx * vx + vt2))) / den
    cE = (vx * (cs2 * (vx * vx - vt2) - 1.0) + lam * (1.0 - cs2 * v2)) / den
    delta = (p * (one_m_vx2 - cs2 * vt2)
             / ((1.0 - cs2 * v2) * (lam - vx) * (lam - lam_o)))
    e0 = delta * cE
    e1 = delta * cmx
    e2 = delta * vy
    e3 = delta * vz
    if not (np.isfinite(e0) and np.isfinite(e1)
            and np.isfinite(e2) and np.isfinite(e3)):
        return False
    P[row, 0] = e0
    P[row, 1] = e1
    P[row, 2] = e2
    P[row, 3] = e3
    return True


@njit(cache=True)
def _proj_I(rho, vx, vy, vz, cs2, P):
    """Fill P rows (0: degenerate pair sum, 1: minus, 2: plus); return
    (ok, lam0, lam_minus, lam_plus)."""
    v2 = vx * vx + vy * vy + vz * vz
    vt2 = vy * vy + vz * vz
    p = cs2 * rho
    one_m_vx2 = 1.0 - vx * vx
    if one_m_vx2 < GAP_TINY:
        return False, 0.0, 0.0, 0.0
    W2 = 1.0 / (1.0 - v2)
    A = np.sqrt(cs2 / (cs2 + W2 * one_m_vx2 * (1.0 - cs2)))
    lam_p = (vx + A) / (1.0 + vx * A)
    lam_m = (vx - A) / (1.0 - vx * A)
    if lam_p - lam_m < GAP_TINY:
        return False, 0.0, 0.0, 0.0
    f0 = p * W2 / one_m_vx2
    P[0, 0] = f0 * (2.0 * vt2)
    P[0, 1] = f0 * (2.0 * vx * vt2)
    P[0, 2] = f0 * (vy * (one_m_vx2 + vt2))
    P[0, 3] = f0 * (vz * (one_m_vx2 + vt2))
    if not _acoustic_row_I(lam_m, lam_p, vx, vy, vz, v2, vt2, p, cs2,
                           one_m_vx2, P, 1):
        return False, 0.0, 0.0, 0.0
    if not _acoustic_row_I(lam_p, lam_m, vx, vy, vz, v2, vt2, p, cs2,
                           one_m_vx2, P, 2):
        return False, 0.0, 0.0, 0.0
    return True, vx, lam_m, lam_p


@njit(cache=True)
def _solve5(Amat, b):
    """In-place Gaussian elimination with partial pivoting; solution in b."""
    for k in range(5):
        piv = k
        big = abs(Amat[k, k])
        for r in range(k + 1, 5):
            a = abs(Amat[r, k])
            if a > big:
                big = a
                piv = r
        if big == 0.0 or not np.isfinite(big):
            return False
        if piv != k:
            for c in range(5):
                tmp = Amat[k, c]
                Amat[k, c] = Amat[piv, c]
                Amat[piv, c] = tmp
            tmp = b[k]
            b[k] = b[piv]
            b[piv] = tmp
        for r in range(k + 1, 5):
            fac = Amat[r, k] / Amat[k, k]
            if fac != 0.0:
                for c in range(k + 1, 5):
                    Amat[r, c] -= fac * Amat[k, c]
                b[r] -= fac * b[k]
            Amat[r, k] = 0.0
    for k in range(4, -1, -1):
        s = b[k]
        for c in range(k + 1, 5):
            s -= Amat[k, c] * b[c]
        b[k] = s / Amat[k, k]
    return (np.isfinite(b[0]) and np.isfinite(b[1]) and np.isfinite(b[2])
            and np.isfinite(b[3]) and np.isfinite(b[4]))


@njit(cache=True)
def _proj_II(n, eps, vx, vy, vz, gamma, P, R, cvec):
    """Fill P rows (0: degenerate triple sum, 1: minus, 2: plus); return
    (ok, lam0, lam_minus, lam_plus).  R and cvec are scratch."""
    v2 = vx * vx + vy * vy + vz * vz
    p = (gamma - 1.0) * n * eps
    h = 1.0 + eps + p / n
    cs2 = gamma * p / (n * h)
    one_m_vx2 = 1.0 - vx * vx
    if one_m_vx2 < GAP_TINY:
        return False, 0.0, 0.0, 0.0
    W2 = 1.0 / (1.0 - v2)
    W = np.sqrt(W2)
    A = np.sqrt(cs2 / (cs2 + W2 * one_m_vx2 * (1.0 - cs2)))
    lam_p = (vx + A) / (1.0 + vx * A)
    lam_m = (vx - A) / (1.0 - vx * A)
    if lam_p - lam_m < GAP_TINY:
        return False, 0.0, 0.0, 0.0

    nhW2 = n * h * W2
    cvec[0] = nhW2 - p
    cvec[1] = nhW2 * vx
    cvec[2] = nhW2 * vy
    cvec[3] = nhW2 * vz
    cvec[4] = n * W

    ap = one_m_vx2 / (1.0 - vx * lam_p)
    am = one_m_vx2 / (1.0 - vx * lam_m)
    # columns: r0, ry, rz, r-, r+
    R[0, 0] = 1.0
    R[1, 0] = vx
    R[2, 0] = vy
    R[3, 0] = vz
    R[4, 0] = 1.0 / W
    R[0, 1] = 2.0 * h * W2 * vy
    R[1, 1] = 2.0 * h * W2 * vx * vy
    R[2, 1] = h * (1.0 + 2.0 * W2 * vy * vy)
    R[3, 1] = 2.0 * h * W2 * vz * vy
    R[4, 1] = W * vy
    R[0, 2] = 2.0 * h * W2 * vz
    R[1, 2] = 2.0 * h * W2 * vx * vz
    R[2, 2] = 2.0 * h * W2 * vy * vz
    R[3, 2] = h * (1.0 + 2.0 * W2 * vz * vz)
    R[4, 2] = W * vz
    R[0, 3] = h * W * am
    R[1, 3] = h * W * am * lam_m
    R[2, 3] = h * W * vy
    R[3, 3] = h * W * vz
    R[4, 3] = 1.0
    R[0, 4] = h * W * ap
    R[1, 4] = h * W * ap * lam_p
    R[2, 4] = h * W * vy
    R[3, 4] = h * W * vz
    R[4, 4] = 1.0

    for c in range(5):
        P[0, c] = R[c, 0]          # stash r0 (overwritten below)
        P[1, c] = R[c, 3] * 1.0    # stash r-
        P[2, c] = R[c, 4] * 1.0    # stash r+
    # keep the degenerate columns too before elimination destroys R
    ry0 = R[0, 1]
    ry1 = R[1, 1]
    ry2 = R[2, 1]
    ry3 = R[3, 1]
    ry4 = R[4, 1]
    rz0 = R[0, 2]
    rz1 = R[1, 2]
    rz2 = R[2, 2]
    rz3 = R[3, 2]
    rz4 = R[4, 2]
    if not _solve5(R, cvec):
        return False, 0.0, 0.0, 0.0
    c0 = cvec[0]
    c1 = cvec[1]
    c2 = cvec[2]
    cm = cvec[3]
    cp = cvec[4]
    r00, r01, r02, r03, r04 = P[0, 0], P[0, 1], P[0, 2], P[0, 3], P[0, 4]
    P[0, 0] = c0 * r00 + c1 * ry0 + c2 * rz0
    P[0, 1] = c0 * r01 + c1 * ry1 + c2 * rz1
    P[0, 2] = c0 * r02 + c1 * ry2 + c2 * rz2
    P[0, 3] = c0 * r03 + c1 * ry3 + c2 * rz3
    P[0, 4] = c0 * r04 + c1 * ry4 + c2 * rz4
    for c in range(5):
        P[1, c] = cm * P[1, c]
        P[2, c] = cp * P[2, c]
        if not (np.isfinite(P[0, c]) and np.isfinite(P[1, c])
                and np.isfinite(P[2, c])):
            return False, 0.0, 0.0, 0.0
    return True, vx, lam_m, lam_p


# ----------------------------------------------------------------------
# Pencil sweeps

@njit(parallel=True, cache=True)
def sweep_I(u, axis, bc, h, cs2, recon, flux_kind, rhs, counters):
    """Accumulate -dF/dx along one axis into rhs for the 4-component system.

    u, rhs: (4, nz, ny, nx) interior arrays; counters: (P, 4) int64 rows
    [pc_fallback, hlle_fallback, floors, error_flag].  error_flag is
    1 + the pencil-local face index of the first unrecoverable face.
    """
    nz = u.shape[1]
    ny = u.shape[2]
    nx = u.shape[3]
    if axis == 0:
        n = nx
        P = nz * ny
        div = ny
    elif axis == 1:
        n = ny
        P = nz * nx
        div = nx
    else:
        n = nz
        P = ny * nx
        div = nx
    c1 = 1
    c2 = 2
    c3 = 3
    if axis == 1:
        c1 = 2
        c2 = 1
    elif axis == 2:
        c1 = 3
        c3 = 1

    for pid in prange(P):
        a = pid // div
        b = pid % div
        buf = np.empty((4, n + 6))
        for i in range(n + 6):
            s = i - 3
            if bc == BC_PERIODIC:
                s = s % n
            elif s < 0:
                s = 0
            elif s >= n:
                s = n - 1
            if axis == 0:
                buf[0, i] = u[0, a, b, s]
                buf[1, i] = u[c1, a, b, s]
                buf[2, i] = u[c2, a, b, s]
                buf[3, i] = u[c3, a, b, s]
            elif axis == 1:
                buf[0, i] = u[0, a, s, b]
                buf[1, i] = u[c1, a, s, b]
                buf[2, i] = u[c2, a, s, b]
                buf[3, i] = u[c3, a, s, b]
            else:
                buf[0, i] = u[0, s, a, b]
                buf[1, i] = u[c1, s, a, b]
                buf[2, i] = u[c2, s, a, b]
                buf[3, i] = u[c3, s, a, b]

        fp = np.empty((4, n + 2))
        fm = np.empty((4, n + 2))
        if recon == 1:
            sl = np.empty(n + 6)
            cv = np.empty(n + 6)
            for c in range(4):
                for i in range(1, n + 5):
                    s_i, c_i = _slope_curv(buf[c, i - 1], buf[c, i],
                                           buf[c, i + 1], h, h)
                    sl[i] = s_i
                    cv[i] = c_i
                for ip in range(2, n + 4):
                    u1 = buf[c, ip - 1]
                    u2 = buf[c, ip]
                    u3 = buf[c, ip + 1]
                    S = _minmod3((u3 - u2) / h, sl[ip], (u2 - u1) / h)
                    fp[c, ip - 2] = _ceno_eval(
                        0.5 * h, u1, u2, u3, sl[ip - 1], cv[ip - 1],
                        sl[ip], cv[ip], sl[ip + 1], cv[ip + 1], S, h)
                    fm[c, ip - 2] = _ceno_eval(
                        -0.5 * h, u1, u2, u3, sl[ip - 1], cv[ip - 1],
                        sl[ip], cv[ip], sl[ip + 1], cv[ip + 1], S, h)
        else:
            for c in range(4):
                for ip in range(2, n + 4):
                    fp[c, ip - 2] = buf[c, ip]
                    fm[c, ip - 2] = buf[c, ip]

        flx = np.empty((4, n + 1))
        FL = np.empty(4)
        FR = np.empty(4)
        PL = np.empty((3, 4))
        PR = np.empty((3, 4))
        npc = 0
        nhl = 0
        nfl = 0
        err = 0
        for j in range(n + 1):
            EL = fp[0, j]
            mxL = fp[1, j]
            myL = fp[2, j]
            mzL = fp[3, j]
            okL, flL, rhoL, vxL, vyL, vzL, pL = _rec_I(EL, mxL, myL, mzL, cs2)
            if not okL:
                npc += 1
                EL = buf[0, j + 2]
                mxL = buf[1, j + 2]
                myL = buf[2, j + 2]
                mzL = buf[3, j + 2]
                okL, flL, rhoL, vxL, vyL, vzL, pL = _rec_I(EL, mxL, myL,
                                                           mzL, cs2)
            ER = fm[0, j + 1]
            mxR = fm[1, j + 1]
            myR = fm[2, j + 1]
            mzR = fm[3, j + 1]
            okR, flR, rhoR, vxR, vyR, vzR, pR = _rec_I(ER, mxR, myR, mzR, cs2)
            if not okR:
                npc += 1
                ER = buf[0, j + 3]
                mxR = buf[1, j + 3]
                myR = buf[2, j + 3]
                mzR = buf[3, j + 3]
                okR, flR, rhoR, vxR, vyR, vzR, pR = _rec_I(ER, mxR, myR,
                                                           mzR, cs2)
            if not (okL and okR):
                err = j + 1
                break
            if flL:
                nfl += 1
            if flR:
                nfl += 1
            _flux_I(rhoL, pL, vxL, vyL, vzL, FL)
            _flux_I(rhoR, pR, vxR, vyR, vzR, FR)
            done = False
            if flux_kind == FLUX_MARQUINA:
                okdL, l0L, lmL, lpL = _proj_I(rhoL, vxL, vyL, vzL, cs2, PL)
                okdR, l0R, lmR, lpR = _proj_I(rhoR, vxR, vyR, vzR, cs2, PR)
                if okdL and okdR:
                    a0 = max(abs(l0L), abs(l0R))
                    am = max(abs(lmL), abs(lmR))
                    ap = max(abs(lpL), abs(lpR))
                    for c in range(4):
                        diss = a0 * (PR[0, c] - PL[0, c])
                        diss += am * (PR[1, c] - PL[1, c])
                        diss += ap * (PR[2, c] - PL[2, c])
                        flx[c, j] = 0.5 * (FL[c] + FR[c] - diss)
                    done = True
                else:
                    nhl += 1
            if not done:
                v2L = vxL * vxL + vyL * vyL + vzL * vzL
                v2R = vxR * vxR + vyR * vyR + vzR * vzR
                lmL, lpL = _lam_pm(vxL, v2L, cs2)
                lmR, lpR = _lam_pm(vxR, v2R, cs2)
                bm = min(0.0, min(lmL, lmR))
                bp = max(0.0, max(lpL, lpR))
                if bp - bm <= 0.0:
                    err = j + 1
                    break
                den = bp - bm
                flx[0, j] = (bp * FL[0] - bm * FR[0] + bp * bm * (ER - EL)) / den
                flx[1, j] = (bp * FL[1] - bm * FR[1] + bp * bm * (mxR - mxL)) / den
                flx[2, j] = (bp * FL[2] - bm * FR[2] + bp * bm * (myR - myL)) / den
                flx[3, j] = (bp * FL[3] - bm * FR[3] + bp * bm * (mzR - mzL)) / den

        if err == 0:
            for c in range(4):
                cc = c
                if c == 1:
                    cc = c1
                elif c == 2:
                    cc = c2
                elif c == 3:
                    cc = c3
                if axis == 0:
                    for i in range(n):
                        rhs[cc, a, b, i] += -(flx[c, i + 1] - flx[c, i]) / h
                elif axis == 1:
                    for i in range(n):
                        rhs[cc, a, i, b] += -(flx[c, i + 1] - flx[c, i]) / h
                else:
                    for i in range(n):
                        rhs[cc, i, a, b] += -(flx[c, i + 1] - flx[c, i]) / h
        counters[pid, 0] = npc
        counters[pid, 1] = nhl
        counters[pid, 2] = nfl
        counters[pid, 3] = err


@njit(parallel=True, cache=True)
def sweep_II(u, axis, bc, h, gamma, recon, flux_kind, rhs, counters):
    """Accumulate -dF/dx along one axis into rhs for the 5-component system.

    Same layout and counter conventions as sweep_I.
    """
    nz = u.shape[1]
    ny = u.shape[2]
    nx = u.shape[3]
    if axis == 0:
        n = nx
        P = nz * ny
        div = ny
    elif axis == 1:
        n = ny
        P = nz * nx
        div = nx
    else:
        n = nz
        P = ny * nx
        div = nx
    c1 = 1
    c2 = 2
    c3 = 3
    if axis == 1:
        c1 = 2
        c2 = 1
    elif axis == 2:
        c1 = 3
        c3 = 1

    for pid in prange(P):
        a = pid // div
        b = pid % div
        buf = np.empty((5, n + 6))
        for i in range(n + 6):
            s = i - 3
            if bc == BC_PERIODIC:
                s = s % n
            elif s < 0:
                s = 0
            elif s >= n:
                s = n - 1
            if axis == 0:
                buf[0, i] = u[0, a, b, s]
                buf[1, i] = u[c1, a, b, s]
                buf[2, i] = u[c2, a, b, s]
                buf[3, i] = u[c3, a, b, s]
                buf[4, i] = u[4, a, b, s]
            elif axis == 1:
                buf[0, i] = u[0, a, s, b]
                buf[1, i] = u[c1, a, s, b]
                buf[2, i] = u[c2, a, s, b]
                buf[3, i] = u[c3, a, s, b]
                buf[4, i] = u[4, a, s, b]
            else:
                buf[0, i] = u[0, s, a, b]
                buf[1, i] = u[c1, s, a, b]
                buf[2, i] = u[c2, s, a, b]
                buf[3, i] = u[c3, s, a, b]
                buf[4, i] = u[4, s, a, b]

        fp = np.empty((5, n + 2))
        fm = np.empty((5, n + 2))
        if recon == 1:
            sl = np.empty(n + 6)
            cv = np.empty(n + 6)
            for c in range(5):
                for i in range(1, n + 5):
                    s_i, c_i = _slope_curv(buf[c, i - 1], buf[c, i],
                                           buf[c, i + 1], h, h)
                    sl[i] = s_i
                    cv[i] = c_i
                for ip in range(2, n + 4):
                    u1 = buf[c, ip - 1]
                    u2 = buf[c, ip]
                    u3 = buf[c, ip + 1]
                    S = _minmod3((u3 - u2) / h, sl[ip], (u2 - u1) / h)
                    fp[c, ip - 2] = _ceno_eval(
                        0.5 * h, u1, u2, u3, sl[ip - 1], cv[ip - 1],
                        sl[ip], cv[ip], sl[ip + 1], cv[ip + 1], S, h)
                    fm[c, ip - 2] = _ceno_eval(
                        -0.5 * h, u1, u2, u3, sl[ip - 1], cv[ip - 1],
                        sl[ip], cv[ip], sl[ip + 1], cv[ip + 1], S, h)
        else:
            for c in range(5):
                for ip in range(2, n + 4):
                    fp[c, ip - 2] = buf[c, ip]
                    fm[c, ip - 2] = buf[c, ip]

        flx = np.empty((5, n + 1))
        FL = np.empty(5)
        FR = np.empty(5)
        PL = np.empty((3, 5))
        PR = np.empty((3, 5))
        Rm = np.empty((5, 5))
        cvec = np.empty(5)
        npc = 0
        nhl = 0
        nfl = 0
        err = 0
        for j in range(n + 1):
            EL = fp[0, j]
            mxL = fp[1, j]
            myL = fp[2, j]
            mzL = fp[3, j]
            DL = fp[4, j]
            okL, flL, nL, epsL, vxL, vyL, vzL, pL = _rec_II(
                EL, mxL, myL, mzL, DL, gamma)
            if not okL:
                npc += 1
                EL = buf[0, j + 2]
                mxL = buf[1, j + 2]
                myL = buf[2, j + 2]
                mzL = buf[3, j + 2]
                DL = buf[4, j + 2]
                okL, flL, nL, epsL, vxL, vyL, vzL, pL = _rec_II(
                    EL, mxL, myL, mzL, DL, gamma)
            ER = fm[0, j + 1]
            mxR = fm[1, j + 1]
            myR = fm[2, j + 1]
            mzR = fm[3, j + 1]
            DR = fm[4, j + 1]
            okR, flR, nR, epsR, vxR, vyR, vzR, pR = _rec_II(
                ER, mxR, myR, mzR, DR, gamma)
            if not okR:
                npc += 1
                ER = buf[0, j + 3]
                mxR = buf[1, j + 3]
                myR = buf[2, j + 3]
                mzR = buf[3, j + 3]
                DR = buf[4, j + 3]
                okR, flR, nR, epsR, vxR, vyR, vzR, pR = _rec_II(
                    ER, mxR, myR, mzR, DR, gamma)
            if not (okL and okR):
                err = j + 1
                break
            if flL:
                nfl += 1
            if flR:
                nfl += 1
            hL = 1.0 + epsL + pL / nL
            hR = 1.0 + epsR + pR / nR
            _flux_II(nL, hL, pL, vxL, vyL, vzL, FL)
            _flux_II(nR, hR, pR, vxR, vyR, vzR, FR)
            done = False
            if flux_kind == FLUX_MARQUINA:
                okdL, l0L, lmL, lpL = _proj_II(nL, epsL, vxL, vyL, vzL,
                                               gamma, PL, Rm, cvec)
                okdR, l0R, lmR, lpR = _proj_II(nR, epsR, vxR, vyR, vzR,
                                               gamma, PR, Rm, cvec)
                if okdL and okdR:
                    a0 = max(abs(l0L), abs(l0R))
                    am = max(abs(lmL), abs(lmR))
                    ap = max(abs(lpL), abs(lpR))
                    for c in range(5):
                        diss = a0 * (PR[0, c] - PL[0, c])
                        diss += am * (PR[1, c] - PL[1, c])
                        diss += ap * (PR[2, c] - PL[2, c])
                        flx[c, j] = 0.5 * (FL[c] + FR[c] - diss)
                    done = True
                else:
                    nhl += 1
            if not done:
                cs2L = gamma * pL / (nL * hL)
                cs2R = gamma * pR / (nR * hR)
                v2L = vxL * vxL + vyL * vyL + vzL * vzL
                v2R = vxR * vxR + vyR * vyR + vzR * vzR
                lmL, lpL = _lam_pm(vxL, v2L, cs2L)
                lmR, lpR = _lam_pm(vxR, v2R, cs2R)
                bm = min(0.0, min(lmL, lmR))
                bp = max(0.0, max(lpL, lpR))
                if bp - bm <= 0.0:
                    err = j + 1
                    break
                den = bp - bm
                flx[0, j] = (bp * FL[0] - bm * FR[0] + bp * bm * (ER - EL)) / den
                flx[1, j] = (bp * FL[1] - bm * FR[1] + bp * bm * (mxR - mxL)) / den
                flx[2, j] = (bp * FL[2] - bm * FR[2] + bp * bm * (myR - myL)) / den
                flx[3, j] = (bp * FL[3] - bm * FR[3] + bp * bm * (mzR - mzL)) / den
                flx[4, j] = (bp * FL[4] - bm * FR[4] + bp * bm * (DR - DL)) / den

        if err == 0:
            for c in range(5):
                cc = c
                if c == 1:
                    cc = c1
                elif c == 2:
                    cc = c2
                elif c == 3:
                    cc = c3
                if axis == 0:
                    for i in range(n):
                        rhs[cc, a, b, i] += -(flx[c, i + 1] - flx[c, i]) / h
                elif axis == 1:
                    for i in range(n):
                        rhs[cc, a, i, b] += -(flx[c, i + 1] - flx[c, i]) / h
                else:
                    for i in range(n):
                        rhs[cc, i, a, b] += -(flx[c, i + 1] - flx[c, i]) / h
        counters[pid, 0] = npc
        counters[pid, 1] = nhl
        counters[pid, 2] = nfl
        counters[pid, 3] = err


# ----------------------------------------------------------------------
# Whole-grid primitive recovery

@njit(parallel=True, cache=True)
def recover_grid_I(u, cs2, out, flags):
    """u (4, nz, ny, nx) -> out (5, nz, ny, nx): rho, vx, vy, vz, p.

    flags: 0 ok, 1 floored, 2 failed (per cell).
    """
    nz = u.shape[1]
    ny = u.shape[2]
    nx = u.shape[3]
    N = nz * ny * nx
    for idx in prange(N):
        iz = idx // (ny * nx)
        r = idx % (ny * nx)
        iy = r // nx
        ix = r % nx
        ok, fl, rho, vx, vy, vz, p = _rec_I(
            u[0, iz, iy, ix], u[1, iz, iy, ix], u[2, iz, iy, ix],
            u[3, iz, iy, ix], cs2)
        out[0, iz, iy, ix] = rho
        out[1, iz, iy, ix] = vx
        out[2, iz, iy, ix] = vy
        out[3, iz, iy, ix] = vz
        out[4, iz, iy, ix] = p
        if not ok:
            flags[iz, iy, ix] = 2
        elif fl:
            flags[iz, iy, ix] = 1
        else:
            flags[iz, iy, ix] = 0


@njit(parallel=True, cache=True)
def recover_grid_II(u, gamma, out, flags):
    """u (5, nz, ny, nx) -> out (6, nz, ny, nx): n, eps, vx, vy, vz, p.

    flags: 0 ok, 1 floored, 2 failed (per cell).
    """
    nz = u.shape[1]
    ny = u.shape[2]
    nx = u.shape[3]
    N = nz * ny * nx
    for idx in prange(N):
        iz = idx // (ny * nx)
        r = idx % (ny * nx)
        iy = r // nx
        ix = r % nx
        ok, fl, n, eps, vx, vy, vz, p = _rec_II(
            u[0, iz, iy, ix], u[1, iz, iy, ix], u[2, iz, iy, ix],
            u[3, iz, iy, ix], u[4, iz, iy, ix], gamma)
        out[0, iz, iy, ix] = n
        out[1, iz, iy, ix] = eps
        out[2, iz, iy, ix] = vx
        out[3, iz, iy, ix] = vy
        out[4, iz, iy, ix] = vz
        out[5, iz, iy, ix] = p
        if not ok:
            flags[iz, iy, ix] = 2
        elif fl:
            flags[iz, iy, ix] = 1
        else:
            flags[iz, iy, ix] = 0
