"""Characteristic decompositions of the flux Jacobians and interface fluxes.

The dissipation term of the Marquina-type flux needs, for each eigenvalue
lambda_p of dF/dU, the projected vector P_p = (l_p . U) r_p.  For system I
(barotropic, 4 components) these are evaluated from closed-form expressions;
the degenerate pair belonging to lambda_0 is kept summed.  For system II the
projections are obtained from the analytic right eigenvectors by solving
R c = U for the expansion coefficients.

Component ordering of all conserved/projected vectors is (E, m_x, m_y, m_z)
plus D for system II.  Formulas are written for the x-direction; other
directions are handled by swapping the normal velocity/momentum into the
x slot, which is an exact symmetry of the equations.
"""

import numpy as np

from .state import (
    axis_index,
    physical_flux,
    pressure,
    recover_primitive,
    sound_speed,
)

_GAP_TINY = 1e-14


class DecompositionError(RuntimeError):
    """Characteristic decomposition is degenerate or ill-conditioned."""


def _vel_perm(d):
    """Self-inverse velocity permutation swapping component d into slot 0."""
    perm = [0, 1, 2]
    perm[0], perm[d] = perm[d], perm[0]
    return perm


def _comp_perm(d, ncomp):
    """Conserved-component permutation matching _vel_perm (energy/D fixed)."""
    perm = [0] + [1 + i for i in _vel_perm(d)]
    if ncomp == 5:
        perm.append(4)
    return perm


def eigenvalues(prim, eos, direction):
    """(lambda_0, lambda_-, lambda_+) of dF^d/dU for the given state."""
    d = axis_index(direction)
    v = prim.v
    v2 = v @ v
    vd = v[d]
    cs2 = sound_speed(prim, eos) ** 2
    W2 = 1.0 / (1.0 - v2)
    A = np.sqrt(cs2 / (cs2 + W2 * (1.0 - vd * vd) * (1.0 - cs2)))
    lam_p = (vd + A) / (1.0 + vd * A)
    lam_m = (vd - A) / (1.0 - vd * A)
    return vd, lam_m, lam_p


class CharacteristicDecomposition:
    """Eigenvalues and projected vectors P_p = (l_p . U) r_p at one state.

    ``P_0`` is the sum over the degenerate eigenvalue-lambda_0 subspace
    (dimension 2 for system I, 3 for system II), so that
    ``P_0 + P_minus + P_plus = U`` exactly characterizes completeness.
    """

    def __init__(self, system, direction, lam0, lam_m, lam_p, A, vt2,
                 P0, Pm, Pp, aux=None):
        self.system = system
        self.direction = direction
        self.lam0 = lam0
        self.lam_minus = lam_m
        self.lam_plus = lam_p
        self.A = A
        self.vt2 = vt2
        self.P0 = P0
        self.P_minus = Pm
        self.P_plus = Pp
        self.aux = aux or {}

    @property
    def multiplicity0(self):
        return 2 if self.system == "I" else 3

    def eigenvalue_list(self):
        """All eigenvalues with multiplicity, ascending groups (0, -, +)."""
        return [self.lam0] * self.multiplicity0 + [self.lam_minus, self.lam_plus]

    def projections(self):
        """[(lambda, summed projection)] for the three eigen-groups."""
        return [(self.lam0, self.P0), (self.lam_minus, self.P_minus),
                (self.lam_plus, self.P_plus)]


def characteristic_projection_I(prim, eos, direction):
    """Closed-form projected vectors for the 4-component barotropic system.

    The acoustic projections are Delta_pm times a direction vector whose
    normal-momentum and energy entries are rational in lambda_pm; the
    normalization Delta_pm = p (1 - v_x^2 - cs^2 v_t^2) /
    ((1 - cs^2 v^2)(lambda_pm - v_x)(lambda_pm - lambda_mp)) is fixed by
    requiring P_0 + P_- + P_+ = U, which the tests verify against
    numerically differentiated Jacobians.
    """
    if prim.system != "I" or eos.system != "I":
        raise ValueError("characteristic_projection_I needs a system I state")
    d = axis_index(direction)
    v = prim.v[_vel_perm(d)]
    vx, vy, vz = v
    v2 = v @ v
    vt2 = vy * vy + vz * vz
    cs2 = eos.cs2
    rho = prim.rho
    p = cs2 * rho
    one_m_vx2 = 1.0 - vx * vx
    W2 = 1.0 / (1.0 - v2)
    if one_m_vx2 < _GAP_TINY:
        raise DecompositionError(f"normal velocity too close to light speed: {vx}")
    A = np.sqrt(cs2 / (cs2 + W2 * one_m_vx2 * (1.0 - cs2)))
    lam_p = (vx + A) / (1.0 + vx * A)
    lam_m = (vx - A) / (1.0 - vx * A)
    if lam_p - lam_m < _GAP_TINY:
        raise DecompositionError("acoustic eigenvalues are degenerate")

    f0 = p * W2 / one_m_vx2
    P0 = f0 * np.array([2.0 * vt2,
                        2.0 * vx * vt2,
                        vy * (one_m_vx2 + vt2),
                        vz * (one_m_vx2 + vt2)])

    aux = {"Theta": {}, "Sigma": {}, "Omega": {}, "Delta": {}, "Xi": {}}
    acoustic = {}
    for sign, lam, lam_o in (("+", lam_p, lam_m), ("-", lam_m, lam_p)):
        den = lam * (1.0 + cs2 * (vx * vx - vt2)) - (1.0 + cs2) * vx
        cmx = ((lam - vx) * vx
               + cs2 * (1.0 - vt2 - lam * vx * (2.0 - vx * vx + vt2))) / den
        cE = (vx * (cs2 * (vx * vx - vt2) - 1.0) + lam * (1.0 - cs2 * v2)) / den
        delta = (p * (one_m_vx2 - cs2 * vt2)
                 / ((1.0 - cs2 * v2) * (lam - vx) * (lam - lam_o)))
        P = delta * np.array([cE, cmx, vy, vz])
        if not np.all(np.isfinite(P)):
            raise DecompositionError("non-finite acoustic projection")
        theta = cs2 * rho * one_m_vx2 * (vt2 - vx * vx - 1.0 + 2.0 * lam_o * vx)
        sigma = ((1.0 - lam * vx)
                 * (vt2 * (1.0 - vt2) + 2.0 * vt2 - vx * vx * one_m_vx2)
                 - 2.0 * vt2 * one_m_vx2)
        omega = lam * (1.0 + cs2 * v2) - (1.0 + cs2) * vx
        xi = (omega * (theta + p * (cs2 * sigma + (1.0 - v2) * (lam_o - vx) * vx))
              / ((lam_o - lam) * delta))
        aux["Theta"][sign] = theta
        aux["Sigma"][sign] = sigma
        aux["Omega"][sign] = omega
        aux["Delta"][sign] = delta
        aux["Xi"][sign] = xi
        acoustic[sign] = P

    cperm = _comp_perm(d, 4)
    return CharacteristicDecomposition(
        "I", "xyz"[d], v[0], lam_m, lam_p, A, vt2,
        P0[cperm], acoustic["-"][cperm], acoustic["+"][cperm], aux)


def eigensystem_II(prim, eos, direction):
    """Projected vectors for the 5-component perfect-gas system.

    Built from the analytic right eigenvectors; the expansion coefficients
    l_p . U follow from solving R c = U, so L R = 1 holds by construction.
    """
    if prim.system != "II" or eos.system != "II":
        raise ValueError("eigensystem_II needs a system II state")
    d = axis_index(direction)
    v = prim.v[_vel_perm(d)]
    vx, vy, vz = v
    v2 = v @ v
    gamma = eos.gamma
    n, eps = prim.n, prim.eps
    p = (gamma - 1.0) * n * eps
    h = 1.0 + eps + p / n
    cs2 = gamma * p / (n * h)
    W2 = 1.0 / (1.0 - v2)
    W = np.sqrt(W2)
    A = np.sqrt(cs2 / (cs2 + W2 * (1.0 - vx * vx) * (1.0 - cs2)))
    lam_p = (vx + A) / (1.0 + vx * A)
    lam_m = (vx - A) / (1.0 - vx * A)
    if lam_p - lam_m < _GAP_TINY:
        raise DecompositionError("acoustic eigenvalues are degenerate")

    nhW2 = n * h * W2
    U = np.array([nhW2 - p, nhW2 * vx, nhW2 * vy, nhW2 * vz, n * W])

    r0 = np.array([1.0, vx, vy, vz, 1.0 / W])
    ry = np.array([2.0 * h * W2 * vy, 2.0 * h * W2 * vx * vy,
                   h * (1.0 + 2.0 * W2 * vy * vy), 2.0 * h * W2 * vz * vy,
                   W * vy])
    rz = np.array([2.0 * h * W2 * vz, 2.0 * h * W2 * vx * vz,
                   2.0 * h * W2 * vy * vz, h * (1.0 + 2.0 * W2 * vz * vz),
                   W * vz])
    ap = (1.0 - vx * vx) / (1.0 - vx * lam_p)
    am = (1.0 - vx * vx) / (1.0 - vx * lam_m)
    rp = np.array([h * W * ap, h * W * ap * lam_p, h * W * vy, h * W * vz, 1.0])
    rm = np.array([h * W * am, h * W * am * lam_m, h * W * vy, h * W * vz, 1.0])

    R = np.column_stack([r0, ry, rz, rm, rp])
    try:
        c = np.linalg.solve(R, U)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"singular eigenvector matrix: {exc}") from exc
    if not np.all(np.isfinite(c)):
        raise DecompositionError("non-finite eigenvector expansion")
    P0 = c[0] * r0 + c[1] * ry + c[2] * rz
    Pm = c[3] * rm
    Pp = c[4] * rp

    cperm = _comp_perm(d, 5)
    return CharacteristicDecomposition(
        "II", "xyz"[d], vx, lam_m, lam_p, A, vy * vy + vz * vz,
        P0[cperm], Pm[cperm], Pp[cperm])


def decompose(prim, eos, direction):
    """System-appropriate characteristic decomposition."""
    if eos.system == "I":
        return characteristic_projection_I(prim, eos, direction)
    return eigensystem_II(prim, eos, direction)


def marquina_flux(U_L, U_R, eos, direction):
    """Characteristic interface flux with per-field dissipation coefficient
    max over the two sides of |lambda_p|:

        F = 1/2 (F_L + F_R - sum_p max|lambda_p| (P_{p,R} - P_{p,L})).
    """
    from .state import FluxVector

    prim_L = recover_primitive(U_L, eos)
    prim_R = recover_primitive(U_R, eos)
    F_L = physical_flux(prim_L, eos, direction).components
    F_R = physical_flux(prim_R, eos, direction).components
    dec_L = decompose(prim_L, eos, direction)
    dec_R = decompose(prim_R, eos, direction)
    diss = np.zeros_like(F_L)
    for (lam_L, P_L), (lam_R, P_R) in zip(dec_L.projections(), dec_R.projections()):
        diss += max(abs(lam_L), abs(lam_R)) * (P_R - P_L)
    return FluxVector(0.5 * (F_L + F_R - diss), "xyz"[axis_index(direction)])


def hlle_flux(U_L, U_R, eos, direction):
    """Two-wave interface flux with signal bounds
    b- = min(0, lambda_-(L), lambda_-(R)), b+ = max(0, lambda_+(L), lambda_+(R))."""
    from .state import FluxVector

    prim_L = recover_primitive(U_L, eos)
    prim_R = recover_primitive(U_R, eos)
    F_L = physical_flux(prim_L, eos, direction).components
    F_R = physical_flux(prim_R, eos, direction).components
    _, lm_L, lp_L = eigenvalues(prim_L, eos, direction)
    _, lm_R, lp_R = eigenvalues(prim_R, eos, direction)
    bm = min(0.0, lm_L, lm_R)
    bp = max(0.0, lp_L, lp_R)
    if bp - bm <= 0.0:
        raise DecompositionError("vanishing signal-speed interval")
    UL = np.asarray(U_L, dtype=float)
    UR = np.asarray(U_R, dtype=float)
    comp = (bp * F_L - bm * F_R + bp * bm * (UR - UL)) / (bp - bm)
    return FluxVector(comp, "xyz"[axis_index(direction)])
