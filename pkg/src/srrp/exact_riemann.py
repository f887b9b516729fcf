"""Exact self-similar solution of the 1D Riemann problem with tangential velocities.

The initial discontinuity decays into a left-moving wave, a contact, and a
right-moving wave; each outer wave is a shock or a rarefaction fan.  Pressure
and normal velocity are continuous across the contact, so the star pressure
p* solves vx_left(p*) = vx_right(p*) where each side's wave curve gives the
post-wave normal velocity as a function of the pressure behind the wave.

Shock branches are closed-form: the jump conditions written with
Q = w W^2 (v^x - V_s) (w = rho+p or nh) give, once the shock speed V_s is
known,

    Q_b = Q_a + V_s (p_a - p_b)
    v^x_b = (Q_a v^x_a + p_a - p_b) / Q_b
    v^t_b = Q_a v^t_a / Q_b,

and V_s itself has a closed form per system (for the barotropic system from
the pressure-only jump strength; for the perfect gas from the Taub adiabat
and the invariant mass flux).  Rarefaction branches integrate the primitive
variables along the acoustic eigenvector, parametrized by pressure; the
integration is exact simple-wave flow, verified by self-similarity,
tangential-momentum, and entropy invariants in the test suite.

Wave-pattern tags order the letters as (right-moving wave, left-moving
wave): e.g. "RS" means a right-moving rarefaction and a left-moving shock.
Use the structured kind fields when letter order matters.
"""

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .state import PrimitiveState, pressure

P_FLOOR = 1e-14
P_CEIL_FACTOR = 1e6
_ROOT_RTOL = 1e-13


class RiemannSolverError(RuntimeError):
    """Exact Riemann solution could not be constructed."""


class VacuumError(RiemannSolverError):
    """The states expand to (near-)vacuum; no star pressure above the floor."""


class WavePattern:
    """Decay pattern of the initial discontinuity.

    ``tag`` concatenates the first letters of (right-moving wave,
    left-moving wave): "SS", "RR", "RS" (right rarefaction + left shock),
    "SR" (right shock + left rarefaction).  Compares equal to the tag
    string.
    """

    def __init__(self, left_wave, right_wave):
        if left_wave not in ("shock", "rarefaction"):
            raise ValueError(f"unknown wave kind: {left_wave}")
        if right_wave not in ("shock", "rarefaction"):
            raise ValueError(f"unknown wave kind: {right_wave}")
        self.left_wave = left_wave
        self.right_wave = right_wave

    @property
    def tag(self):
        return self.right_wave[0].upper() + self.left_wave[0].upper()

    def __eq__(self, other):
        if isinstance(other, str):
            return self.tag == other
        if isinstance(other, WavePattern):
            return (self.left_wave == other.left_wave
                    and self.right_wave == other.right_wave)
        return NotImplemented

    def __hash__(self):
        return hash(self.tag)

    def __repr__(self):
        return (f"WavePattern({self.tag}: right={self.right_wave}, "
                f"left={self.left_wave})")

    def __str__(self):
        return self.tag


class Wave:
    """One outer wave: kind plus head/tail speeds (equal for a shock)."""

    def __init__(self, kind, head, tail):
        self.kind = kind
        self.head = head
        self.tail = tail

    def __repr__(self):
        return f"Wave({self.kind}, head={self.head:.6g}, tail={self.tail:.6g})"


def _family_lambda(vx, v2, cs2, sign):
    W2 = 1.0 / (1.0 - v2)
    A = np.sqrt(cs2 / (cs2 + W2 * (1.0 - vx * vx) * (1.0 - cs2)))
    return (vx + sign * A) / (1.0 + sign * vx * A)


def _prim_lambda(prim, eos, sign):
    v = prim.v
    if eos.system == "I":
        cs2 = eos.cs2
    else:
        p = prim.pressure(eos)
        cs2 = eos.gamma * p / (prim.n * prim.enthalpy(eos))
    return _family_lambda(v[0], v @ v, cs2, sign)


# ---------------------------------------------------------------------------
# shock branch (closed form)
# ---------------------------------------------------------------------------

def _shock_behind(ahead, p_b, side, eos):
    """Post-shock state and shock speed for pressure p_b > p(ahead)."""
    va = ahead.v
    vax = va[0]
    W_a2 = 1.0 / (1.0 - va @ va)
    sgn = 1.0 if side == "right" else -1.0
    p_a = ahead.pressure(eos)

    if eos.system == "I":
        cs2 = eos.cs2
        w_a = ahead.rho + p_a
        wbar2 = (cs2 * p_a + p_b) / (w_a * W_a2 * (1.0 - cs2))
        wbar = np.sqrt(wbar2)
        V_s = (vax + sgn * wbar * np.sqrt(1.0 - vax * vax + wbar2)) / (1.0 + wbar2)
    else:
        gamma = eos.gamma
        n_a, h_a = ahead.n, ahead.enthalpy(eos)
        alpha = (gamma - 1.0) * (p_b - p_a) / (gamma * p_b)
        C = h_a * h_a + (gamma - 1.0) * (p_b - p_a) * h_a * (h_a - 1.0) / (gamma * p_a)
        h_b = (-alpha + np.sqrt(alpha * alpha + 4.0 * (1.0 - alpha) * C)) \
            / (2.0 * (1.0 - alpha))
        n_b = gamma * p_b / ((gamma - 1.0) * (h_b - 1.0))
        j2 = (p_b - p_a) / (h_a / n_a - h_b / n_b)
        if not (j2 > 0.0 and np.isfinite(j2)):
            raise RiemannSolverError(
                f"invalid mass flux through shock (p_a={p_a}, p_b={p_b})")
        j = np.sqrt(j2)
        N2 = n_a * n_a * W_a2
        V_s = (N2 * vax + sgn * j * np.sqrt(j2 + N2 * (1.0 - vax * vax))) / (N2 + j2)
        w_a = n_a * h_a

    Q_a = w_a * W_a2 * (vax - V_s)
    Q_b = Q_a + V_s * (p_a - p_b)
    vbx = (Q_a * vax + p_a - p_b) / Q_b
    vby = Q_a * va[1] / Q_b
    vbz = Q_a * va[2] / Q_b
    vb = np.array([vbx, vby, vbz])
    if vb @ vb >= 1.0 or not np.isfinite(V_s) or abs(V_s) >= 1.0:
        raise RiemannSolverError(
            f"unphysical post-shock state (p_a={p_a}, p_b={p_b}, side={side})")
    if eos.system == "I":
        behind = PrimitiveState(rho=p_b / eos.cs2, v=vb)
    else:
        behind = PrimitiveState(n=n_b, eps=(h_b - 1.0) / eos.gamma, v=vb)
    return behind, V_s


# ---------------------------------------------------------------------------
# rarefaction branch (simple-wave ODE along the acoustic eigenvector)
# ---------------------------------------------------------------------------

def _fan_rhs_I(p, y, cs2, sign):
    vx, vy, vz = y
    v2 = vx * vx + vy * vy + vz * vz
    rho = p / cs2
    W2 = 1.0 / (1.0 - v2)
    lam = _family_lambda(vx, v2, cs2, sign)
    vt2 = vy * vy + vz * vz
    den = lam * (1.0 + cs2 * (vx * vx - vt2)) - (1.0 + cs2) * vx
    cmx = ((lam - vx) * vx
           + cs2 * (1.0 - vt2 - lam * vx * (2.0 - vx * vx + vt2))) / den
    cE = (vx * (cs2 * (vx * vx - vt2) - 1.0) + lam * (1.0 - cs2 * v2)) / den
    r = np.array([cE, cmx, vy, vz])
    # dU/dq for q = (rho, vx, vy, vz)
    J = np.empty((4, 4))
    J[0, 0] = (1.0 + cs2) * W2 - cs2
    w_fac = rho * (1.0 + cs2)
    for j, vj in enumerate((vx, vy, vz)):
        J[1 + j, 0] = (1.0 + cs2) * W2 * vj
        J[0, 1 + j] = w_fac * 2.0 * W2 * W2 * vj
        for i, vi in enumerate((vx, vy, vz)):
            J[1 + i, 1 + j] = w_fac * (2.0 * W2 * W2 * vj * vi
                                       + (W2 if i == j else 0.0))
    rt = np.linalg.solve(J, r)
    return rt[1:] / (cs2 * rt[0])


def _fan_rhs_II(p, y, gamma, sign):
    n, eps, vx, vy, vz = y
    v2 = vx * vx + vy * vy + vz * vz
    pp = (gamma - 1.0) * n * eps
    h = 1.0 + gamma * eps
    cs2 = gamma * pp / (n * h)
    W2 = 1.0 / (1.0 - v2)
    W = np.sqrt(W2)
    lam = _family_lambda(vx, v2, cs2, sign)
    acoef = (1.0 - vx * vx) / (1.0 - vx * lam)
    r = np.array([h * W * acoef, h * W * acoef * lam, h * W * vy, h * W * vz, 1.0])
    # dU/dq for q = (n, eps, vx, vy, vz)
    J = np.empty((5, 5))
    J[0, 0] = h * W2 - (gamma - 1.0) * eps
    J[4, 0] = W
    J[0, 1] = n * gamma * W2 - (gamma - 1.0) * n
    J[4, 1] = 0.0
    nh = n * h
    for j, vj in enumerate((vx, vy, vz)):
        J[1 + j, 0] = h * W2 * vj
        J[1 + j, 1] = n * gamma * W2 * vj
        J[0, 2 + j] = nh * 2.0 * W2 * W2 * vj
        J[4, 2 + j] = n * W * W2 * vj
        for i, vi in enumerate((vx, vy, vz)):
            J[1 + i, 2 + j] = nh * (2.0 * W2 * W2 * vj * vi
                                    + (W2 if i == j else 0.0))
    rt = np.linalg.solve(J, r)
    dp_along = (gamma - 1.0) * (eps * rt[0] + n * rt[1])
    return rt / dp_along


class _FanCurve:
    """Lazily extended dense solution of the fan ODE below p(ahead).

    Integration proceeds downward in pressure in decade-sized chunks; each
    chunk's dense output is kept so repeated queries (wave-curve root find,
    fan sampling) are interpolation lookups.
    """

    def __init__(self, ahead, eos, side):
        self.eos = eos
        self.side = side
        self.sign = -1.0 if side == "left" else 1.0
        self.p_top = ahead.pressure(eos)
        if self.eos.system == "I":
            self._y_bottom = ahead.v.copy()
            self._rhs = _fan_rhs_I
            self._arg = eos.cs2
        else:
            self._y_bottom = np.array([ahead.n, ahead.eps, *ahead.v])
            self._rhs = _fan_rhs_II
            self._arg = eos.gamma
        self.p_bottom = self.p_top
        self._segments = []  # (p_hi, p_lo, dense)

    def ensure(self, p):
        if p <= 0.0:
            raise ValueError(f"pressure behind a wave must be positive, got {p}")
        while self.p_bottom > p:
            target = max(p, self.p_bottom * 0.099)
            sol = solve_ivp(self._rhs, (self.p_bottom, target), self._y_bottom,
                            args=(self._arg, self.sign), method="DOP853",
                            rtol=1e-12, atol=1e-14, dense_output=True)
            if not sol.success:
                raise RiemannSolverError(
                    f"fan integration failed near p={target}: {sol.message}")
            self._segments.append((self.p_bottom, target, sol.sol))
            self.p_bottom = target
            self._y_bottom = sol.y[:, -1].copy()

    def _y_at(self, p):
        self.ensure(p)
        if p >= self.p_top:
            dense = self._segments[0][2] if self._segments else None
            if dense is None or p > self.p_top:
                raise ValueError(f"fan query above ahead pressure: {p}")
            return dense(self.p_top)
        for p_hi, p_lo, dense in self._segments:
            if p_lo <= p <= p_hi:
                return dense(p)
        raise RiemannSolverError(f"fan query outside integrated range: {p}")

    def state(self, p):
        y = self._y_at(p)
        if self.eos.system == "I":
            return PrimitiveState(rho=p / self.eos.cs2, v=np.array(y))
        return PrimitiveState(n=y[0], eps=y[1], v=np.array(y[2:]))

    def vx(self, p):
        y = self._y_at(p)
        return y[0] if self.eos.system == "I" else y[2]

    def lam(self, p):
        return _prim_lambda(self.state(p), self.eos, self.sign)


def _behind(ahead, p_b, side, eos, fan=None):
    """(behind state, Wave, fan-or-None) for the wave on one side."""
    if p_b <= 0.0:
        raise ValueError(f"pressure behind a wave must be positive, got {p_b}")
    sign = -1.0 if side == "left" else 1.0
    p_a = ahead.pressure(eos)
    if p_b > p_a:
        behind, V_s = _shock_behind(ahead, p_b, side, eos)
        return behind, Wave("shock", V_s, V_s), None
    if p_b == p_a:
        lam = _prim_lambda(ahead, eos, sign)
        return ahead, Wave("rarefaction", lam, lam), None
    if fan is None:
        fan = _FanCurve(ahead, eos, side)
    behind = fan.state(p_b)
    head = _prim_lambda(ahead, eos, sign)
    tail = _prim_lambda(behind, eos, sign)
    return behind, Wave("rarefaction", head, tail), fan


def wave_curve_velocity(ahead, p_behind, side, eos):
    """Normal velocity behind the left- or right-moving wave at pressure
    p_behind: shock branch for p_behind > p(ahead), rarefaction (simple-wave
    integration) below.  Continuous and strictly monotone in p_behind."""
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    behind, _, _ = _behind(ahead, p_behind, side, eos)
    return float(behind.v[0])


class ExactSolution:
    """Self-similar decay of a Riemann problem; immutable after construction.

    Attributes: ``left``/``right`` input states, ``p_star``, ``vx_star``,
    ``star_left``/``star_right`` (full states adjacent to the contact),
    ``left_wave``/``right_wave`` (kind + head/tail speeds), ``contact_speed``
    and ``pattern``.  ``wave_speeds`` collects (left head, left tail,
    contact, right tail, right head), ordered ascending.
    """

    def __init__(self, eos, left, right, p_star, star_left, star_right,
                 left_wave, right_wave, fans):
        self.eos = eos
        self.left = left
        self.right = right
        self.p_star = p_star
        self.star_left = star_left
        self.star_right = star_right
        self.left_wave = left_wave
        self.right_wave = right_wave
        self.vx_star = 0.5 * (star_left.v[0] + star_right.v[0])
        self.contact_speed = self.vx_star
        self.pattern = WavePattern(left_wave.kind, right_wave.kind)
        self._fans = fans
        speeds = self.wave_speeds
        if any(b - a < -1e-10 for a, b in zip(speeds, speeds[1:])):
            raise RiemannSolverError(f"wave speeds out of order: {speeds}")
        if any(abs(s) >= 1.0 for s in speeds):
            raise RiemannSolverError(f"superluminal wave speed: {speeds}")

    @property
    def wave_speeds(self):
        return (self.left_wave.head, self.left_wave.tail, self.contact_speed,
                self.right_wave.tail, self.right_wave.head)

    def __repr__(self):
        return (f"ExactSolution({self.pattern.tag}, p*={self.p_star:.6g}, "
                f"vx*={self.vx_star:.6g})")


def solve_star_state(left, right, eos):
    """Match pressure and normal velocity across the contact.

    Finds p* with vx_left(p*) = vx_right(p*) by bracketed root finding on
    [1e-14, 1e6 max(p_L, p_R)]; failure to bracket below means vacuum.
    """
    p_L = left.pressure(eos)
    p_R = right.pressure(eos)
    fans = {"left": None, "right": None}

    def vx_side(p, side):
        ahead = left if side == "left" else right
        behind, _, fan = _behind(ahead, p, side, eos, fans[side])
        if fan is not None:
            fans[side] = fan
        return behind.v[0]

    def f(p):
        return vx_side(p, "left") - vx_side(p, "right")

    lo, hi = min(p_L, p_R), max(p_L, p_R)
    if lo == hi:
        lo, hi = 0.5 * lo, 2.0 * hi
    p_max = P_CEIL_FACTOR * max(p_L, p_R)
    f_lo, f_hi = f(lo), f(hi)
    while f_hi > 0.0:
        hi *= 10.0
        if hi > p_max:
            raise RiemannSolverError(
                f"no star pressure below {p_max}: wave curves do not cross")
        f_hi = f(hi)
    while f_lo < 0.0:
        lo *= 0.1
        if lo < P_FLOOR:
            raise VacuumError(
                "states separate toward vacuum: no star pressure above "
                f"{P_FLOOR}")
        f_lo = f(lo)

    if f_lo == 0.0:
        p_star = lo
    elif f_hi == 0.0:
        p_star = hi
    else:
        p_star = brentq(f, lo, hi, rtol=_ROOT_RTOL, xtol=1e-300, maxiter=300)

    star_left, left_wave, fan_l = _behind(left, p_star, "left", eos, fans["left"])
    star_right, right_wave, fan_r = _behind(right, p_star, "right", eos, fans["right"])
    if fan_l is not None:
        fans["left"] = fan_l
    if fan_r is not None:
        fans["right"] = fan_r
    return ExactSolution(eos, left, right, p_star, star_left, star_right,
                         left_wave, right_wave, fans)


def classify_pattern(left, right, eos):
    """WavePattern of the decayed discontinuity (see class docstring for the
    tag letter order).  Equal pressures on both sides of a wave count as a
    zero-strength rarefaction, so identical inputs report RR."""
    sol = solve_star_state(left, right, eos)
    return sol.pattern


def _fan_sample(sol, side, xi):
    fan = sol._fans[side]
    ahead = sol.left if side == "left" else sol.right
    if fan is None:  # zero-strength fan: head == tail, nothing interior
        return ahead
    p_a = ahead.pressure(sol.eos)
    lo, hi = sol.p_star, p_a
    g_lo = fan.lam(lo) - xi
    g_hi = fan.lam(hi) - xi
    if g_lo == 0.0:
        return fan.state(lo)
    if g_hi == 0.0:
        return fan.state(hi)
    if g_lo * g_hi > 0.0:
        # xi outside the fan's characteristic range: clamp to the nearer edge
        # (left fans have lambda increasing toward lower p, right fans the
        # reverse, so the sign of g at each end depends on the side)
        return fan.state(lo) if abs(g_lo) < abs(g_hi) else fan.state(hi)
    p = brentq(lambda q: fan.lam(q) - xi, lo, hi, rtol=_ROOT_RTOL, xtol=1e-300)
    return fan.state(p)


def sample(sol, xi):
    """State of the solution at similarity coordinate xi = x/t (total in xi)."""
    lw, rw = sol.left_wave, sol.right_wave
    if xi <= lw.head:
        return sol.left
    if xi < lw.tail:
        return _fan_sample(sol, "left", xi)
    if xi < sol.contact_speed:
        return sol.star_left
    if xi <= rw.tail:
        return sol.star_right
    if xi < rw.head:
        return _fan_sample(sol, "right", xi)
    return sol.right


def sample_profile(sol, x, t):
    """Sample on an array of positions at time t >= 0 (t = 0: initial data).

    Returns primitive arrays as a dict with keys 'p', 'vx', 'vy', 'vz' and
    'rho' (system I) or 'n', 'eps' (system II).
    """
    x = np.asarray(x, dtype=float)
    states = []
    for xi in x:
        if t > 0.0:
            states.append(sample(sol, xi / t))
        else:
            states.append(sol.left if xi < 0.0 else sol.right)
    eos = sol.eos
    out = {
        "p": np.array([s.pressure(eos) for s in states]),
        "vx": np.array([s.v[0] for s in states]),
        "vy": np.array([s.v[1] for s in states]),
        "vz": np.array([s.v[2] for s in states]),
    }
    if eos.system == "I":
        out["rho"] = np.array([s.rho for s in states])
    else:
        out["n"] = np.array([s.n for s in states])
        out["eps"] = np.array([s.eps for s in states])
    return out
