"""Fluid states, equations of state, and conversions between variable sets.

Two conservative systems are supported:

* system I  -- ultrarelativistic fluid with p = cs2 * rho; the conserved
  vector has 4 components (E, m_x, m_y, m_z).
* system II -- perfect gas with p = (gamma - 1) * n * eps; the conserved
  vector has 5 components (E, m_x, m_y, m_z, D).

Here E is the conserved energy density, m_i the momentum density, and D
the conserved rest-mass density n*W.  All velocities are fractions of the
speed of light.
"""

import numpy as np

FLOOR = 1e-14
NEWTON_TOL = 1e-13
NEWTON_MAXIT = 50

_AXES = {"x": 0, "y": 1, "z": 2, 0: 0, 1: 1, 2: 2}


class SuperluminalError(ValueError):
    """Velocity magnitude at or above the speed of light."""


class RecoveryError(RuntimeError):
    """Conserved state could not be converted back to primitives."""

    def __init__(self, msg, cell=None):
        super().__init__(msg + (f" at cell {cell}" if cell is not None else ""))
        self.cell = cell


class EosSpec:
    """Equation-of-state parameters for one of the two systems."""

    def __init__(self, variant, cs2=None, gamma=None):
        if variant == "ultrarelativistic":
            if cs2 is None or not 0.0 < cs2 < 1.0:
                raise ValueError(f"cs2 must lie in (0, 1), got {cs2}")
            self.cs2 = float(cs2)
            self.gamma = None
        elif variant == "perfect_gas":
            if gamma is None or not 1.0 < gamma <= 2.0:
                raise ValueError(f"gamma must lie in (1, 2], got {gamma}")
            self.gamma = float(gamma)
            self.cs2 = None
        else:
            raise ValueError(f"unknown EOS variant {variant!r}")
        self.variant = variant

    @classmethod
    def ultrarelativistic(cls, cs2):
        return cls("ultrarelativistic", cs2=cs2)

    @classmethod
    def perfect_gas(cls, gamma):
        return cls("perfect_gas", gamma=gamma)

    @property
    def system(self):
        return "I" if self.variant == "ultrarelativistic" else "II"

    @property
    def ncomp(self):
        return 4 if self.system == "I" else 5

    @property
    def param(self):
        """The single scalar parameter (cs2 or gamma)."""
        return self.cs2 if self.system == "I" else self.gamma

    def __repr__(self):
        if self.system == "I":
            return f"EosSpec.ultrarelativistic(cs2={self.cs2})"
        return f"EosSpec.perfect_gas(gamma={self.gamma})"

    def __eq__(self, other):
        return (isinstance(other, EosSpec) and self.variant == other.variant
                and self.param == other.param)


class PrimitiveState:
    """Physical variables of a fluid element.

    System I states carry an energy density ``rho``; system II states carry
    a rest-mass density ``n`` and specific internal energy ``eps``.  Both
    carry a 3-velocity ``v``.
    """

    def __init__(self, rho=None, n=None, eps=None, v=(0.0, 0.0, 0.0)):
        if rho is not None:
            if n is not None or eps is not None:
                raise ValueError("give either rho (system I) or n, eps (system II)")
            if rho <= 0:
                raise ValueError(f"rho must be positive, got {rho}")
            self.system = "I"
            self.rho = float(rho)
            self.n = None
            self.eps = None
        else:
            if n is None or eps is None:
                raise ValueError("system II states need both n and eps")
            if n <= 0:
                raise ValueError(f"n must be positive, got {n}")
            if eps < 0:
                raise ValueError(f"eps must be non-negative, got {eps}")
            self.system = "II"
            self.rho = None
            self.n = float(n)
            self.eps = float(eps)
        self.v = np.asarray(v, dtype=float)
        if self.v.shape != (3,):
            raise ValueError("v must have three components")
        if self.v @ self.v >= 1.0:
            raise SuperluminalError(f"|v|^2 = {self.v @ self.v} >= 1")

    @property
    def W(self):
        return lorentz_factor(self.v)

    def pressure(self, eos):
        return pressure(self, eos)

    def enthalpy(self, eos):
        return enthalpy(self, eos)

    def replace(self, **kw):
        base = {"v": self.v.copy()}
        if self.system == "I":
            base["rho"] = self.rho
        else:
            base["n"] = self.n
            base["eps"] = self.eps
        base.update(kw)
        return PrimitiveState(**base)

    def __repr__(self):
        v = tuple(round(c, 10) for c in self.v)
        if self.system == "I":
            return f"PrimitiveState(rho={self.rho}, v={v})"
        return f"PrimitiveState(n={self.n}, eps={self.eps}, v={v})"


class ConservedState:
    """Vector of conserved variables with its system tag."""

    def __init__(self, components, system):
        self.components = np.asarray(components, dtype=float)
        if system not in ("I", "II"):
            raise ValueError(f"unknown system {system!r}")
        want = 4 if system == "I" else 5
        if self.components.shape != (want,):
            raise ValueError(f"system {system} needs {want} components")
        self.system = system

    def __getitem__(self, i):
        return self.components[i]

    def __len__(self):
        return len(self.components)

    def __array__(self, dtype=None, copy=None):
        arr = self.components
        if dtype is not None:
            arr = arr.astype(dtype, copy=False)
        return np.array(arr, copy=True) if copy else arr

    def __repr__(self):
        return f"ConservedState({list(self.components)}, system={self.system!r})"


class FluxVector:
    """Flux of the conserved variables through planes normal to one axis."""

    def __init__(self, components, direction):
        self.components = np.asarray(components, dtype=float)
        if direction not in ("x", "y", "z"):
            raise ValueError(f"direction must be x, y or z, got {direction!r}")
        self.direction = direction

    def __getitem__(self, i):
        return self.components[i]

    def __len__(self):
        return len(self.components)

    def __array__(self, dtype=None, copy=None):
        arr = self.components
        if dtype is not None:
            arr = arr.astype(dtype, copy=False)
        return np.array(arr, copy=True) if copy else arr

    def __repr__(self):
        return f"FluxVector({list(self.components)}, direction={self.direction!r})"


def axis_index(direction):
    """Map 'x'/'y'/'z' (or 0/1/2) to the axis index 0/1/2."""
    try:
        return _AXES[direction]
    except KeyError:
        raise ValueError(f"direction must be x, y or z, got {direction!r}") from None


def lorentz_factor(v):
    """W = 1/sqrt(1 - v.v); raises SuperluminalError for |v| >= 1."""
    v = np.asarray(v, dtype=float)
    v2 = v @ v
    if v2 >= 1.0:
        raise SuperluminalError(f"|v|^2 = {v2} >= 1")
    return 1.0 / np.sqrt(1.0 - v2)


def pressure(prim, eos):
    if eos.system != prim.system:
        raise ValueError("EOS and state belong to different systems")
    if prim.system == "I":
        return eos.cs2 * prim.rho
    return (eos.gamma - 1.0) * prim.n * prim.eps


def enthalpy(prim, eos):
    """Specific enthalpy h = 1 + eps + p/n (system II only)."""
    if prim.system != "II":
        raise ValueError("specific enthalpy is defined for system II states")
    return 1.0 + prim.eps + pressure(prim, eos) / prim.n


def sound_speed(prim, eos):
    """Local sound speed; constant sqrt(cs2) for system I, sqrt(gamma*p/(n*h)) for II."""
    if prim.system == "I":
        return np.sqrt(eos.cs2)
    p = pressure(prim, eos)
    return np.sqrt(eos.gamma * p / (prim.n * enthalpy(prim, eos)))


def primitive_to_conserved(prim, eos):
    p = pressure(prim, eos)
    W2 = 1.0 / (1.0 - prim.v @ prim.v)
    if prim.system == "I":
        wW2 = (prim.rho + p) * W2
        comp = np.empty(4)
        comp[0] = wW2 - p
        comp[1:4] = wW2 * prim.v
        return ConservedState(comp, "I")
    h = enthalpy(prim, eos)
    nhW2 = prim.n * h * W2
    comp = np.empty(5)
    comp[0] = nhW2 - p
    comp[1:4] = nhW2 * prim.v
    comp[4] = prim.n * np.sqrt(W2)
    return ConservedState(comp, "II")


def physical_flux(prim, eos, direction):
    """Flux vector F^d of the conserved variables for one coordinate direction."""
    d = axis_index(direction)
    p = pressure(prim, eos)
    W2 = 1.0 / (1.0 - prim.v @ prim.v)
    vd = prim.v[d]
    if prim.system == "I":
        wW2 = (prim.rho + p) * W2
        comp = np.empty(4)
        comp[0] = wW2 * vd
        comp[1:4] = wW2 * vd * prim.v
        comp[1 + d] += p
        return FluxVector(comp, "xyz"[d])
    h = enthalpy(prim, eos)
    nhW2 = prim.n * h * W2
    comp = np.empty(5)
    comp[0] = nhW2 * vd
    comp[1:4] = nhW2 * vd * prim.v
    comp[1 + d] += p
    comp[4] = prim.n * np.sqrt(W2) * vd
    return FluxVector(comp, "xyz"[d])


def conserved_deficit(U, eos):
    """Margin E - |m| (>0 required for recoverability)."""
    c = np.asarray(U)
    return c[0] - np.sqrt(c[1] ** 2 + c[2] ** 2 + c[3] ** 2)


def _recover_I(comp, cs2):
    E = comp[0]
    m = comp[1:4]
    m2 = m @ m
    if not np.isfinite(E) or E <= 0.0:
        raise RecoveryError(f"non-positive conserved energy {E}")
    disc = (1.0 - cs2) ** 2 * E * E + 4.0 * cs2 * (E * E - m2)
    if disc < 0.0 or m2 >= E * E:
        raise RecoveryError(f"momentum magnitude {np.sqrt(m2)} exceeds energy {E}")
    p = 0.5 * (-(1.0 - cs2) * E + np.sqrt(disc))
    floored = False
    if p < FLOOR:
        p = FLOOR
        floored = True
    v = m / (E + p)
    rho = p / cs2
    info = {"iterations": 0, "floored": floored}
    return PrimitiveState(rho=rho, v=v), info


def _recover_II(comp, gamma, p0=None):
    E = comp[0]
    m = comp[1:4]
    D = comp[4]
    m1 = np.sqrt(m @ m)
    if not np.isfinite(E) or E <= 0.0:
        raise RecoveryError(f"non-positive conserved energy {E}")
    if D <= 0.0:
        raise RecoveryError(f"non-positive conserved rest-mass density {D}")
    if m1 >= E:
        raise RecoveryError(f"momentum magnitude {m1} exceeds energy {E}")
    p = p0 if p0 is not None and p0 > 0.0 else max(1e-10, (gamma - 1.0) * (E - m1 - D))
    converged = False
    it = 0
    for it in range(1, NEWTON_MAXIT + 1):
        Ep = E + p
        v2 = (m1 / Ep) ** 2
        W2 = 1.0 / (1.0 - v2)
        W = np.sqrt(W2)
        n = D / W
        eps = Ep / (D * W) - 1.0 - p * W / D
        f = (gamma - 1.0) * n * eps - p
        df = (gamma - 1.0) * v2 * W2 * (n * eps + p) / Ep - 1.0
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
        raise RecoveryError(f"pressure iteration did not converge (last p={p})")
    floored = False
    if p < FLOOR:
        p = FLOOR
        floored = True
    v = m / (E + p)
    v2 = v @ v
    if v2 >= 1.0:
        raise RecoveryError(f"recovered superluminal velocity |v|^2={v2}")
    n = D * np.sqrt(1.0 - v2)
    if n < FLOOR:
        n = FLOOR
        floored = True
    eps = p / ((gamma - 1.0) * n)
    info = {"iterations": it, "floored": floored}
    return PrimitiveState(n=n, eps=eps, v=v), info


def recover_primitive(U, eos, guess=None, return_info=False):
    """Invert primitive_to_conserved.

    System I uses the closed-form positive root of the pressure quadratic;
    system II iterates Newton steps on the pressure until |dp/p| < 1e-13.
    An optional ``guess`` primitive seeds the iteration.  Pressure and
    densities are floored at 1e-14; the ``floored`` flag in the info dict
    reports when that happened.
    """
    comp = np.asarray(U, dtype=float)
    system = U.system if isinstance(U, ConservedState) else eos.system
    if system != eos.system:
        raise ValueError("EOS and conserved state belong to different systems")
    if comp.shape != (eos.ncomp,):
        raise ValueError(f"system {system} needs {eos.ncomp} components")
    if system == "I":
        prim, info = _recover_I(comp, eos.cs2)
    else:
        p0 = guess.pressure(eos) if guess is not None else None
        prim, info = _recover_II(comp, eos.gamma, p0)
    if return_info:
        return prim, info
    return prim
