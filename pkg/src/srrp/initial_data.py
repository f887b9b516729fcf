"""Canonical Riemann problems and corrugated-interface initial data.

Six reference problems (labels a-f) cover both equation systems and all
occurring wave patterns; the interface between the left and right states can
be corrugated by a superposition of compact cosine bumps in the (y, z)
plane, displacing the interface along x.
"""

import numpy as np

from .state import EosSpec, PrimitiveState, primitive_to_conserved

DEFAULT_BUMP_COUNT = 20
DEFAULT_AMPLITUDE_RANGE = (0.005, 0.02)
DEFAULT_RADIUS_RANGE = (0.05, 0.15)


class RiemannProblemSpec:
    """Left/right primitive states, the EOS, and an optional label."""

    def __init__(self, left, right, eos, label=None):
        self.left = left
        self.right = right
        self.eos = eos
        self.label = label

    def __repr__(self):
        return f"RiemannProblemSpec({self.label or 'custom'}, {self.eos.variant})"


_EOS_I = EosSpec.ultrarelativistic(cs2=1.0 / 3.0)
_EOS_II = EosSpec.perfect_gas(gamma=4.0 / 3.0)


def _rows():
    def I(rho, vx, vy):
        return PrimitiveState(rho=rho, v=np.array([vx, vy, 0.0]))

    def II(n, eps, vx, vy):
        return PrimitiveState(n=n, eps=eps, v=np.array([vx, vy, 0.0]))

    return {
        "a": (I(0.5, 0.2, 0.2), I(0.5, -0.2, -0.2), _EOS_I),
        "b": (I(0.5, -0.2, 0.2), I(0.5, 0.2, -0.2), _EOS_I),
        "c": (I(0.5, 0.0, 0.2), I(1.0, 0.0, -0.2), _EOS_I),
        "d": (II(1.0, 0.5, 0.2, 0.2), II(1.0, 0.5, -0.2, -0.2), _EOS_II),
        "e": (II(1.0, 0.5, -0.2, 0.2), II(1.0, 0.5, 0.2, -0.2), _EOS_II),
        "f": (II(1.0, 0.5, 0.0, 0.2), II(1.0, 1.0, 0.0, -0.2), _EOS_II),
    }


def table1_problem(label):
    """One of the six reference problems: (a)-(c) barotropic with
    cs2 = 1/3, (d)-(f) perfect gas with gamma = 4/3."""
    rows = _rows()
    if label not in rows:
        raise ValueError(f"unknown problem label {label!r}; choose from a-f")
    left, right, eos = rows[label]
    return RiemannProblemSpec(left, right, eos, label)


class PerturbationSpec:
    """Superposition of compact cosine bumps displacing the interface.

    ``bumps`` is a sequence of (amplitude, radius, y_center, z_center);
    ``seed``/ranges record how the bumps were sampled (None for explicit
    lists).  The offset field is exactly periodic in y and z as long as
    every radius is below half the shorter periodic length (enforced).
    """

    def __init__(self, bumps, seed=None, amplitude_range=None,
                 radius_range=None):
        arr = np.asarray(bumps, dtype=float).reshape(-1, 4)
        if arr.size and (arr[:, 1] <= 0).any():
            raise ValueError("bump radii must be positive")
        self.bumps = arr
        self.seed = seed
        self.amplitude_range = amplitude_range
        self.radius_range = radius_range

    def __len__(self):
        return len(self.bumps)

    @classmethod
    def none(cls):
        return cls(np.empty((0, 4)))


def sample_perturbations(seed, count=DEFAULT_BUMP_COUNT,
                         amplitude_range=DEFAULT_AMPLITUDE_RANGE,
                         radius_range=DEFAULT_RADIUS_RANGE,
                         domain=(1.0, 0.5)):
    """Draw a deterministic PerturbationSpec: per bump, amplitude, radius,
    and center (uniform over the periodic (y, z) domain), in that order."""
    L_y, L_z = domain
    if count < 0:
        raise ValueError("bump count must be >= 0")
    if not (0 < amplitude_range[0] <= amplitude_range[1]):
        raise ValueError(f"bad amplitude range {amplitude_range}")
    if not (0 < radius_range[0] <= radius_range[1]):
        raise ValueError(f"bad radius range {radius_range}")
    if radius_range[1] >= 0.5 * min(L_y, L_z):
        raise ValueError(
            f"max radius {radius_range[1]} must stay below half the shorter "
            f"periodic length {min(L_y, L_z)}")
    rng = np.random.default_rng(seed)
    bumps = np.empty((count, 4))
    for i in range(count):
        bumps[i, 0] = rng.uniform(*amplitude_range)
        bumps[i, 1] = rng.uniform(*radius_range)
        bumps[i, 2] = rng.uniform(0.0, L_y)
        bumps[i, 3] = rng.uniform(0.0, L_z)
    return PerturbationSpec(bumps, seed=seed, amplitude_range=amplitude_range,
                            radius_range=radius_range)


def corrugation_offset(pert, y, z, domain):
    """x-displacement of the interface at (y, z): sum over bumps of
    A cos(pi r / 2R) for r <= R, with r the nearest periodic-image distance
    from the bump center in the (y, z) plane."""
    L_y, L_z = domain
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    out = np.zeros(np.broadcast(y, z).shape)
    for amp, rad, ybar, zbar in pert.bumps:
        dy = np.remainder(y - ybar + 0.5 * L_y, L_y) - 0.5 * L_y
        dz = np.remainder(z - zbar + 0.5 * L_z, L_z) - 0.5 * L_z
        r = np.hypot(dy, dz)
        out += np.where(r <= rad, amp * np.cos(0.5 * np.pi * r / rad), 0.0)
    return out


def initialize_grid(problem, pert, geometry, dim=3, boundaries=None):
    """Conserved-variable grid for a (possibly corrugated) Riemann problem.

    Every cell whose center satisfies x < offset(y, z) gets the left state,
    the rest the right state; dim=1 ignores perturbations (planar split at
    x = 0).  Ghost zones are filled from the grid's boundary rules.
    """
    from .evolution import GridField

    eos = problem.eos
    U_L = primitive_to_conserved(problem.left, eos).components
    U_R = primitive_to_conserved(problem.right, eos).components
    x = geometry.centers("x")
    y = geometry.centers("y")
    z = geometry.centers("z")
    if dim == 1 or pert is None or len(pert) == 0:
        offset = np.zeros((z.size, y.size))
    else:
        offset = corrugation_offset(pert, y[None, :], z[:, None],
                                    (geometry.length("y"), geometry.length("z")))
    left_mask = x[None, None, :] < offset[:, :, None]  # (z, y, x)
    interior = np.where(left_mask[None, :, :, :],
                        np.asarray(U_L)[:, None, None, None],
                        np.asarray(U_R)[:, None, None, None])
    field = GridField.from_interior(interior, geometry, eos,
                                    boundaries=boundaries)
    field.apply_boundaries()
    return field
