"""Method-of-lines finite-volume evolution on a 3D Cartesian grid.

The grid stores cell-averaged conserved components in a ghosted array of
shape (ncomp, nz + 2g, ny + 2g, nx + 2g) with ghost width 2 per used axis
(0 for singleton axes).  The RHS is dimensionally unsplit: one fused sweep
per active axis (see `kernels`) accumulates -dF/dx - dF/dy - dF/dz, and
RK2 (midpoint) or classical RK4 advances the state with ghost zones
refilled before every stage.

All floating-point paths are deterministic and independent of the numba
thread count: sweeps write disjoint cells, counter reductions and
eigenvalue maxima are taken with fixed operand order.
"""

import time as _time

import numpy as np

from .state import RecoveryError

# `kernels` (and with it numba) is imported lazily on first use so that
# pure-container work and light CLI paths avoid the JIT machinery.

GHOST = 2

_AXIS_NAMES = {"x": 0, "y": 1, "z": 2, 0: 0, 1: 1, 2: 2}
#: array axis (in z,y,x-ordered storage) holding coordinate axis 0/1/2
_ARRAY_AXIS = {0: 3, 1: 2, 2: 1}


def _axis(axis):
    try:
        return _AXIS_NAMES[axis]
    except KeyError:
        raise ValueError(f"axis must be x, y or z, got {axis!r}") from None


class BoundarySpec:
    """Per-axis boundary conditions; periodic faces must be paired.

    Each axis takes either a single kind ("outflow"/"periodic") applied to
    both faces or a (low, high) pair; a periodic face without a periodic
    partner is rejected.
    """

    KINDS = ("outflow", "periodic")

    def __init__(self, x="outflow", y="periodic", z="periodic"):
        self.x = self._normalize("x", x)
        self.y = self._normalize("y", y)
        self.z = self._normalize("z", z)

    @staticmethod
    def _normalize(name, value):
        pair = (value, value) if isinstance(value, str) else tuple(value)
        if len(pair) != 2 or any(k not in BoundarySpec.KINDS for k in pair):
            raise ValueError(f"invalid boundary spec for {name}: {value!r}")
        if ("periodic" in pair) and pair != ("periodic", "periodic"):
            raise ValueError(f"periodic boundaries on {name} must be paired")
        return pair

    @classmethod
    def default(cls):
        """Outflow in x, periodic in y and z."""
        return cls()

    def kind(self, axis):
        """The single per-axis kind (pairs are homogeneous by construction)."""
        return (self.x, self.y, self.z)[_axis(axis)][0]

    def bc_code(self, axis):
        from . import kernels
        return (kernels.BC_PERIODIC if self.kind(axis) == "periodic"
                else kernels.BC_OUTFLOW)

    def __repr__(self):
        return f"BoundarySpec(x={self.x}, y={self.y}, z={self.z})"

    def __eq__(self, other):
        return (isinstance(other, BoundarySpec)
                and (self.x, self.y, self.z) == (other.x, other.y, other.z))


class GridGeometry:
    """Uniform Cartesian cell layout: counts, extents, spacings, ghosts."""

    def __init__(self, shape, extents):
        self.shape = tuple(int(n) for n in shape)
        if len(self.shape) != 3 or any(n < 1 for n in self.shape):
            raise ValueError(f"shape must be three counts >= 1, got {shape}")
        self.extents = tuple((float(lo), float(hi)) for lo, hi in extents)
        if len(self.extents) != 3 or any(hi <= lo for lo, hi in self.extents):
            raise ValueError(f"extents must be three increasing pairs, got {extents}")

    @property
    def nx(self):
        return self.shape[0]

    @property
    def ny(self):
        return self.shape[1]

    @property
    def nz(self):
        return self.shape[2]

    def length(self, axis):
        lo, hi = self.extents[_axis(axis)]
        return hi - lo

    def spacing(self, axis):
        d = _axis(axis)
        return self.length(d) / self.shape[d]

    def centers(self, axis):
        d = _axis(axis)
        lo, _ = self.extents[d]
        h = self.spacing(d)
        return lo + h * (np.arange(self.shape[d]) + 0.5)

    def ghost(self, axis):
        return 0 if self.shape[_axis(axis)] == 1 else GHOST

    @property
    def active_axes(self):
        """Coordinate axes with more than one cell."""
        return [d for d in range(3) if self.shape[d] > 1]

    @property
    def cell_volume(self):
        return self.spacing(0) * self.spacing(1) * self.spacing(2)

    def interior_shape(self, ncomp):
        return (ncomp, self.nz, self.ny, self.nx)

    def ghosted_shape(self, ncomp):
        gx, gy, gz = (self.ghost(d) for d in range(3))
        return (ncomp, self.nz + 2 * gz, self.ny + 2 * gy, self.nx + 2 * gx)

    def interior_slices(self):
        gx, gy, gz = (self.ghost(d) for d in range(3))
        return (slice(None), slice(gz, gz + self.nz),
                slice(gy, gy + self.ny), slice(gx, gx + self.nx))

    def __eq__(self, other):
        return (isinstance(other, GridGeometry) and self.shape == other.shape
                and self.extents == other.extents)

    def __repr__(self):
        return f"GridGeometry(shape={self.shape}, extents={self.extents})"


class GridField:
    """Ghosted conserved-variable storage plus time/step/EOS metadata."""

    def __init__(self, data, geometry, eos, t=0.0, step=0, boundaries=None):
        self.geometry = geometry
        self.eos = eos
        want = geometry.ghosted_shape(eos.ncomp)
        data = np.asarray(data, dtype=float)
        if data.shape != want:
            raise ValueError(f"data shape {data.shape} != ghosted {want}")
        self.data = data
        self.t = float(t)
        self.step = int(step)
        self.boundaries = boundaries if boundaries is not None \
            else BoundarySpec.default()
        self._prims = None

    @classmethod
    def from_interior(cls, interior, geometry, eos, t=0.0, step=0,
                      boundaries=None):
        interior = np.asarray(interior, dtype=float)
        if interior.shape != geometry.interior_shape(eos.ncomp):
            raise ValueError(
                f"interior shape {interior.shape} != "
                f"{geometry.interior_shape(eos.ncomp)}")
        field = cls(np.zeros(geometry.ghosted_shape(eos.ncomp)), geometry,
                    eos, t=t, step=step, boundaries=boundaries)
        field.interior[...] = interior
        field.apply_boundaries()
        return field

    @property
    def interior(self):
        return self.data[self.geometry.interior_slices()]

    def advanced(self, interior, t, step=None):
        """New field with the given interior, refreshed ghosts, same setup."""
        return GridField.from_interior(
            interior, self.geometry, self.eos, t=t,
            step=self.step if step is None else step,
            boundaries=self.boundaries)

    def copy(self):
        return GridField(self.data.copy(), self.geometry, self.eos,
                         t=self.t, step=self.step, boundaries=self.boundaries)

    def apply_boundaries(self):
        """Fill ghost layers: outflow copies the edge cell, periodic wraps.

        Axes are processed x, y, z over full slabs of the already-processed
        axes, so ghost corners end up consistent.
        """
        geom = self.geometry
        for d in (0, 1, 2):
            g = geom.ghost(d)
            if g == 0:
                continue
            ax = _ARRAY_AXIS[d]
            n = geom.shape[d]
            kind = self.boundaries.kind(d)
            lo_ghost = [slice(None)] * 4
            hi_ghost = [slice(None)] * 4
            lo_ghost[ax] = slice(0, g)
            hi_ghost[ax] = slice(n + g, n + 2 * g)
            src_lo = [slice(None)] * 4
            src_hi = [slice(None)] * 4
            if kind == "periodic":
                src_lo[ax] = slice(n, n + g)
                src_hi[ax] = slice(g, 2 * g)
                self.data[tuple(lo_ghost)] = self.data[tuple(src_lo)]
                self.data[tuple(hi_ghost)] = self.data[tuple(src_hi)]
            else:
                src_lo[ax] = slice(g, g + 1)
                src_hi[ax] = slice(n + g - 1, n + g)
                self.data[tuple(lo_ghost)] = self.data[tuple(src_lo)]
                self.data[tuple(hi_ghost)] = self.data[tuple(src_hi)]
        self._prims = None

    def recover_primitives(self):
        """Per-cell primitives of the interior as a dict of arrays.

        System I keys: rho, v, p; system II keys: n, eps, v, p.  Also
        flags (0 ok / 1 floored / 2 failed) and floors (count).  Raises
        RecoveryError if any cell failed.  Cached until the data changes.
        """
        if self._prims is not None:
            return self._prims
        from . import kernels
        geom = self.geometry
        u = self.interior
        flags = np.empty((geom.nz, geom.ny, geom.nx), dtype=np.int8)
        if self.eos.system == "I":
            out = np.empty((5, geom.nz, geom.ny, geom.nx))
            kernels.recover_grid_I(u, self.eos.cs2, out, flags)
            prims = {"rho": out[0], "v": out[1:4], "p": out[4]}
        else:
            out = np.empty((6, geom.nz, geom.ny, geom.nx))
            kernels.recover_grid_II(u, self.eos.gamma, out, flags)
            prims = {"n": out[0], "eps": out[1], "v": out[2:5], "p": out[5]}
        if (flags == 2).any():
            iz, iy, ix = (int(idx[0]) for idx in np.nonzero(flags == 2))
            raise RecoveryError("primitive recovery failed",
                                cell=(ix, iy, iz))
        prims["flags"] = flags
        prims["floors"] = int((flags == 1).sum())
        self._prims = prims
        return prims


class SweepStats:
    """Fallback/floor counters accumulated over sweeps and steps."""

    def __init__(self, rhs_evals=0, pc_fallbacks=0, hlle_fallbacks=0,
                 floors=0):
        self.rhs_evals = rhs_evals
        self.pc_fallbacks = pc_fallbacks
        self.hlle_fallbacks = hlle_fallbacks
        self.floors = floors

    def merge(self, other):
        if other is None:
            return self
        self.rhs_evals += other.rhs_evals
        self.pc_fallbacks += other.pc_fallbacks
        self.hlle_fallbacks += other.hlle_fallbacks
        self.floors += other.floors
        return self

    def as_dict(self):
        return {"rhs_evals": self.rhs_evals,
                "pc_fallbacks": self.pc_fallbacks,
                "hlle_fallbacks": self.hlle_fallbacks,
                "floors": self.floors}

    def __repr__(self):
        return f"SweepStats({self.as_dict()})"


def _pencil_cell(axis, geom, pid, face):
    """Interior (ix, iy, iz) of the cell left of the failing face."""
    i = max(face - 1, 0)
    if axis == 0:
        iz, iy = divmod(pid, geom.ny)
        return (i, iy, iz)
    if axis == 1:
        iz, ix = divmod(pid, geom.nx)
        return (ix, i, iz)
    iy, ix = divmod(pid, geom.nx)
    return (ix, iy, i)


def mol_rhs(field, flux_kind="marquina", reconstruction=True):
    """(dU/dt, SweepStats) from one unsplit finite-volume evaluation.

    Each interface flux is computed once per sweep and differenced into
    both adjacent cells; an unrecoverable face state after the
    piecewise-constant fallback raises RecoveryError with coordinates.
    """
    from . import kernels
    if flux_kind not in ("marquina", "hlle"):
        raise ValueError(f"flux_kind must be marquina or hlle, got {flux_kind!r}")
    fk = (kernels.FLUX_MARQUINA if flux_kind == "marquina"
          else kernels.FLUX_HLLE)
    recon = 1 if reconstruction else 0
    geom = field.geometry
    u = field.interior
    rhs = np.zeros(geom.interior_shape(field.eos.ncomp))
    stats = SweepStats(rhs_evals=1)
    sweep = kernels.sweep_I if field.eos.system == "I" else kernels.sweep_II
    for axis in geom.active_axes:
        n_pencils = {0: geom.nz * geom.ny, 1: geom.nz * geom.nx,
                     2: geom.ny * geom.nx}[axis]
        counters = np.zeros((n_pencils, 4), dtype=np.int64)
        sweep(u, axis, field.boundaries.bc_code(axis), geom.spacing(axis),
              field.eos.param, recon, fk, rhs, counters)
        errs = counters[:, kernels.C_ERR]
        if errs.any():
            pid = int(np.nonzero(errs)[0][0])
            cell = _pencil_cell(axis, geom, pid, int(errs[pid]) - 1)
            raise RecoveryError(
                f"face state unrecoverable in {'xyz'[axis]} sweep", cell=cell)
        stats.pc_fallbacks += int(counters[:, kernels.C_PC].sum())
        stats.hlle_fallbacks += int(counters[:, kernels.C_HLLE].sum())
        stats.floors += int(counters[:, kernels.C_FLOOR].sum())
    return rhs, stats


def _call_rhs(rhs_fn, field):
    res = rhs_fn(field)
    if isinstance(res, tuple):
        return res
    return res, None


def rk_step(field, dt, order=2, flux_kind="marquina", rhs_fn=None,
            reconstruction=True):
    """One Runge-Kutta step; returns (new GridField, SweepStats).

    order 2: midpoint rule  U' = U + dt L(U + dt/2 L(U));
    order 4: classical RK4  U' = U + dt (k1 + 2 k2 + 2 k3 + k4)/6.
    Ghost zones are refilled before every stage evaluation.
    """
    if order not in (2, 4):
        raise ValueError(f"rk order must be 2 or 4, got {order}")
    if rhs_fn is None:
        def rhs_fn(f):
            return mol_rhs(f, flux_kind=flux_kind,
                           reconstruction=reconstruction)
    stats = SweepStats()
    u0 = field.interior.copy()
    t0 = field.t
    k1, s = _call_rhs(rhs_fn, field)
    stats.merge(s)
    if order == 2:
        mid = field.advanced(u0 + 0.5 * dt * k1, t0 + 0.5 * dt)
        k2, s = _call_rhs(rhs_fn, mid)
        stats.merge(s)
        new = field.advanced(u0 + dt * k2, t0 + dt, step=field.step + 1)
        return new, stats
    s1 = field.advanced(u0 + 0.5 * dt * k1, t0 + 0.5 * dt)
    k2, s = _call_rhs(rhs_fn, s1)
    stats.merge(s)
    s2 = field.advanced(u0 + 0.5 * dt * k2, t0 + 0.5 * dt)
    k3, s = _call_rhs(rhs_fn, s2)
    stats.merge(s)
    s3 = field.advanced(u0 + dt * k3, t0 + dt)
    k4, s = _call_rhs(rhs_fn, s3)
    stats.merge(s)
    new = field.advanced(u0 + dt * ((k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0),
                         t0 + dt, step=field.step + 1)
    return new, stats


def max_signal_speeds(field):
    """Per-coordinate-axis maximum |lambda| over interior cells."""
    prims = field.recover_primitives()
    v = prims["v"]
    v2 = v[0] ** 2 + v[1] ** 2 + v[2] ** 2
    if field.eos.system == "I":
        cs2 = field.eos.cs2
    else:
        h = 1.0 + prims["eps"] + prims["p"] / prims["n"]
        cs2 = field.eos.gamma * prims["p"] / (prims["n"] * h)
    W2 = 1.0 / (1.0 - v2)
    out = np.empty(3)
    for d in range(3):
        vd = v[d]
        A = np.sqrt(cs2 / (cs2 + W2 * (1.0 - vd * vd) * (1.0 - cs2)))
        lam_p = (vd + A) / (1.0 + vd * A)
        lam_m = (vd - A) / (1.0 - vd * A)
        out[d] = max(np.abs(lam_p).max(), np.abs(lam_m).max())
    if not np.isfinite(out).all():
        raise ValueError(f"non-finite signal speeds {out}")
    return out


def compute_timestep(field, cfl=None):
    """dt = cfl * min over active axes of spacing / max |lambda|.

    Default cfl: 0.5 when only one axis is active, else 0.25.
    """
    geom = field.geometry
    active = geom.active_axes
    if not active:
        raise ValueError("grid has no axis with more than one cell")
    if cfl is None:
        cfl = 0.5 if len(active) <= 1 else 0.25
    if not 0.0 < cfl < 1.0:
        raise ValueError(f"cfl must lie in (0, 1), got {cfl}")
    speeds = max_signal_speeds(field)
    dt = min(geom.spacing(d) / speeds[d] for d in active)
    return cfl * dt


class Observer:
    """Callback fired at configured times and/or every k-th step.

    ``fn(field)`` runs on the driver thread.  With ``times``, the driver
    clips steps to land exactly on each time; with ``every``, fires at
    step 0, every ``every``-th step, and the final step.  With neither,
    fires every step (including step 0 and the final state).
    """

    def __init__(self, fn, times=None, every=None):
        self.fn = fn
        self.times = None if times is None else sorted(float(t) for t in times)
        if every is not None and every < 1:
            raise ValueError(f"every must be >= 1, got {every}")
        self.every = every
        self._idx = 0

    def next_time(self):
        if self.times is None or self._idx >= len(self.times):
            return None
        return self.times[self._idx]

    def notify(self, field, final=False):
        fired = False
        while self.times is not None and self._idx < len(self.times) \
                and field.t >= self.times[self._idx] - 1e-10:
            self._idx += 1
            fired = True
        if self.times is None and self.every is None:
            fired = True
        if self.every is not None and (field.step % self.every == 0 or final):
            fired = True
        if fired:
            self.fn(field)


class EvolveStats(SweepStats):
    """SweepStats plus step count, wall time, and early-stop reason."""

    def __init__(self):
        super().__init__()
        self.steps = 0
        self.wall_time = 0.0
        self.stopped_early = None

    def as_dict(self):
        d = super().as_dict()
        d.update(steps=self.steps, wall_time=self.wall_time,
                 stopped_early=self.stopped_early)
        return d


def evolve(field, t_end, cfl=None, order=2, flux_kind="marquina",
           reconstruction=True, observers=(), wall_budget=None,
           rhs_fn=None):
    """Advance to t_end; returns (final GridField, EvolveStats).

    Steps are clipped to land exactly on observer times and on t_end.
    If wall_budget (seconds) is exceeded the run stops early with
    ``stats.stopped_early = "wall_budget"`` so the caller can checkpoint.
    """
    t_end = float(t_end)
    if t_end < field.t:
        raise ValueError(f"t_end {t_end} is before current time {field.t}")
    stats = EvolveStats()
    start = _time.perf_counter()
    eps = 1e-12 * max(1.0, abs(t_end))
    for obs in observers:
        obs.notify(field)
    while field.t < t_end - eps:
        dt = compute_timestep(field, cfl)
        stop = t_end
        for obs in observers:
            nt = obs.next_time()
            if nt is not None and field.t + eps < nt < stop:
                stop = nt
        dt = min(dt, stop - field.t)
        field, s = rk_step(field, dt, order=order, flux_kind=flux_kind,
                           rhs_fn=rhs_fn, reconstruction=reconstruction)
        stats.merge(s)
        stats.steps += 1
        final = field.t >= t_end - eps
        for obs in observers:
            obs.notify(field, final=final)
        if wall_budget is not None \
                and _time.perf_counter() - start > wall_budget:
            stats.stopped_early = "wall_budget"
            break
    stats.wall_time = _time.perf_counter() - start
    return field, stats
