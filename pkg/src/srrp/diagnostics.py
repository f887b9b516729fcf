"""Run diagnostics: perturbation norms, reference profiles, front tracking.

Everything is computed from the conserved energy e = U[0], cell-volume
weighted so values are comparable across resolutions:

    L1 = sum |de| dV,   L2 = sqrt(sum de^2 dV),   Linf = max |de|.

The unperturbed reference for a corrugated run is the matching planar
problem, either sampled from the exact solution at x/t or evolved with the
same 1D scheme and broadcast along y and z.  Front positions are extracted
per (y, z) column as the half-height threshold crossing of e, scanning
inward from the undisturbed domain end.
"""

import warnings

import numpy as np

from .exact_riemann import (
    RiemannSolverError,
    VacuumError,
    sample_profile,
    solve_star_state,
)
from .evolution import GridGeometry, evolve
from .initial_data import initialize_grid


class NormTriple:
    """Volume-weighted L1/L2/Linf norms of a perturbation at one time."""

    def __init__(self, t, L1, L2, Linf):
        self.t = float(t)
        self.L1 = float(L1)
        self.L2 = float(L2)
        self.Linf = float(Linf)

    def __iter__(self):
        return iter((self.t, self.L1, self.L2, self.Linf))

    def __repr__(self):
        return (f"NormTriple(t={self.t}, L1={self.L1}, "
                f"L2={self.L2}, Linf={self.Linf})")


class FrontProfile:
    """Per-column front positions of one wave plus flatness statistics.

    ``positions`` has shape (nz, ny); columns without a threshold crossing
    hold NaN and are excluded from ``amplitude`` (max - min) and ``std``,
    their count is ``missing``.
    """

    def __init__(self, wave, positions, missing, amplitude, std):
        self.wave = wave
        self.positions = positions
        self.missing = int(missing)
        self.amplitude = float(amplitude)
        self.std = float(std)

    def __repr__(self):
        return (f"FrontProfile(wave={self.wave!r}, amplitude={self.amplitude},"
                f" std={self.std}, missing={self.missing})")


def conserved_energy_field(field):
    """Conserved energy e per interior cell, shape (nz, ny, nx)."""
    return field.interior[0].copy()


def perturbation_norms(field, reference, t=None):
    """NormTriple of e(field) - reference over the interior cells.

    ``reference`` is a scalar energy field broadcastable to (nz, ny, nx);
    ``t`` defaults to the field's time.
    """
    e = field.interior[0]
    ref = np.asarray(reference, dtype=float)
    try:
        ref = np.broadcast_to(ref, e.shape)
    except ValueError:
        raise ValueError(f"reference shape {ref.shape} does not match "
                         f"grid {e.shape}") from None
    d = np.abs(e - ref)
    dV = field.geometry.cell_volume
    return NormTriple(field.t if t is None else t,
                      d.sum() * dV, np.sqrt((d * d).sum() * dV), d.max())


def profile_energy(prof, eos):
    """Conserved energy of primitive arrays as sampled from a solution."""
    v2 = prof["vx"] ** 2 + prof["vy"] ** 2 + prof["vz"] ** 2
    W2 = 1.0 / (1.0 - v2)
    p = prof["p"]
    if eos.system == "I":
        return (prof["rho"] + p) * W2 - p
    n = prof["n"]
    h = 1.0 + prof["eps"] + p / n
    return n * h * W2 - p


def _geometry_1d(geometry):
    return GridGeometry((geometry.nx, 1, 1), geometry.extents)


def _broadcast_profile(e_1d, geometry):
    return np.broadcast_to(
        e_1d[None, None, :], (geometry.nz, geometry.ny, geometry.nx)).copy()


def unperturbed_reference(problem, t, geometry, method="numerical1d",
                          cfl=None, order=2, flux_kind="marquina"):
    """Planar-run energy field e(x) at time t, broadcast along y and z.

    ``exact`` samples the exact solution at x/t (sharp split at t = 0);
    ``numerical1d`` evolves the planar problem at the same x-resolution
    with the same scheme.  An exact-solver failure falls back to
    numerical1d with a warning.
    """
    if method not in ("exact", "numerical1d"):
        raise ValueError(f"method must be exact or numerical1d, got {method!r}")
    if t < 0:
        raise ValueError(f"reference time must be >= 0, got {t}")
    x = geometry.centers("x")
    if method == "exact":
        if t == 0:
            eL = _energy_from_point(problem.left, problem.eos)
            eR = _energy_from_point(problem.right, problem.eos)
            return _broadcast_profile(np.where(x < 0, eL, eR), geometry)
        try:
            sol = solve_star_state(problem.left, problem.right, problem.eos)
            prof = sample_profile(sol, x, t)
        except (RiemannSolverError, VacuumError, ValueError,
                RuntimeError) as err:
            warnings.warn(f"exact reference failed ({err}); "
                          "falling back to numerical1d")
        else:
            return _broadcast_profile(
                profile_energy(prof, problem.eos), geometry)
    field = initialize_grid(problem, None, _geometry_1d(geometry), dim=1)
    out, _ = evolve(field, t, cfl=cfl, order=order, flux_kind=flux_kind)
    return _broadcast_profile(out.interior[0, 0, 0, :], geometry)


def _energy_from_point(prim, eos):
    v = np.asarray(prim.v, dtype=float)
    W2 = 1.0 / (1.0 - v @ v)
    p = prim.pressure(eos)
    if eos.system == "I":
        return (prim.rho + p) * W2 - p
    return prim.n * prim.enthalpy(eos) * W2 - p


class ReferenceSeries:
    """Incrementally advanced unperturbed reference for a norm series.

    ``energy(t)`` must be called with non-decreasing times; the
    numerical1d variant keeps one 1D field and evolves it from the last
    requested time, which makes a whole series as cheap as one run.
    """

    def __init__(self, problem, geometry, method="numerical1d", cfl=None,
                 order=2, flux_kind="marquina"):
        if method not in ("exact", "numerical1d"):
            raise ValueError(
                f"method must be exact or numerical1d, got {method!r}")
        self.problem = problem
        self.geometry = geometry
        self.method = method
        self.cfl = cfl
        self.order = order
        self.flux_kind = flux_kind
        self._field = None

    def energy(self, t):
        if self.method == "exact":
            return unperturbed_reference(self.problem, t, self.geometry,
                                         method="exact", cfl=self.cfl,
                                         order=self.order,
                                         flux_kind=self.flux_kind)
        if self._field is None:
            self._field = initialize_grid(self.problem, None,
                                          _geometry_1d(self.geometry), dim=1)
        if t < self._field.t - 1e-12 * max(1.0, abs(t)):
            raise ValueError(f"reference series ran past {t}: "
                             f"already at {self._field.t}")
        if t > self._field.t:
            self._field, _ = evolve(self._field, t, cfl=self.cfl,
                                    order=self.order,
                                    flux_kind=self.flux_kind)
        return _broadcast_profile(self._field.interior[0, 0, 0, :],
                                  self.geometry)


def _scan_last_axis(e, x, fraction, ahead=None, behind=None):
    """Front positions scanning from the end of the last axis inward.

    With ``ahead``/``behind`` given (planar pre/post-wave energies) the
    threshold is fixed; otherwise ``ahead`` is the final cell of each
    column and ``behind`` its largest deviation from it, which locates
    the front correctly whenever the outermost wave carries the largest
    jump seen from the undisturbed end (sharp interfaces, symmetric
    double shocks).  The crossing is linearly interpolated.
    """
    nx = e.shape[-1]
    if ahead is None:
        ahead = e[..., -1]
        dev = e - ahead[..., None]
        k = np.abs(dev).argmax(axis=-1)
        behind = np.take_along_axis(e, k[..., None], axis=-1)[..., 0]
    else:
        shape = e.shape[:-1]
        ahead = np.broadcast_to(ahead, shape)
        behind = np.broadcast_to(behind, shape)
    mag = np.abs(behind - ahead)
    thr = ahead + fraction * (behind - ahead)
    sgn = np.sign(behind - ahead)
    on_behind = sgn[..., None] * (e - thr[..., None]) >= 0.0
    found = on_behind.any(axis=-1) & (mag > 0.0)
    # outermost cell already on the behind side of the threshold
    j = nx - 1 - on_behind[..., ::-1].argmax(axis=-1)
    jn = np.minimum(j + 1, nx - 1)
    ej = np.take_along_axis(e, j[..., None], axis=-1)[..., 0]
    en = np.take_along_axis(e, jn[..., None], axis=-1)[..., 0]
    den = en - ej
    safe = np.where(den == 0.0, 1.0, den)
    pos = x[j] + (thr - ej) * (x[jn] - x[j]) / safe
    pos = np.where(den == 0.0, x[j], pos)
    return np.where(found, pos, np.nan)


def front_profile(field, wave, fraction=0.5, problem=None):
    """Track one outward-moving front of the energy field per (y, z) column.

    ``wave`` is "left" or "right" (direction of motion); the scan starts
    at that domain end, where the state is still undisturbed.  When the
    underlying ``problem`` is given, the threshold interpolates between
    the exact planar pre-wave and post-wave (star) energies, which pins
    the named wave even when deeper jumps are larger.  Columns without a
    crossing are flagged NaN, excluded and counted; if no column has one
    the named wave is not on the grid and a ValueError is raised.
    """
    if wave not in ("left", "right"):
        raise ValueError(f"wave must be left or right, got {wave!r}")
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"threshold fraction must lie in (0, 1), got {fraction}")
    ahead = behind = None
    if problem is not None:
        sol = solve_star_state(problem.left, problem.right, problem.eos)
        ahead_st = problem.right if wave == "right" else problem.left
        behind_st = sol.star_right if wave == "right" else sol.star_left
        ahead = _energy_from_point(ahead_st, problem.eos)
        behind = _energy_from_point(behind_st, problem.eos)
    e = field.interior[0]
    x = field.geometry.centers("x")
    if wave == "right":
        positions = _scan_last_axis(e, x, fraction, ahead, behind)
    else:
        positions = _scan_last_axis(e[..., ::-1], x[::-1], fraction,
                                    ahead, behind)
    valid = np.isfinite(positions)
    if not valid.any():
        raise ValueError(f"no {wave}-moving front found on the grid")
    good = positions[valid]
    return FrontProfile(wave, positions, positions.size - good.size,
                        good.max() - good.min(), good.std())


def conservation_totals(field):
    """Per-component interior sums of U times the cell volume."""
    u = field.interior
    return u.reshape(u.shape[0], -1).sum(axis=1) * field.geometry.cell_volume


def write_norm_series(path, triples):
    """Norm series as CSV rows t,L1,L2,Linf (17 significant digits)."""
    with open(path, "w") as fh:
        fh.write("t,L1,L2,Linf\n")
        for tr in triples:
            t, L1, L2, Linf = tuple(tr)
            fh.write(f"{t:.17g},{L1:.17g},{L2:.17g},{Linf:.17g}\n")


def write_front_profile(path, profile, geometry):
    """Front positions as CSV rows y,z,x_front (NaN for flagged columns)."""
    y = geometry.centers("y")
    z = geometry.centers("z")
    with open(path, "w") as fh:
        fh.write("y,z,x_front\n")
        for iz in range(geometry.nz):
            for iy in range(geometry.ny):
                fh.write(f"{y[iy]:.17g},{z[iz]:.17g},"
                         f"{profile.positions[iz, iy]:.17g}\n")
