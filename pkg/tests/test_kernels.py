"""The fused sweep kernels against the pure-Python reference pipeline.

The reference RHS is assembled from the independently tested modules
(`reconstruction.ceno_profile`, `state.recover_primitive`,
`flux.marquina_flux`/`hlle_flux`) with the same padding rules, so any
disagreement isolates a kernel transcription bug.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from srrp import kernels
from srrp.evolution import BoundarySpec, GridField, GridGeometry, mol_rhs
from srrp.initial_data import table1_problem
from srrp.flux import hlle_flux, marquina_flux
from srrp.reconstruction import ceno_profile
from srrp.state import (
    ConservedState,
    EosSpec,
    PrimitiveState,
    RecoveryError,
    primitive_to_conserved,
    recover_primitive,
)

EOS_I = EosSpec.ultrarelativistic(1.0 / 3.0)
EOS_II = EosSpec.perfect_gas(4.0 / 3.0)


def random_conserved(eos, count, seed=0, vmax=0.9):
    rng = np.random.default_rng(seed)
    out = np.empty((eos.ncomp, count))
    for i in range(count):
        v = rng.uniform(-vmax, vmax, 3)
        while v @ v >= vmax * vmax:
            v = rng.uniform(-vmax, vmax, 3)
        if eos.system == "I":
            prim = PrimitiveState(rho=np.exp(rng.uniform(-3, 3)), v=v)
        else:
            prim = PrimitiveState(n=np.exp(rng.uniform(-3, 3)),
                                  eps=np.exp(rng.uniform(-3, 2)), v=v)
        out[:, i] = primitive_to_conserved(prim, eos).components
    return out


def reference_rhs_1d(interior, eos, h, flux_kind, bc="outflow",
                     reconstruction=True):
    """Pad-3 pencil pipeline built from the reference modules."""
    nc, n = interior.shape
    pad = np.empty((nc, n + 6))
    for i in range(n + 6):
        s = i - 3
        s = s % n if bc == "periodic" else min(max(s, 0), n - 1)
        pad[:, i] = interior[:, s]
    fp = np.empty((nc, n + 2))
    fm = np.empty((nc, n + 2))
    if reconstruction:
        for c in range(nc):
            up, um = ceno_profile(pad[c], h)
            fp[c] = up[2:n + 4]
            fm[c] = um[2:n + 4]
    else:
        fp = pad[:, 2:n + 4].copy()
        fm = pad[:, 2:n + 4].copy()
    fluxer = marquina_flux if flux_kind == "marquina" else hlle_flux
    flx = np.empty((nc, n + 1))
    for j in range(n + 1):
        uL = fp[:, j].copy()
        uR = fm[:, j + 1].copy()
        try:
            recover_primitive(ConservedState(uL, eos.system), eos)
        except RecoveryError:
            uL = pad[:, j + 2].copy()
        try:
            recover_primitive(ConservedState(uR, eos.system), eos)
        except RecoveryError:
            uR = pad[:, j + 3].copy()
        flx[:, j] = fluxer(ConservedState(uL, eos.system),
                           ConservedState(uR, eos.system), eos, "x").components
    return -(flx[:, 1:] - flx[:, :-1]) / h


def shocktube_1d(label, n=64, noise=True, seed=7):
    prob = table1_problem(label)
    eos = prob.eos
    geom = GridGeometry((n, 1, 1), ((-1.5, 1.5), (0.0, 1.0), (0.0, 1.0)))
    x = geom.centers("x")
    UL = primitive_to_conserved(prob.left, eos).components
    UR = primitive_to_conserved(prob.right, eos).components
    interior = np.where(x[None, :] < 0, UL[:, None], UR[:, None])
    if noise:
        rng = np.random.default_rng(seed)
        interior = interior * (1.0 + 0.03 * np.sin(2 * np.pi * x)[None, :]
                               + 0.01 * rng.standard_normal((eos.ncomp, n)))
    return interior, eos, geom


class TestScalarRecovery:
    """Kernel recovery helpers against state.recover_primitive."""

    @pytest.mark.parametrize("eos", [EOS_I, EOS_II], ids=["I", "II"])
    def test_matches_reference_recovery(self, eos):
        U = random_conserved(eos, 300, seed=3)
        for i in range(U.shape[1]):
            prim, info = recover_primitive(
                ConservedState(U[:, i], eos.system), eos, return_info=True)
            if eos.system == "I":
                ok, fl, rho, vx, vy, vz, p = kernels._rec_I(*U[:, i], eos.cs2)
                assert ok
                assert_allclose([rho, vx, vy, vz],
                                [prim.rho, *prim.v], rtol=1e-13, atol=1e-300)
            else:
                ok, fl, n, eps, vx, vy, vz, p = kernels._rec_II(
                    *U[:, i], eos.gamma)
                assert ok
                assert_allclose([n, eps, vx, vy, vz],
                                [prim.n, prim.eps, *prim.v], rtol=1e-9,
                                atol=1e-300)
            assert fl == info["floored"]

    def test_rejects_unphysical_states(self):
        # momentum magnitude above the energy
        ok = kernels._rec_I(1.0, 1.5, 0.0, 0.0, 1.0 / 3.0)[0]
        assert not ok
        ok = kernels._rec_II(1.0, 1.5, 0.0, 0.0, 0.5, 4.0 / 3.0)[0]
        assert not ok
        # non-positive energy
        assert not kernels._rec_I(-1.0, 0.0, 0.0, 0.0, 1.0 / 3.0)[0]
        assert not kernels._rec_II(1.0, 0.0, 0.0, 0.0, -0.5, 4.0 / 3.0)[0]

    def test_grid_recovery_kernels(self):
        for eos in (EOS_I, EOS_II):
            U = random_conserved(eos, 60, seed=11).reshape(eos.ncomp, 3, 4, 5)
            nprim = 5 if eos.system == "I" else 6
            out = np.empty((nprim, 3, 4, 5))
            flags = np.empty((3, 4, 5), dtype=np.int8)
            rec = (kernels.recover_grid_I if eos.system == "I"
                   else kernels.recover_grid_II)
            rec(U, eos.param, out, flags)
            assert (flags == 0).all()
            for iz in range(3):
                for iy in range(4):
                    for ix in range(5):
                        prim = recover_primitive(
                            ConservedState(U[:, iz, iy, ix], eos.system), eos)
                        got_v = out[-4:-1, iz, iy, ix]
                        assert_allclose(got_v, prim.v, rtol=1e-9, atol=1e-300)


class TestSweepAgainstReference:
    """Full fused pipeline vs the module-by-module pipeline."""

    @pytest.mark.parametrize("label", ["a", "f"], ids=["systemI", "systemII"])
    @pytest.mark.parametrize("flux_kind", ["marquina", "hlle"])
    @pytest.mark.parametrize("bc", ["outflow", "periodic"])
    def test_shocktube_rhs(self, label, flux_kind, bc):
        interior, eos, geom = shocktube_1d(label)
        bcs = BoundarySpec(x=bc, y="periodic", z="periodic")
        field = GridField.from_interior(
            interior.reshape(eos.ncomp, 1, 1, -1), geom, eos, boundaries=bcs)
        rhs, stats = mol_rhs(field, flux_kind=flux_kind)
        ref = reference_rhs_1d(interior, eos, geom.spacing("x"), flux_kind,
                               bc=bc)
        assert_allclose(rhs[:, 0, 0, :], ref, rtol=1e-11,
                        atol=1e-13 * np.abs(ref).max())
        assert stats.pc_fallbacks == 0
        assert stats.hlle_fallbacks == 0

    @pytest.mark.parametrize("label", ["a", "f"], ids=["systemI", "systemII"])
    def test_piecewise_constant_mode(self, label):
        interior, eos, geom = shocktube_1d(label)
        field = GridField.from_interior(
            interior.reshape(eos.ncomp, 1, 1, -1), geom, eos)
        rhs, _ = mol_rhs(field, flux_kind="marquina", reconstruction=False)
        ref = reference_rhs_1d(interior, eos, geom.spacing("x"), "marquina",
                               reconstruction=False)
        assert_allclose(rhs[:, 0, 0, :], ref, rtol=1e-11,
                        atol=1e-13 * np.abs(ref).max())

    def test_pc_fallback_engages_on_reconstruction_overshoot(self):
        # strong random blast data: cell averages are recoverable but CENO
        # face states overshoot past |m| = E, forcing the per-side fallback
        rng = np.random.default_rng(0)
        n = 8
        E = np.exp(rng.uniform(-6, 6, n))
        frac = rng.uniform(-0.999, 0.999, (3, n))
        frac /= np.maximum(1.0, np.sqrt((frac ** 2).sum(0)) / 0.999)[None, :]
        interior = np.concatenate([E[None], frac * E[None, :]], axis=0)
        geom = GridGeometry((n, 1, 1), ((0, 1), (0, 1), (0, 1)))
        field = GridField.from_interior(
            interior.reshape(4, 1, 1, n), geom, EOS_I)
        rhs, stats = mol_rhs(field, flux_kind="hlle")
        assert stats.pc_fallbacks > 0
        assert np.isfinite(rhs).all()
        # the fallback must reproduce the piecewise-constant flux exactly
        ref = reference_rhs_1d(interior, EOS_I, geom.spacing("x"), "hlle")
        assert_allclose(rhs[:, 0, 0, :], ref, rtol=1e-11,
                        atol=1e-13 * np.abs(ref).max())

    def test_unrecoverable_cell_aborts_with_coordinates(self):
        interior, eos, geom = shocktube_1d("a", noise=False)
        interior = interior.reshape(4, 1, 1, -1).copy()
        interior[:, 0, 0, 20] = (1.0, 2.0, 0.0, 0.0)  # |m| > E
        field = GridField.from_interior(interior, geom, eos)
        with pytest.raises(RecoveryError) as err:
            mol_rhs(field)
        assert err.value.cell is not None
        ix, iy, iz = err.value.cell
        assert abs(ix - 20) <= 1 and iy == 0 and iz == 0


class TestSweepSymmetries:
    def grid3d(self, eos, shape=(6, 5, 4), seed=5):
        nx, ny, nz = shape
        U = random_conserved(eos, nx * ny * nz, seed=seed, vmax=0.5)
        # smooth it to keep reconstruction in its regular regime
        U = U.reshape(eos.ncomp, nz, ny, nx)
        base = U.mean(axis=(1, 2, 3), keepdims=True)
        return 0.9 * base + 0.1 * U

    @pytest.mark.parametrize("eos", [EOS_I, EOS_II], ids=["I", "II"])
    def test_axis_sweeps_are_exact_permutations(self, eos):
        """A y (or z) sweep equals the x sweep of the transposed data."""
        u = self.grid3d(eos)
        nc = eos.ncomp
        sweep = kernels.sweep_I if eos.system == "I" else kernels.sweep_II
        h = 0.1

        for axis, spat, comp in (
                (1, (0, 1, 3, 2), [0, 2, 1, 3]),
                (2, (0, 3, 2, 1), [0, 3, 2, 1])):
            if nc == 5:
                comp = comp + [4]
            rhs_a = np.zeros_like(u)
            # pencil count: axis 1 -> nz*nx, axis 2 -> ny*nx
            P = u.shape[1] * u.shape[3] if axis == 1 else u.shape[2] * u.shape[3]
            counters = np.zeros((P, 4), dtype=np.int64)
            sweep(u, axis, kernels.BC_PERIODIC, h, eos.param, 1,
                  kernels.FLUX_MARQUINA, rhs_a, counters)
            assert not counters[:, kernels.C_ERR].any()

            u_t = np.ascontiguousarray(u[comp].transpose(spat))
            rhs_b = np.zeros_like(u_t)
            Pb = u_t.shape[1] * u_t.shape[2]
            counters_b = np.zeros((Pb, 4), dtype=np.int64)
            sweep(u_t, 0, kernels.BC_PERIODIC, h, eos.param, 1,
                  kernels.FLUX_MARQUINA, rhs_b, counters_b)
            assert_array_equal(rhs_a, rhs_b[comp].transpose(spat))

    def test_periodic_roll_equivariance_is_exact(self):
        interior, eos, geom = shocktube_1d("a")
        u = interior.reshape(4, 1, 1, -1)
        bcs = BoundarySpec(x="periodic")
        f1 = GridField.from_interior(u, geom, eos, boundaries=bcs)
        rhs1, _ = mol_rhs(f1)
        rolled = np.roll(u, 5, axis=3)
        f2 = GridField.from_interior(rolled, geom, eos, boundaries=bcs)
        rhs2, _ = mol_rhs(f2)
        assert_array_equal(np.roll(rhs1, 5, axis=3), rhs2)

    def test_repeat_call_is_bitwise_identical(self):
        interior, eos, geom = shocktube_1d("f")
        field = GridField.from_interior(
            interior.reshape(5, 1, 1, -1), geom, eos)
        rhs1, _ = mol_rhs(field)
        rhs2, _ = mol_rhs(field)
        assert_array_equal(rhs1, rhs2)

    @pytest.mark.parametrize("eos", [EOS_I, EOS_II], ids=["I", "II"])
    def test_periodic_box_conserves_totals(self, eos):
        u = self.grid3d(eos, seed=9)
        geom = GridGeometry((u.shape[3], u.shape[2], u.shape[1]),
                            ((0, 1), (0, 1), (0, 1)))
        bcs = BoundarySpec(x="periodic")
        field = GridField.from_interior(u, geom, eos, boundaries=bcs)
        rhs, _ = mol_rhs(field)
        totals = rhs.sum(axis=(1, 2, 3)) * geom.cell_volume
        scale = np.abs(rhs).sum(axis=(1, 2, 3)) * geom.cell_volume
        assert (np.abs(totals) <= 1e-13 * np.maximum(scale, 1e-30)).all()
