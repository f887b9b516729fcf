"""Reference problems, corrugation bumps, and grid initialization."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from srrp.evolution import GridGeometry
from srrp.initial_data import (
    DEFAULT_AMPLITUDE_RANGE,
    DEFAULT_BUMP_COUNT,
    PerturbationSpec,
    RiemannProblemSpec,
    corrugation_offset,
    initialize_grid,
    sample_perturbations,
    table1_problem,
)
from srrp.state import primitive_to_conserved


class TestReferenceProblems:
    def test_barotropic_rows(self):
        a = table1_problem("a")
        assert a.eos.system == "I" and a.eos.cs2 == pytest.approx(1 / 3)
        assert a.left.rho == 0.5 and a.right.rho == 0.5
        assert_array_equal(a.left.v, [0.2, 0.2, 0.0])
        assert_array_equal(a.right.v, [-0.2, -0.2, 0.0])
        b = table1_problem("b")
        assert_array_equal(b.left.v, [-0.2, 0.2, 0.0])
        assert_array_equal(b.right.v, [0.2, -0.2, 0.0])
        c = table1_problem("c")
        assert (c.left.rho, c.right.rho) == (0.5, 1.0)
        assert_array_equal(c.left.v, [0.0, 0.2, 0.0])
        assert_array_equal(c.right.v, [0.0, -0.2, 0.0])

    def test_perfect_gas_rows(self):
        d = table1_problem("d")
        assert d.eos.system == "II" and d.eos.gamma == pytest.approx(4 / 3)
        assert d.left.n == 1.0 and d.left.eps == 0.5
        assert d.right.n == 1.0 and d.right.eps == 0.5
        assert_array_equal(d.left.v, [0.2, 0.2, 0.0])
        e = table1_problem("e")
        assert_array_equal(e.left.v, [-0.2, 0.2, 0.0])
        f = table1_problem("f")
        assert (f.left.eps, f.right.eps) == (0.5, 1.0)
        assert_array_equal(f.left.v, [0.0, 0.2, 0.0])
        assert_array_equal(f.right.v, [0.0, -0.2, 0.0])

    def test_unknown_label(self):
        with pytest.raises(ValueError, match="unknown problem label"):
            table1_problem("g")

    def test_repr_smoke(self):
        assert "a" in repr(table1_problem("a"))
        assert "custom" in repr(RiemannProblemSpec(
            table1_problem("a").left, table1_problem("a").right,
            table1_problem("a").eos))


class TestCorrugationOffset:
    DOMAIN = (1.0, 0.5)

    def bump(self, amp=0.01, rad=0.0625, ybar=0.25, zbar=0.125):
        return PerturbationSpec([[amp, rad, ybar, zbar]])

    def test_peak_value_and_compact_support(self):
        pert = self.bump()
        assert corrugation_offset(pert, 0.25, 0.125, self.DOMAIN) == 0.01
        # at r = R the cosine vanishes (to round-off), beyond it exactly
        edge = corrugation_offset(pert, 0.25 + 0.0625, 0.125, self.DOMAIN)
        assert abs(edge) < 1e-17
        outside = corrugation_offset(pert, 0.25 + 0.0626, 0.125, self.DOMAIN)
        assert outside == 0.0

    def test_cosine_profile(self):
        pert = self.bump()
        r = 0.03125  # half the radius, exactly representable
        got = corrugation_offset(pert, 0.25 + r, 0.125, self.DOMAIN)
        assert_allclose(got, 0.01 * np.cos(0.5 * np.pi * r / 0.0625),
                        rtol=1e-15)

    def test_exact_periodicity(self):
        pert = self.bump()
        y = np.array([0.0, 0.21875, 0.25, 0.28125, 0.3125])
        z = 0.125
        base = corrugation_offset(pert, y, z, self.DOMAIN)
        assert_array_equal(corrugation_offset(pert, y + 1.0, z, self.DOMAIN),
                           base)
        assert_array_equal(corrugation_offset(pert, y, z + 0.5, self.DOMAIN),
                           base)

    def test_nearest_image_wraparound(self):
        pert = self.bump(ybar=0.03125)
        # direct distance 0.953125 but periodic distance 0.046875 < radius
        got = corrugation_offset(pert, 0.984375, 0.125, self.DOMAIN)
        assert_allclose(got, 0.01 * np.cos(0.5 * np.pi * 0.046875 / 0.0625),
                        rtol=1e-14)

    def test_superposition(self):
        single = self.bump()
        double = PerturbationSpec(np.vstack([single.bumps, single.bumps]))
        y = np.linspace(0, 1, 33)
        assert_allclose(
            corrugation_offset(double, y, 0.125, self.DOMAIN),
            2 * corrugation_offset(single, y, 0.125, self.DOMAIN),
            rtol=1e-15)

    def test_broadcasting(self):
        pert = self.bump()
        y = np.linspace(0, 1, 9)
        z = np.linspace(0, 0.5, 5)
        out = corrugation_offset(pert, y[None, :], z[:, None], self.DOMAIN)
        assert out.shape == (5, 9)

    def test_empty_perturbation(self):
        out = corrugation_offset(PerturbationSpec.none(),
                                 np.linspace(0, 1, 5), 0.1, self.DOMAIN)
        assert_array_equal(out, np.zeros(5))

    def test_radius_validation(self):
        with pytest.raises(ValueError, match="radii"):
            PerturbationSpec([[0.01, 0.0, 0.5, 0.25]])


class TestSamplePerturbations:
    def test_deterministic(self):
        p1 = sample_perturbations(42)
        p2 = sample_perturbations(42)
        assert_array_equal(p1.bumps, p2.bumps)
        p3 = sample_perturbations(43)
        assert not np.array_equal(p1.bumps, p3.bumps)

    def test_count_and_ranges(self):
        pert = sample_perturbations(7, count=50,
                                    amplitude_range=(0.001, 0.003),
                                    radius_range=(0.02, 0.04),
                                    domain=(2.0, 1.0))
        assert len(pert) == 50
        A, R, yb, zb = pert.bumps.T
        assert ((A >= 0.001) & (A <= 0.003)).all()
        assert ((R >= 0.02) & (R <= 0.04)).all()
        assert ((yb >= 0) & (yb < 2.0)).all()
        assert ((zb >= 0) & (zb < 1.0)).all()
        assert len(sample_perturbations(7, count=0)) == 0

    def test_validation(self):
        with pytest.raises(ValueError):
            sample_perturbations(0, count=-1)
        with pytest.raises(ValueError):
            sample_perturbations(0, amplitude_range=(0.0, 0.01))
        with pytest.raises(ValueError):
            sample_perturbations(0, radius_range=(0.3, 0.3))  # >= Lz/2

    def test_default_offsets_stay_small(self):
        y = np.linspace(0, 1, 201)
        z = np.linspace(0, 0.5, 101)
        hard_cap = DEFAULT_BUMP_COUNT * DEFAULT_AMPLITUDE_RANGE[1]
        for seed in range(5):
            pert = sample_perturbations(seed)
            off = corrugation_offset(pert, y[None, :], z[:, None], (1.0, 0.5))
            assert np.abs(off).max() <= hard_cap + 1e-12
            assert np.abs(off).max() < 0.5  # interface stays near x = 0


class TestInitializeGrid:
    GEOM = GridGeometry((8, 4, 2), ((-1.5, 1.5), (0.0, 1.0), (0.0, 0.5)))

    def test_planar_half_split(self):
        prob = table1_problem("c")
        field = initialize_grid(prob, PerturbationSpec.none(), self.GEOM)
        UL = primitive_to_conserved(prob.left, prob.eos).components
        UR = primitive_to_conserved(prob.right, prob.eos).components
        interior = field.interior
        for i in range(8):
            want = UL if self.GEOM.centers("x")[i] < 0 else UR
            assert_array_equal(interior[:, :, :, i],
                               np.broadcast_to(want[:, None, None], (4, 2, 4)))
        # columns are identical: planar data has no (y, z) structure
        assert (interior == interior[:, :1, :1, :]).all()
        assert field.t == 0.0 and field.step == 0
        assert field.eos is prob.eos
        assert field.boundaries.kind("x") == "outflow"
        assert field.boundaries.kind("y") == "periodic"

    def test_perturbed_split_counts(self):
        prob = table1_problem("c")
        geom = GridGeometry((64, 16, 8), ((-1.5, 1.5), (0.0, 1.0), (0.0, 0.5)))
        pert = sample_perturbations(3)
        field = initialize_grid(prob, pert, geom)
        UL = primitive_to_conserved(prob.left, prob.eos).components
        x = geom.centers("x")
        y = geom.centers("y")
        z = geom.centers("z")
        interior = field.interior
        for iz in range(8):
            for iy in range(16):
                off = corrugation_offset(pert, y[iy], z[iz], (1.0, 0.5))
                want = int((x < off).sum())
                got = int((interior[0, iz, iy, :] == UL[0]).sum())
                assert got == want

    def test_dim1_ignores_perturbations(self):
        prob = table1_problem("a")
        pert = sample_perturbations(1)
        f_planar = initialize_grid(prob, PerturbationSpec.none(), self.GEOM)
        f_dim1 = initialize_grid(prob, pert, self.GEOM, dim=1)
        assert_array_equal(f_dim1.data, f_planar.data)
        f_none = initialize_grid(prob, None, self.GEOM)
        assert_array_equal(f_none.data, f_planar.data)

    def test_perturbation_actually_corrugates(self):
        prob = table1_problem("c")
        geom = GridGeometry((64, 16, 8), ((-1.5, 1.5), (0.0, 1.0), (0.0, 0.5)))
        pert = PerturbationSpec([[0.1, 0.2, 0.5, 0.25]])
        field = initialize_grid(prob, pert, geom)
        interior = field.interior
        assert not (interior == interior[:, :1, :1, :]).all()

    def test_ghost_zones_filled(self):
        prob = table1_problem("a")
        field = initialize_grid(prob, None, self.GEOM)
        UL = primitive_to_conserved(prob.left, prob.eos).components
        UR = primitive_to_conserved(prob.right, prob.eos).components
        # outflow x ghosts replicate the edge states
        assert_array_equal(field.data[:, 2, 2, 0], UL)
        assert_array_equal(field.data[:, 2, 2, -1], UR)
