import numpy as np
import pytest

from srrp.state import (
    EosSpec,
    PrimitiveState,
    ConservedState,
    SuperluminalError,
    RecoveryError,
    lorentz_factor,
    pressure,
    enthalpy,
    sound_speed,
    primitive_to_conserved,
    physical_flux,
    recover_primitive,
)

EOS_I = EosSpec.ultrarelativistic(1.0 / 3.0)
EOS_II = EosSpec.perfect_gas(4.0 / 3.0)


def prim_a_left():
    return PrimitiveState(rho=0.5, v=(0.2, 0.2, 0.0))


class TestEosSpec:
    def test_variants(self):
        assert EOS_I.system == "I" and EOS_I.ncomp == 4
        assert EOS_II.system == "II" and EOS_II.ncomp == 5
        assert EOS_I.param == pytest.approx(1.0 / 3.0)
        assert EOS_II.param == pytest.approx(4.0 / 3.0)

    def test_rejects_bad_params(self):
        for cs2 in (0.0, 1.0, -0.5, 2.0, None):
            with pytest.raises(ValueError):
                EosSpec.ultrarelativistic(cs2)
        for gamma in (1.0, 2.5, 0.9, None):
            with pytest.raises(ValueError):
                EosSpec.perfect_gas(gamma)
        with pytest.raises(ValueError):
            EosSpec("polytrope")


class TestLorentzFactor:
    def test_rest(self):
        assert lorentz_factor((0, 0, 0)) == 1.0

    def test_oracle_diagonal(self):
        # 1/sqrt(1 - 0.08) evaluated independently
        assert lorentz_factor((0.2, 0.2, 0.0)) == pytest.approx(1.0425721, abs=1e-6)

    def test_oracle_exact_rational(self):
        assert lorentz_factor((0.6, 0.0, 0.0)) == pytest.approx(1.25, rel=1e-14)

    def test_superluminal(self):
        with pytest.raises(SuperluminalError):
            lorentz_factor((1.0, 0.0, 0.0))
        with pytest.raises(SuperluminalError):
            lorentz_factor((0.8, 0.8, 0.0))


class TestPrimitiveState:
    def test_exclusive_fields(self):
        with pytest.raises(ValueError):
            PrimitiveState(rho=1.0, n=1.0, eps=0.5)
        with pytest.raises(ValueError):
            PrimitiveState(n=1.0)  # missing eps
        with pytest.raises(ValueError):
            PrimitiveState(rho=-1.0)
        with pytest.raises(ValueError):
            PrimitiveState(n=1.0, eps=-0.1)
        with pytest.raises(SuperluminalError):
            PrimitiveState(rho=1.0, v=(0.9, 0.9, 0.0))

    def test_derived(self):
        s = PrimitiveState(n=1.0, eps=0.5, v=(0, 0, 0))
        assert s.W == 1.0
        assert s.pressure(EOS_II) == pytest.approx(1.0 / 6.0, rel=1e-14)
        assert s.enthalpy(EOS_II) == pytest.approx(5.0 / 3.0, rel=1e-14)


class TestConversions:
    def test_rest_frame_I(self):
        U = primitive_to_conserved(PrimitiveState(rho=0.5), EOS_I)
        assert U.system == "I"
        np.testing.assert_allclose(U.components, [0.5, 0, 0, 0], atol=1e-15)

    def test_problem_a_left_oracle(self):
        # direct evaluation: (rho+p)W^2 = (2/3)/0.92
        U = primitive_to_conserved(prim_a_left(), EOS_I)
        np.testing.assert_allclose(
            U.components, [0.5579710, 0.1449275, 0.1449275, 0.0], atol=1e-6)

    def test_rest_frame_II(self):
        U = primitive_to_conserved(PrimitiveState(n=1.0, eps=0.5), EOS_II)
        np.testing.assert_allclose(U.components, [1.5, 0, 0, 0, 1.0], rtol=0, atol=1e-15)

    def test_flux_rest_I(self):
        F = physical_flux(PrimitiveState(rho=0.5), EOS_I, "x")
        np.testing.assert_allclose(F.components, [0, 1.0 / 6.0, 0, 0], atol=1e-15)
        assert F.direction == "x"

    def test_flux_problem_a_left(self):
        F = physical_flux(prim_a_left(), EOS_I, "x")
        wW2 = (0.5 + 1.0 / 6.0) / 0.92
        assert F[0] == pytest.approx(wW2 * 0.2, rel=1e-12)
        assert F[0] == pytest.approx(0.1449275, abs=1e-6)
        assert F[1] == pytest.approx(0.1956522, abs=1e-6)

    def test_flux_rest_II_y(self):
        F = physical_flux(PrimitiveState(n=1.0, eps=0.5), EOS_II, "y")
        np.testing.assert_allclose(F.components, [0, 0, 1.0 / 6.0, 0, 0], atol=1e-15)

    def test_mass_flux_component(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            v = rng.uniform(-0.55, 0.55, 3)
            s = PrimitiveState(n=rng.uniform(0.1, 5), eps=rng.uniform(0.01, 3), v=v)
            for d, name in enumerate("xyz"):
                F = physical_flux(s, EOS_II, name)
                assert F[4] == pytest.approx(s.n * s.W * v[d], rel=1e-14, abs=1e-16)

    def test_direction_permutation_symmetry(self):
        rng = np.random.default_rng(6)
        for eos in (EOS_I, EOS_II):
            for _ in range(30):
                v = rng.uniform(-0.5, 0.5, 3)
                if eos.system == "I":
                    s = PrimitiveState(rho=rng.uniform(0.1, 4), v=v)
                    sp = PrimitiveState(rho=s.rho, v=v[[1, 0, 2]])
                else:
                    s = PrimitiveState(n=rng.uniform(0.1, 4), eps=rng.uniform(0.1, 2), v=v)
                    sp = PrimitiveState(n=s.n, eps=s.eps, v=v[[1, 0, 2]])
                Fy = physical_flux(s, eos, "y").components
                Fx = physical_flux(sp, eos, "x").components
                # swapping v_x <-> v_y and the two momentum slots maps F^y to F^x
                perm = [0, 2, 1, 3] if eos.system == "I" else [0, 2, 1, 3, 4]
                np.testing.assert_allclose(Fy[perm], Fx, rtol=1e-14, atol=1e-16)


class TestSoundSpeed:
    def test_constant_I(self):
        assert sound_speed(prim_a_left(), EOS_I) == pytest.approx(0.5773503, abs=1e-7)

    def test_direct_II(self):
        s = PrimitiveState(n=1.0, eps=0.5)
        p = 1.0 / 6.0
        h = 5.0 / 3.0
        expect = np.sqrt((4.0 / 3.0) * p / h)
        assert sound_speed(s, EOS_II) == pytest.approx(expect, rel=1e-14)

    def test_cold_limit_II(self):
        s = PrimitiveState(n=1.0, eps=1e-12)
        assert sound_speed(s, EOS_II) < 1e-5


class TestRecovery:
    def test_rest_I_analytic_root(self):
        U = ConservedState([0.5, 0, 0, 0], "I")
        prim, info = recover_primitive(U, EOS_I, return_info=True)
        assert prim.rho == pytest.approx(0.5, rel=1e-14)
        np.testing.assert_allclose(prim.v, 0.0, atol=1e-15)
        # closed form for cs2 = 1/3, m = 0: p = (-e + sqrt(4 e^2))/3 = e/3
        assert prim.pressure(EOS_I) == pytest.approx(1.0 / 6.0, rel=1e-13)
        assert info["iterations"] == 0

    def test_roundtrip_problem_a(self):
        U = primitive_to_conserved(prim_a_left(), EOS_I)
        prim = recover_primitive(U, EOS_I)
        assert prim.rho == pytest.approx(0.5, abs=1e-10)
        np.testing.assert_allclose(prim.v, [0.2, 0.2, 0.0], atol=1e-10)

    def test_rest_II(self):
        U = ConservedState([1.5, 0, 0, 0, 1.0], "II")
        prim = recover_primitive(U, EOS_II)
        assert prim.n == pytest.approx(1.0, abs=1e-10)
        assert prim.eps == pytest.approx(0.5, abs=1e-10)
        np.testing.assert_allclose(prim.v, 0.0, atol=1e-12)

    def test_roundtrip_property_I(self):
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(2000):
            rho = 10.0 ** rng.uniform(-3, 3)
            v = rng.uniform(-1, 1, 3)
            v *= rng.uniform(0, 0.99) / np.linalg.norm(v)
            s = PrimitiveState(rho=rho, v=v)
            U = primitive_to_conserved(s, EOS_I)
            r = recover_primitive(U, EOS_I)
            worst = max(worst, abs(r.rho - rho) / rho, np.max(np.abs(r.v - v)))
        assert worst < 1e-12

    def test_roundtrip_property_II(self):
        rng = np.random.default_rng(43)
        worst = 0.0
        for _ in range(2000):
            n = 10.0 ** rng.uniform(-3, 3)
            eps = 10.0 ** rng.uniform(-3, 3)
            v = rng.uniform(-1, 1, 3)
            v *= rng.uniform(0, 0.99) / np.linalg.norm(v)
            s = PrimitiveState(n=n, eps=eps, v=v)
            U = primitive_to_conserved(s, EOS_II)
            r = recover_primitive(U, EOS_II)
            worst = max(worst, abs(r.n - n) / n, abs(r.eps - eps) / eps,
                        np.max(np.abs(r.v - v)))
        assert worst < 1e-10

    def test_guess_speeds_up_newton(self):
        s = PrimitiveState(n=2.0, eps=1.5, v=(0.3, -0.2, 0.1))
        U = primitive_to_conserved(s, EOS_II)
        _, cold = recover_primitive(U, EOS_II, return_info=True)
        _, seeded = recover_primitive(U, EOS_II, guess=s, return_info=True)
        assert seeded["iterations"] <= cold["iterations"]

    def test_unrecoverable_superluminal_momentum(self):
        with pytest.raises(RecoveryError):
            recover_primitive(ConservedState([1.0, 1.5, 0, 0], "I"), EOS_I)
        with pytest.raises(RecoveryError):
            recover_primitive(ConservedState([1.0, 1.5, 0, 0, 0.5], "II"), EOS_II)

    def test_negative_energy(self):
        with pytest.raises(RecoveryError):
            recover_primitive(ConservedState([-1.0, 0, 0, 0], "I"), EOS_I)

    def test_floor_is_reported(self):
        U = ConservedState([1e-15, 0, 0, 0], "I")
        prim, info = recover_primitive(U, EOS_I, return_info=True)
        assert info["floored"]
        assert prim.pressure(EOS_I) >= 1e-14

    def test_system_mismatch(self):
        U = ConservedState([0.5, 0, 0, 0], "I")
        with pytest.raises(ValueError):
            recover_primitive(U, EOS_II)
