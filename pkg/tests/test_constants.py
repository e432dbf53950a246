import math

import pytest

from kickcool.constants import (CONSTANTS, RB85, AtomSpecies,
                                PhysicalConstants, de_broglie_wavelength,
                                recoil_temperature, recoil_velocity)


def test_hbar_consistent_with_h():
    assert CONSTANTS.hbar * 2.0 * math.pi == pytest.approx(
        CONSTANTS.planck_h, rel=1e-12)


def test_constants_positive():
    for name in ("planck_h", "hbar", "k_boltzmann", "bohr_magneton", "mu0",
                 "gravity_g"):
        assert getattr(CONSTANTS, name) > 0.0


def test_bad_constants_rejected():
    with pytest.raises(ValueError):
        PhysicalConstants(hbar=1.0e-34)  # breaks h = 2*pi*hbar
    with pytest.raises(ValueError):
        PhysicalConstants(k_boltzmann=-1.0)


def test_rb85_record():
    assert RB85.f_ground == 3
    assert 779e-9 <= RB85.d2_wavelength <= 781e-9
    assert RB85.g_f == pytest.approx(1.0 / 3.0)
    assert RB85.mass > 0.0


def test_recoil_velocity_direct_evaluation():
    # independent oracle: direct h/(m lambda) with CODATA numbers
    oracle = 6.62607015e-34 / (1.4100e-25 * 780.241e-9)
    v = recoil_velocity(RB85)
    assert v == pytest.approx(oracle, rel=1e-12)
    assert v == pytest.approx(6.0e-3, rel=0.01)


def test_recoil_velocity_mass_scaling():
    heavy = AtomSpecies("X", RB85.mass * 2.0, RB85.d2_wavelength, 3, 1 / 3)
    assert recoil_velocity(heavy) == pytest.approx(
        recoil_velocity(RB85) / 2.0, rel=1e-12)


def test_recoil_temperature_value():
    v = recoil_velocity(RB85)
    oracle = RB85.mass * v * v / 1.380649e-23
    t = recoil_temperature(RB85)
    assert t == pytest.approx(oracle, rel=1e-12)
    assert t == pytest.approx(0.37e-6, rel=0.02)


def test_recoil_temperature_mass_scaling():
    heavy = AtomSpecies("X", RB85.mass * 4.0, RB85.d2_wavelength, 3, 1 / 3)
    assert recoil_temperature(heavy) == pytest.approx(
        recoil_temperature(RB85) / 4.0, rel=1e-12)


def test_recoil_to_6uK_ratio():
    assert recoil_temperature(RB85) / 6.0e-6 == pytest.approx(0.062, abs=0.003)


def test_de_broglie_at_6uK():
    lam = de_broglie_wavelength(RB85, 6.0e-6)
    assert 0.19e-6 <= lam <= 0.20e-6


def test_de_broglie_at_5nK():
    lam = de_broglie_wavelength(RB85, 5.0e-9)
    assert lam == pytest.approx(6.7e-6, rel=0.02)


def test_de_broglie_temperature_scaling():
    assert de_broglie_wavelength(RB85, 4.0e-6) == pytest.approx(
        de_broglie_wavelength(RB85, 1.0e-6) / 2.0, rel=1e-12)


def test_de_broglie_rejects_nonpositive_temperature():
    with pytest.raises(ValueError):
        de_broglie_wavelength(RB85, 0.0)
    with pytest.raises(ValueError):
        de_broglie_wavelength(RB85, -1e-6)


def test_recoil_identity():
    # v_rec * m * lambda = h
    v = recoil_velocity(RB85)
    assert v * RB85.mass * RB85.d2_wavelength == pytest.approx(
        CONSTANTS.planck_h, rel=1e-12)


def test_de_broglie_at_recoil_temperature_is_d2_wavelength():
    t_rec = recoil_temperature(RB85)
    assert de_broglie_wavelength(RB85, t_rec) == pytest.approx(
        RB85.d2_wavelength, rel=1e-6)
