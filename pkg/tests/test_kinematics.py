import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from symcool import kinematics as kin
from symcool.species import Species, make_pair
from symcool.units import convert, ev

energies = st.floats(1e-6, 1.0)
impacts = st.floats(0.0, 1e6)
ratios = st.floats(0.01, 100.0)


def test_head_on_backscatter():
    assert kin.scattering_angle(1.0, 0.0) == pytest.approx(math.pi, rel=1e-15)


def test_right_angle():
    assert kin.scattering_angle(0.5, 1.0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert kin.scattering_angle(1.0, 1.0, q_prod=2) == pytest.approx(math.pi / 2, rel=1e-15)


def test_small_angle_limit():
    # 2 E b / Q = 1e3 -> theta ~ 2/x
    assert kin.scattering_angle(500.0, 1.0) == pytest.approx(2e-3, rel=1e-6)


@given(E=energies, b=impacts)
def test_angle_range(E, b):
    th = kin.scattering_angle(E, b)
    assert 0.0 < th <= math.pi


def test_no_deflection_no_transfer():
    assert kin.energy_transfer_lab(1.0, 0.0, 0.7) == 0.0


def test_equal_mass_head_on_full_transfer():
    assert kin.energy_transfer_lab(3.0, math.pi, 1.0) == pytest.approx(3.0, rel=1e-15)


def test_mgh_mg_head_on():
    assert kin.energy_transfer_lab(1.0, math.pi, 25 / 24) == pytest.approx(2400 / 2401, rel=1e-14)


@given(E=energies, b=impacts, xi=ratios)
def test_transfer_bounded_and_angle_free_form_consistent(E, b, xi):
    th = kin.scattering_angle(E, b)
    lab = kin.energy_transfer_lab(1.0, th, xi)
    assert 0.0 <= lab <= 1.0
    if th > 1e-2:
        # away from grazing angles the cos form has no cancellation problem
        assert kin.transfer_fraction(E, b, xi) == pytest.approx(lab, rel=1e-10)


@given(E=energies, b=impacts, xi=ratios)
def test_transfer_fraction_against_high_precision(E, b, xi):
    with mp.workdps(40):
        th = 2 * mp.asin(1 / mp.sqrt(1 + (2 * mp.mpf(E) * b) ** 2))
        ref = 2 * xi * (1 - mp.cos(th)) / (1 + mp.mpf(xi)) ** 2
    assert kin.transfer_fraction(E, b, xi) == pytest.approx(float(ref), rel=1e-13)


@given(E=energies, b=st.floats(0.0, 1e4), xi=ratios)
def test_transfer_invariant_under_inverse_mass_ratio(E, b, xi):
    th = kin.scattering_angle(E, b)
    assert kin.energy_transfer_lab(1.0, th, xi) == pytest.approx(kin.energy_transfer_lab(1.0, th, 1 / xi), rel=1e-12)


@given(E=energies, b1=impacts, b2=impacts)
def test_transfer_decreases_with_impact_parameter(E, b1, b2):
    lo, hi = sorted((b1, b2))
    assert kin.transfer_fraction(E, hi, 1.0) <= kin.transfer_fraction(E, lo, 1.0)


def test_slower_collisions_transfer_more(mgh):
    b = 20.0
    assert kin.transfer_fraction(ev(1.0), b, mgh.xi) > kin.transfer_fraction(ev(2.0), b, mgh.xi)


def test_similar_masses_transfer_more():
    th = kin.scattering_angle(ev(1.0), 10.0)
    assert kin.energy_transfer_lab(1.0, th, 1.0) > kin.energy_transfer_lab(1.0, th, 5.0)


def test_frame_example(mgh):
    assert kin.cm_to_lab(1.8, mgh) == pytest.approx(3.675, rel=1e-12)  # about 3.5 eV lab


def test_heavy_coolant_limit():
    pair = make_pair(Species("M+", 1.0), Species("A+", 1e12))
    assert kin.cm_to_lab(2.0, pair) == pytest.approx(2.0, rel=1e-11)


@given(E=energies, xi=ratios)
def test_frame_round_trip(E, xi):
    pair = make_pair(Species("M+", xi), Species("A+", 1.0))
    assert kin.lab_to_cm(kin.cm_to_lab(E, pair), pair) == pytest.approx(E, rel=1e-15)
    assert kin.cm_to_lab(E, pair) == pytest.approx(E * pair.m_mol / pair.mu, rel=1e-12)


def test_turning_point():
    assert kin.closest_approach(0.25, 0.0) == pytest.approx(4.0, rel=1e-15)
    assert kin.closest_approach(0.25, 0.0, q_prod=3) == pytest.approx(12.0, rel=1e-15)


def test_straight_line_limit():
    assert kin.closest_approach(1.0, 1e8) == pytest.approx(1e8, rel=1e-7)


def test_closest_approach_at_two_ev():
    r = kin.closest_approach(ev(2.0), 0.0)
    assert r == pytest.approx(13.6, rel=1e-3)
    assert convert(r, "bohr", "nm") == pytest.approx(0.72, rel=0.01)


def test_peak_field_head_on():
    assert kin.peak_field_cubed(0.3, 0.0) == pytest.approx(0.3**6, rel=1e-14)


def test_peak_field_far_away():
    assert kin.peak_field_cubed(1.0, 1e80) == 0.0


def test_peak_field_reference_point():
    assert kin.peak_field_cubed(1.0, 1.0) == pytest.approx(1 / (0.5 + math.sqrt(1.25)) ** 6, rel=1e-15)


def test_peak_field_coolant_charge():
    # field scales with q_at, the turning point with q_prod
    assert kin.peak_field_cubed(1.0, 2.0, q_at=2, q_prod=2) == pytest.approx(
        8.0 / kin.closest_approach(1.0, 2.0, 2) ** 6, rel=1e-15)


@given(E1=energies, E2=energies, b1=impacts, b2=impacts)
def test_peak_field_monotone(E1, E2, b1, b2):
    Elo, Ehi = sorted((E1, E2))
    blo, bhi = sorted((b1, b2))
    assert kin.peak_field_cubed(Ehi, blo) >= kin.peak_field_cubed(Elo, blo)
    assert kin.peak_field_cubed(Ehi, bhi) <= kin.peak_field_cubed(Ehi, blo)


def test_broadcasting():
    E = np.array([0.1, 0.2])[:, None]
    b = np.array([0.0, 1.0, 2.0])
    assert kin.scattering_angle(E, b).shape == (2, 3)
    assert kin.peak_field_cubed(E, b).shape == (2, 3)
