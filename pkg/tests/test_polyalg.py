from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specdyn import fock
from specdyn.polyalg import (
    SectorLabel, build_supd11_rep, build_supd11_rep_fock, build_supd2_rep, build_supd2_rep_fock,
    casimir_check, falling_factorial, green_nilpotency_check, hp_map, nested_ad, nilpotency_order,
    phi_eval, psi_eval, verify_commutation, verify_su2, w_operators,
)

sectors = st.integers(2, 3).flatmap(
    lambda n: st.builds(SectorLabel, st.just(n), st.integers(0, n - 1), st.integers(0, 12)))


def test_falling_factorial():
    assert falling_factorial(5, 3) == 60
    assert falling_factorial(Fraction(1, 2), 2) == Fraction(-1, 4)
    assert falling_factorial(1, 2) == 0
    assert falling_factorial(7, 0) == 1


def test_psi_lowest_vector_vanishes():
    sec = SectorLabel(2, 0, 2)
    assert (sec.l0, sec.l1) == (Fraction(-2, 3), Fraction(4, 3))
    assert psi_eval(2, sec.l0, sec.l1) == 0


def test_psi_one_step_up_matches_normal_ordered_value():
    # Y+Y- on |N1=2, N0=1> equals (N0 + 1) N1 (N1 - 1) = 2 * 2 * 1
    assert psi_eval(2, Fraction(1, 3), Fraction(4, 3)) == 4


def test_psi_terminates_above_top():
    sec = SectorLabel(2, 0, 1)
    top = sec.l0 + sec.s + 1
    assert top == Fraction(5, 3)
    assert psi_eval(2, top, sec.l1) == 0
    # the value written with l1 = 1/3 is not a termination point
    assert psi_eval(2, top, Fraction(1, 3)) != 0


def test_phi_is_first_difference():
    for y in (Fraction(-1, 3), Fraction(2, 3), Fraction(5, 4)):
        assert phi_eval(3, y, Fraction(7, 4)) == psi_eval(3, y + 1, Fraction(7, 4)) - psi_eval(3, y, Fraction(7, 4))


@settings(max_examples=60, deadline=None)
@given(sectors)
def test_sector_label_identities(sec):
    assert sec.l1 - sec.l0 == sec.s
    assert sec.n * sec.l0 + sec.l1 == sec.kappa
    assert sec.dim == sec.s + 1
    for n0, n1 in sec.occupations():
        assert (n1 - sec.kappa) % sec.n == 0
        assert n0 + (n1 - sec.kappa) // sec.n == sec.s


def test_invalid_sector_labels():
    with pytest.raises(ValueError):
        SectorLabel(2, 2, 0)
    with pytest.raises(ValueError):
        SectorLabel(1, 0, 0)
    with pytest.raises(ValueError):
        SectorLabel(3, 0, -1)


def test_two_by_two_sector_by_hand():
    rep = build_supd2_rep(SectorLabel(2, 0, 1))
    # |N0=1, N1=0> -> |N0=0, N1=2> under a0 (a1^+)^2 has amplitude sqrt(2)
    np.testing.assert_allclose(rep.Yplus.data, [[0, 0], [np.sqrt(2), 0]], atol=1e-15)
    np.testing.assert_allclose(rep.Yminus.data, rep.Yplus.data.T, atol=0)
    assert rep.levels == (Fraction(-1, 3), Fraction(2, 3))
    report = verify_commutation(rep)
    assert report.passed and report.max_residual <= 1e-12


def test_one_dimensional_sector_has_zero_residual():
    rep = build_supd2_rep(SectorLabel(2, 0, 0))
    assert rep.Yplus.max_abs() == 0
    assert verify_commutation(rep).max_residual == 0
    assert casimir_check(rep).deviation == 0
    assert casimir_check(rep).value == 0


def test_six_dimensional_n3_sector():
    rep = build_supd2_rep(SectorLabel(3, 2, 5))
    assert rep.basis.dim == 6
    assert verify_commutation(rep).max_residual <= 1e-10


@settings(max_examples=25, deadline=None)
@given(sectors)
def test_top_vector_is_annihilated_by_raising(sec):
    rep = build_supd2_rep(sec)
    top = np.zeros(sec.dim)
    top[-1] = 1
    assert np.all(rep.Yplus.data @ top == 0)
    bottom = np.zeros(sec.dim)
    bottom[0] = 1
    assert np.all(rep.Yminus.data @ bottom == 0)


@settings(max_examples=25, deadline=None)
@given(sectors)
def test_structure_build_matches_fock_build(sec):
    a = build_supd2_rep(sec)
    b = build_supd2_rep_fock(sec)
    np.testing.assert_allclose(a.Yplus.data, b.Yplus.data, atol=1e-12 * max(1.0, np.abs(a.Yplus.data).max()))
    np.testing.assert_allclose(a.Y0.data, b.Y0.data, atol=1e-12)
    assert a.ladder_sq == b.ladder_sq


@settings(max_examples=25, deadline=None)
@given(sectors)
def test_casimir_is_zero_on_physical_sectors(sec):
    res = casimir_check(build_supd2_rep(sec))
    assert res.expected == 0
    assert abs(res.value) <= 1e-10
    assert res.deviation <= 1e-10


def test_casimir_n2_kappa1():
    res = casimir_check(build_supd2_rep(SectorLabel(2, 1, 3)))
    assert res.expected == 4 * falling_factorial(1, 2) == 0
    assert res.deviation <= 1e-10


def test_float64_storage_floor_is_reported_but_not_decisive():
    rep = build_supd2_rep(SectorLabel(3, 2, 20))
    report = verify_commutation(rep)
    assert report.passed
    assert report.max_residual <= 1e-20
    plain = verify_commutation(rep, digits=None)
    assert plain.digits is None
    # float64 storage carries the ulp error of large square roots
    assert max(report.float64_residuals.values()) == pytest.approx(plain.max_residual)


def test_hp_map_bottom_norm_and_su2():
    sec = SectorLabel(3, 1, 4)
    hp = hp_map(build_supd2_rep(sec))
    assert hp.J_value == 2
    np.testing.assert_allclose(np.diag(hp.V0.data).real, np.arange(-2, 3), atol=1e-12)
    bottom = np.zeros(sec.dim)
    bottom[0] = 1
    assert np.linalg.norm(hp.Vplus.data @ bottom) ** 2 == pytest.approx(2 * hp.J_value)
    V = hp.Vminus.data @ hp.Vplus.data - hp.Vplus.data @ hp.Vminus.data + 2 * hp.V0.data
    assert np.abs(V).max() <= 1e-10
    assert verify_su2(hp).passed


@settings(max_examples=20, deadline=None)
@given(sectors)
def test_hp_map_gives_standard_spin_matrix_elements(sec):
    hp = hp_map(build_supd2_rep(sec))
    j = float(sec.j)
    mvals = np.arange(-j, j)  # lower weights
    expected = np.sqrt((j - mvals) * (j + mvals + 1))
    np.testing.assert_allclose(np.diag(hp.Vplus.data, -1).real, expected, atol=1e-12)


def test_one_mode_pseudovacuum_and_builds():
    rep = build_supd11_rep(3, 1, 30)
    vac = np.zeros(rep.basis.dim)
    vac[0] = 1
    assert np.all(rep.Yminus.data @ vac == 0)
    other = build_supd11_rep_fock(3, 1, 30)
    np.testing.assert_allclose(rep.Yplus.data, other.Yplus.data, rtol=1e-12)


def test_w_raising_from_n4_to_n7():
    w = w_operators(3, 1, 30)
    N = w.basis.photon_numbers()
    i4, i7 = np.flatnonzero(N == 4)[0], np.flatnonzero(N == 7)[0]
    assert w.Wplus.data[i7, i4] == pytest.approx(np.sqrt(2), abs=1e-14)
    vac = np.zeros(w.basis.dim)
    vac[0] = 1
    np.testing.assert_allclose(w.Wminus.data @ vac, 0, atol=0)


@pytest.mark.parametrize("n, kappa", [(2, 0), (2, 1), (3, 0), (3, 1), (3, 2)])
def test_w_canonical_and_cluster_number(n, kappa):
    w = w_operators(n, kappa, 40)
    c = w.Wminus.data @ w.Wplus.data - w.Wplus.data @ w.Wminus.data - np.eye(w.basis.dim)
    mask = w.interior()
    assert np.abs(c[mask]).max() <= 1e-10
    N = w.basis.photon_numbers()
    np.testing.assert_array_equal(np.diag(w.NW.data).real, N // n)


def test_w_cluster_number_n2_even_class():
    w = w_operators(2, 0, 8)
    np.testing.assert_array_equal(w.basis.photon_numbers(), [0, 2, 4, 6, 8])
    np.testing.assert_array_equal(np.diag(w.NW.data).real, [0, 1, 2, 3, 4])


@pytest.mark.parametrize("n", [2, 3])
def test_nilpotency_one_mode(n):
    rep = build_supd11_rep(n, 0, 60)
    assert nilpotency_order(rep) == n + 1
    report = green_nilpotency_check(rep)
    assert report.residual <= 1e-8
    assert report.previous_norm > 1e-3


def test_nilpotency_two_mode_sector_order():
    rep = build_supd2_rep(SectorLabel(2, 1, 12))
    assert nilpotency_order(rep) == 4
    assert green_nilpotency_check(rep).passed


def test_nested_ad_order_zero_is_raising():
    rep = build_supd2_rep(SectorLabel(2, 0, 3))
    np.testing.assert_array_equal(nested_ad(rep, 0).data, rep.Yplus.data)


def test_algebra_rep_to_json():
    rep = build_supd2_rep(SectorLabel(2, 0, 1))
    js = rep.to_json()
    assert js["l0"] == [-1, 3] and js["l1"] == [2, 3]
    assert len(js["Yplus"]) == 2


def test_sector_operators_live_on_sector_basis():
    rep = build_supd2_rep(SectorLabel(2, 0, 2))
    other = build_supd2_rep(SectorLabel(2, 0, 3))
    with pytest.raises(fock.BasisMismatchError):
        rep.Yplus @ other.Yplus
