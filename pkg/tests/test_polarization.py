import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from specdyn import fock
from specdyn import polarization as pol


@pytest.fixture(scope="module")
def m1():
    B = pol.build_polarized_basis(1, 6)
    return B, pol.build_quasispin(B), pol.build_clusters(B)


@pytest.fixture(scope="module")
def m2():
    B = pol.build_polarized_basis(2, 6)
    return B, pol.build_quasispin(B), pol.build_clusters(B)


def test_mode_layout():
    B = pol.build_polarized_basis(2, 2)
    assert B.fock.mode_count == 4
    assert [B.mode(0, "+"), B.mode(0, "-"), B.mode(1, "+"), B.mode(1, "-")] == [0, 1, 2, 3]
    assert B.occupations([1, 0], [0, 1]) == (1, 0, 0, 1)
    with pytest.raises(ValueError):
        pol.build_polarized_basis(0, 2)
    with pytest.raises(ValueError):
        pol.polarized_basis_of(fock.build_basis(3, 2))


def test_quasispin_elementary_actions(m1):
    B, qs, _ = m1
    np.testing.assert_allclose(qs.P0.data @ B.vector([1], [0]), 0.5 * B.vector([1], [0]))
    np.testing.assert_allclose(qs.Pplus.data @ B.vector([0], [1]), B.vector([1], [0]))


def test_quasispin_closure_and_square(m2):
    B, qs, _ = m2
    inner = B.fock.interior(2)
    assert (fock.commutator(qs.P0, qs.Pplus) - qs.Pplus).max_abs(inner) <= 1e-12
    assert (fock.commutator(qs.P0, qs.Pminus) + qs.Pminus).max_abs(inner) <= 1e-12
    assert (fock.commutator(qs.Pplus, qs.Pminus) - qs.P0 * 2).max_abs(inner) <= 1e-12
    rebuilt = qs.P0 @ qs.P0 + (qs.Pplus @ qs.Pminus + qs.Pminus @ qs.Pplus) * 0.5
    np.testing.assert_allclose(qs.Psq.data, rebuilt.data, atol=1e-12)
    # Cartesian components
    np.testing.assert_allclose(qs.P1.data, 0.5 * (qs.Pplus.data + qs.Pminus.data), atol=0)
    np.testing.assert_allclose(qs.P2.data, (qs.Pplus.data - qs.Pminus.data) / 2j, atol=0)


def test_two_photon_spin_content(m2):
    B, qs, _ = m2
    idx = np.flatnonzero(B.photon_numbers() == 2)
    assert idx.size == 10
    w = np.linalg.eigvalsh(qs.Psq.data[np.ix_(idx, idx)])
    np.testing.assert_allclose(np.unique(np.round(w, 10)), [0.0, 2.0])
    assert pol.numeric_multiplicities(qs, B, 2) == {1.0: 3, 0.0: 1}


def test_cluster_commutants(m2):
    B, qs, cl = m2
    inner = B.fock.interior(2)
    for X in cl.Xplus.values():
        for P in (qs.P0, qs.Pplus, qs.Pminus):
            assert fock.commutator(P, X).max_abs(inner) <= 1e-12
    for Y in cl.Yplus.values():
        assert fock.commutator(qs.P0, Y).max_abs(inner) <= 1e-12


def test_cluster_actions_on_vacuum(m2):
    B, qs, cl = m2
    vac = B.fock.basis_vector([0, 0, 0, 0])
    X12 = cl.Xplus[(0, 1)].data
    assert np.abs(fock.commutator(qs.Pplus, cl.Xplus[(0, 1)]).data @ vac).max() == 0
    assert np.linalg.norm(X12 @ vac) ** 2 == pytest.approx(2)
    np.testing.assert_allclose(cl.Yplus[(0, 0)].data @ vac, B.vector([1, 0], [1, 0]))
    # the singlet pair vanishes on a single spatial mode
    assert cl.Xplus[(0, 0)].max_abs() == 0


def test_polarization_degree(m1):
    B, qs, cl = m1
    assert pol.polarization_degree(B.vector([1], [0]), qs) == pytest.approx(1, abs=1e-10)
    assert pol.polarization_degree(B.vector([0], [0]), qs) == 0
    assert pol.polarization_degree(B.vector([0], [3]), qs) == pytest.approx(1, abs=1e-10)
    assert pol.polarization_degree(B.vector([1], [1]), qs) == pytest.approx(0, abs=1e-12)


def test_singlet_has_no_polarization(m2):
    B, qs, cl = m2
    st1 = pol.singlet_power(cl, B, 1)
    assert pol.polarization_degree(st1, qs) <= 1e-12
    prof = pol.moment_profile(st1, qs, 6)
    assert max(abs(v) for v in prof.values()) <= 1e-9


@pytest.mark.parametrize("k", [1, 2, 3])
def test_singlet_powers_are_p_scalar(m2, k):
    B, qs, cl = m2
    rpt = pol.classify_ul(pol.singlet_power(cl, B, k), qs, S=6, sample_count=32, seed=3)
    assert rpt.verdict == "P-scalar"
    assert max(abs(v) for v in rpt.moments.values()) <= 1e-9
    assert max(rpt.invariance_residuals["P"]) <= 1e-8


def test_singlet_power_beyond_truncation(m2):
    B, _, cl = m2
    with pytest.raises(ValueError):
        pol.singlet_power(cl, B, 4)


def test_tmsv_vacuum_and_support():
    B = pol.build_polarized_basis(1, 30)
    np.testing.assert_allclose(pol.tmsv_state(0.0, B), B.vector([0], [0]))
    qs = pol.build_quasispin(B)
    t = pol.tmsv_state(0.5, B)
    assert np.max(np.abs(qs.P0.data @ t)) == 0


def test_tmsv_matches_dense_exponential():
    beta = 0.5 * np.exp(0.3j)
    B = pol.build_polarized_basis(1, 30)
    big = pol.build_polarized_basis(1, 56)
    Y = pol.build_clusters(big).Yplus[(0, 0)].data
    # span{|k,k>} is invariant under the squeeze generator; exponentiate on that block
    diag_states = [big.fock.index((k, k)) for k in range(29)]
    G = beta * Y - np.conj(beta) * Y.conj().T
    block = G[np.ix_(diag_states, diag_states)]
    assert np.abs(G[:, diag_states[:-1]]).sum() == pytest.approx(np.abs(block[:, :-1]).sum())
    ref = expm(block)[:, 0]
    psi = pol.tmsv_state(beta, B)
    got = psi[[B.fock.index((k, k)) for k in range(16)]]
    assert np.linalg.norm(psi) ** 2 == pytest.approx(np.linalg.norm(got) ** 2, abs=1e-15)
    np.testing.assert_allclose(got / np.linalg.norm(ref[:16]), ref[:16] / np.linalg.norm(ref[:16]), atol=1e-10)


def test_tmsv_leakage_guard():
    with pytest.raises(ValueError):
        pol.tmsv_state(2.0, pol.build_polarized_basis(1, 6))


def test_tmsv_is_p0_scalar():
    B = pol.build_polarized_basis(1, 30)
    qs = pol.build_quasispin(B)
    rpt = pol.classify_ul(pol.tmsv_state(0.5, B), qs, S=6, seed=7)
    assert rpt.verdict == "P0-scalar"
    assert all(rpt.moments[(0, s)] == 0.0 for s in range(1, 7))
    assert rpt.moments[(1, 2)] > 1e-3


def test_single_photon_is_polarized(m1):
    B, qs, _ = m1
    assert pol.classify_ul(B.vector([1], [0]), qs).verdict == "polarized"


def test_equal_mixture_of_single_photons(m1):
    B, qs, _ = m1
    a, b = B.vector([1], [0]), B.vector([0], [1])
    rho = 0.5 * (np.outer(a, a.conj()) + np.outer(b, b.conj()))
    rpt = pol.classify_ul(rho, qs)
    assert all(abs(rpt.moments[(k, 1)]) <= 1e-12 for k in range(3))
    assert rpt.moments[(0, 2)] == pytest.approx(0.25)
    # the mixture is the identity on the one-photon doublet, hence invariant
    assert max(rpt.invariance_residuals["P"]) <= 1e-12
    assert rpt.verdict == "strong-UL-invariance"


def test_weak_ul_state(m1):
    B, qs, _ = m1
    psi = (B.vector([2], [0]) + B.vector([0], [2])) / np.sqrt(2)
    rpt = pol.classify_ul(psi, qs)
    assert rpt.verdict == "weak-UL"
    assert max(rpt.first_moment_residuals) <= rpt.tol
    assert max(rpt.invariance_residuals["P"]) > 1e-3
    js = rpt.to_json()
    assert js["verdict"] == "weak-UL" and "P0^2" in js["moments"]


def test_classify_is_deterministic_for_fixed_seed(m1):
    B, qs, _ = m1
    psi = (B.vector([2], [1]) + 1j * B.vector([1], [2])) / np.sqrt(2)
    a = pol.classify_ul(psi, qs, seed=11).to_json()
    b = pol.classify_ul(psi, qs, seed=11).to_json()
    assert a == b


def test_classify_rejects_non_density():
    B = pol.build_polarized_basis(1, 2)
    qs = pol.build_quasispin(B)
    with pytest.raises(ValueError):
        pol.classify_ul(2 * np.eye(B.dim), qs)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_shell_rotations_match_dense_exponential(seed):
    B = pol.build_polarized_basis(1, 5)
    qs = pol.build_quasispin(B)
    rot = pol.ShellRotations(qs, B.photon_numbers())
    angle, axis = pol.haar_su2(np.random.default_rng(seed))
    np.testing.assert_allclose(rot.element(angle, axis), pol.su2_element(qs, angle, axis), atol=1e-12)


def test_haar_axis_is_unit(m1):
    rng = np.random.default_rng(0)
    for _ in range(20):
        angle, axis = pol.haar_su2(rng)
        assert 0 <= angle <= 2 * np.pi
        assert np.linalg.norm(axis) == pytest.approx(1)


def test_p2_flip_equals_dense(m1):
    B, qs, _ = m1
    rot = pol.ShellRotations(qs, B.photon_numbers())
    np.testing.assert_allclose(rot.p2_flip(), expm(1j * np.pi * qs.P2.data), atol=1e-12)


@pytest.mark.parametrize("m", [1, 2])
def test_duality_tables(m):
    B = pol.build_polarized_basis(m, 8)
    rep = pol.duality_check(B, pol.build_quasispin(B), pol.build_clusters(B), 6)
    assert rep.commutant_residual <= 1e-12
    assert rep.tables_match
    for N in range(7):
        assert rep.multiplicities[N] == pol.character_multiplicities(m, N)


def test_one_mode_blocks_are_single_multiplets():
    for N in range(7):
        assert pol.character_multiplicities(1, N) == {N / 2: 1}


def test_character_count_oracle_by_brute_force():
    # count helicity weights by enumerating every occupation vector of the shell
    from itertools import product
    for m in (1, 2, 3):
        for N in range(5):
            c = {}
            for occ in product(range(N + 1), repeat=2 * m):
                if sum(occ) != N:
                    continue
                mu2 = sum(occ[0::2]) - sum(occ[1::2])
                c[mu2] = c.get(mu2, 0) + 1
            want = {p2 / 2: c.get(p2, 0) - c.get(p2 + 2, 0) for p2 in range(N % 2, N + 1, 2)}
            want = {k: v for k, v in want.items() if v}
            assert pol.character_multiplicities(m, N) == want


def test_e_operator_commutes_with_raising(m2):
    B, qs, cl = m2
    inner = B.fock.interior(2)
    assert fock.commutator(qs.Pplus, cl.E[(0, 1)]).max_abs(inner) <= 1e-12


def test_quadratic_free_limit(m2):
    B = m2[0]
    H = pol.quadratic_hamiltonian([1.0, 2.5], np.zeros((2, 2, 2, 2)), B)
    np.testing.assert_allclose(np.diag(H.data).real, B.fock.states @ np.array([1.0, 1.0, 2.5, 2.5]))
    with pytest.raises(ValueError):
        pol.quadratic_hamiltonian([1.0], np.zeros((2, 2, 2, 2)), B)


def test_single_polarization_squeezer_keeps_parity():
    B = pol.build_polarized_basis(1, 10)
    g = np.zeros((2, 2, 1, 1), dtype=complex)
    g[0, 0, 0, 0] = 0.3 - 0.1j
    H = pol.quadratic_hamiltonian([1.2], g, B)
    parity = fock.diagonal(B.fock, (-1.0) ** B.fock.states[:, 0])
    assert fock.commutator(H, parity).max_abs() <= 1e-12


def _y_preset_overlap(beta_of_t):
    B = pol.build_polarized_basis(1, 24)
    g = 0.5
    H = pol.quadratic_hamiltonian([0.0], pol.cluster_preset(np.array([[g]]), "Y"), B)
    vac = B.fock.basis_vector([0, 0])
    worst = 0.0
    for t in (0.05, 0.1, 0.2):
        psi = expm(-1j * t * H.data) @ vac
        worst = max(worst, 1 - abs(np.vdot(pol.tmsv_state(beta_of_t(g, t), B), psi)) ** 2)
    return worst


def test_y_preset_generates_tmsv():
    assert _y_preset_overlap(lambda g, t: -2j * g * t) <= 1e-6


def test_half_squeezing_parameter_does_not_match_y_preset():
    assert _y_preset_overlap(lambda g, t: -1j * g * t) > 1e-4


def test_cluster_presets():
    gt = np.array([[0.2]])
    X = pol.cluster_preset(gt, "X")
    Y = pol.cluster_preset(gt, "Y")
    assert X[0, 1, 0, 0] == -X[1, 0, 0, 0] == 0.2
    assert Y[0, 1, 0, 0] == Y[1, 0, 0, 0] == 0.2
    with pytest.raises(ValueError):
        pol.cluster_preset(gt, "Z")


def test_x_preset_preserves_p_scalar_vacuum():
    B = pol.build_polarized_basis(2, 6)
    qs = pol.build_quasispin(B)
    gt = np.array([[0.0, 0.1], [0.0, 0.0]])
    H = pol.quadratic_hamiltonian([0.0, 0.0], pol.cluster_preset(gt, "X"), B)
    psi = expm(-1j * 0.5 * H.data) @ B.fock.basis_vector([0, 0, 0, 0])
    assert pol.shell_leakage(B, psi) <= 1e-6
    inner = B.fock.interior(2)
    for P in (qs.P0, qs.Pplus, qs.Pminus):
        assert fock.commutator(P, H).max_abs(inner) <= 1e-12
