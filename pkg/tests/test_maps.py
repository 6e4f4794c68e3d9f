import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from hptp_kit import atlas, linalg
from hptp_kit.errors import DimensionMismatch, NonHermitianChoi, NonHPTPInput, SingularMap
from hptp_kit.maps import (
    QuantumMap,
    SignedKrausRep,
    apply,
    choi_distance,
    compose,
    dual,
    from_signed_kraus,
    inverse,
    is_cp,
    is_hp,
    is_tp,
    jordan_hahn,
    replacement_map,
    to_signed_kraus,
    transfer_condition_number,
)

import oracles

PAULI = [
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]]),
    np.diag([1, -1]).astype(complex),
]
ABCD = np.array([[1.0, 2 - 1j], [3 + 0.5j, 4.0]])


def test_choi_layout_matches_loop_oracle(rng):
    u, _ = np.linalg.qr(rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2)))
    f = lambda x: u @ x @ u.conj().T  # noqa: E731
    psi = QuantumMap.from_function(f, 2, 3)
    assert_allclose(psi.choi, oracles.choi_of(f, 2), atol=1e-14)
    x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    assert_allclose(psi(x), oracles.apply_choi(psi.choi, 2, 3, x), atol=1e-14)
    assert_allclose(psi(x), f(x), atol=1e-14)


def test_apply_examples():
    assert_allclose(apply(QuantumMap.identity(2), ABCD), ABCD)
    assert_allclose(apply(atlas.transpose(), ABCD), ABCD.T)
    a, b, c, d = ABCD.ravel()
    assert_allclose(apply(atlas.example2_psi(), ABCD), [[a + 2 * d, b], [c, -d]])
    with pytest.raises(DimensionMismatch):
        apply(atlas.transpose(), np.eye(3))


def test_is_hp_examples():
    assert is_hp(atlas.transpose())
    j = np.zeros((4, 4), dtype=complex)
    j[1, 2] = 1
    assert not is_hp(QuantumMap(2, 2, j))
    assert is_hp(atlas.indefinite_replacement(np.diag([2.0, -1.0])))


def test_is_tp_examples(rng):
    assert is_tp(QuantumMap.identity(3))
    assert is_tp(replacement_map(oracles.haar_density(2, rng), 2))
    assert not is_tp(2 * QuantumMap.identity(2))


def test_is_cp_examples():
    assert not is_cp(atlas.transpose())
    xi = atlas.example1_xi(0.25)
    assert is_cp(xi)
    assert_allclose(np.sort(np.linalg.eigvalsh(xi.choi)), [0.125, 0.625, 0.625, 0.625], atol=1e-12)
    assert is_cp(QuantumMap.identity(2))
    with pytest.raises(NonHermitianChoi):
        is_cp(QuantumMap(2, 2, np.triu(np.ones((4, 4)))))


def test_jordan_hahn_cptp_has_no_negative_part():
    phi = atlas.random_cptp(2, 3, 5)
    jh = jordan_hahn(phi)
    assert abs(jh.p0 - 1) < 1e-12 and jh.p1 == 0 and jh.phi1 is None
    assert choi_distance(jh.phi0, phi) < 1e-12


def test_jordan_hahn_transpose():
    # swap matrix spectrum is (1, 1, 1, -1): Tr Q = 1, divided by n = 2
    assert_allclose(np.linalg.eigvalsh(oracles.swap(2)), [-1, 1, 1, 1])
    jh = jordan_hahn(atlas.transpose())
    assert abs(jh.p1 - 0.5) < 1e-12 and abs(jh.p0 - 1.5) < 1e-12
    assert is_cp(jh.phi0) and is_tp(jh.phi0) and is_cp(jh.phi1) and is_tp(jh.phi1)
    recon = jh.p0 * jh.phi0 - jh.p1 * jh.phi1
    assert choi_distance(recon, atlas.transpose()) < 1e-12


def test_jordan_hahn_example2_and_unbalanced_negative_part():
    for psi in (atlas.example2_psi(), atlas.random_hptp(2, 3, 11)):
        jh = jordan_hahn(psi)
        assert abs(jh.p0 - jh.p1 - 1) < 1e-9
        for part in (jh.phi0, jh.phi1):
            assert is_cp(part) and is_tp(part)
        assert choi_distance(jh.p0 * jh.phi0 - jh.p1 * jh.phi1, psi) < 1e-9


def test_jordan_hahn_needs_hptp():
    with pytest.raises(NonHPTPInput):
        jordan_hahn(2 * QuantumMap.identity(2))


def test_to_signed_kraus_examples():
    rep = to_signed_kraus(QuantumMap.identity(2))
    assert rep.signs == [1]
    op = rep.operators[0]
    assert_allclose(op / op[0, 0], np.eye(2), atol=1e-12)
    assert abs(abs(op[0, 0]) - 1) < 1e-12

    rep = to_signed_kraus(atlas.transpose())
    assert sorted(rep.signs) == [-1, 1, 1, 1]
    assert_allclose(rep(ABCD), ABCD.T, atol=1e-12)

    dep = QuantumMap.from_kraus([p / 2 for p in PAULI])
    back = from_signed_kraus(to_signed_kraus(dep))
    assert choi_distance(back, dep) <= 1e-10
    assert_allclose(dep(ABCD), np.trace(ABCD) * np.eye(2) / 2, atol=1e-12)


def test_from_signed_kraus_examples(rng):
    assert choi_distance(from_signed_kraus(SignedKrausRep.from_pairs([(1, np.eye(3))])), QuantumMap.identity(3)) == 0
    k0 = np.array([[1, 0], [0, 0]], dtype=complex)
    k1 = np.array([[0, 1], [0, 0]], dtype=complex)
    phi = QuantumMap.from_kraus([k0, k1])
    assert is_cp(phi) and is_tp(phi)
    for _ in range(5):
        assert_allclose(phi(oracles.haar_density(2, rng)), k0, atol=1e-12)
    rep = SignedKrausRep.from_pairs([(1, np.sqrt(1.1) * PAULI[0]), (-1, np.sqrt(0.1) * PAULI[3])])
    assert_allclose(rep.normalization(), np.eye(2), atol=1e-15)
    psi = from_signed_kraus(rep)
    assert is_hp(psi) and is_tp(psi) and not is_cp(psi)
    assert abs(rep.p0 - 1.1) < 1e-12 and abs(rep.p1 - 0.1) < 1e-12


def test_from_signed_kraus_dimension_checks():
    with pytest.raises(DimensionMismatch):
        SignedKrausRep.from_pairs([(1, np.eye(2)), (1, np.eye(3))])
    with pytest.raises(ValueError):
        SignedKrausRep.from_pairs([(2, np.eye(2))])


def test_dual_examples(rng):
    assert choi_distance(dual(QuantumMap.identity(3)), QuantumMap.identity(3)) == 0
    sigma = oracles.haar_density(3, rng)
    d = dual(replacement_map(sigma, 2))
    for i in range(3):
        for j in range(3):
            y = oracles.unit(i, j, 3)
            assert_allclose(d(y), np.trace(sigma @ y) * np.eye(2), atol=1e-14)


def test_dual_pairing_qutrit(rng):
    psi = atlas.random_hptp(3, 3, 4)
    d = dual(psi)
    for _ in range(10):
        x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        y = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        assert abs(np.trace(d(y) @ x) - np.trace(y @ psi(x))) <= 1e-10
    assert linalg.max_abs(d(np.eye(3)) - np.eye(3)) < 1e-12


def test_compose_examples(rng):
    t = atlas.transpose()
    assert choi_distance(compose(t, t), QuantumMap.identity(2)) < 1e-15
    assert choi_distance(compose(atlas.example2_psi(), atlas.example2_phi()), atlas.example2_phi()) <= 1e-10
    f = atlas.random_hptp(2, 3, 1)
    assert choi_distance(compose(f, QuantumMap.identity(2)), f) < 1e-14
    g = atlas.random_hptp(3, 2, 2)
    x = rng.normal(size=(3, 3))
    assert_allclose(compose(f, g)(x), f(g(x)), atol=1e-12)
    with pytest.raises(DimensionMismatch):
        compose(f, f)


def test_inverse_examples():
    assert choi_distance(inverse(QuantumMap.identity(2)), QuantumMap.identity(2)) < 1e-15
    for lam in (0.1, 0.25, 1 / 3):
        closed = QuantumMap.from_function(lambda y: (y - (1 - lam) * np.trace(y) * np.eye(2) / 2) / lam, 2)
        inv = inverse(atlas.example1_phi(lam))
        assert choi_distance(inv, closed) < 1e-12
        assert choi_distance(compose(closed, atlas.example1_phi(lam)), QuantumMap.identity(2)) < 1e-12
    with pytest.raises(SingularMap):
        inverse(atlas.example2_phi())
    with pytest.raises(DimensionMismatch):
        inverse(atlas.random_cptp(2, 3, 0))


def test_inverse_preserves_hptp():
    phi = atlas.random_invertible_cptp(3, 8)
    inv = inverse(phi)
    assert is_hp(inv) and is_tp(inv)


def test_quantum_map_validation():
    with pytest.raises(DimensionMismatch):
        QuantumMap(2, 3, np.eye(4))
    psi = QuantumMap.identity(2)
    with pytest.raises(ValueError):
        psi.choi[0, 0] = 3


seeds = st.integers(0, 2**32 - 1)
dims = st.sampled_from([(2, 2), (2, 3), (3, 2), (3, 3)])


@settings(max_examples=40, deadline=None)
@given(seeds, dims)
def test_signed_kraus_roundtrip_property(seed, nm):
    psi = atlas.random_hptp(*nm, seed)
    rep = to_signed_kraus(psi)
    assert choi_distance(from_signed_kraus(rep), psi) <= 1e-9
    assert linalg.max_abs(rep.normalization() - np.eye(nm[0])) <= 1e-9
    assert abs(rep.p0 - rep.p1 - 1) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(seeds, seeds, seeds)
def test_compose_associative_property(s1, s2, s3):
    f, g, h = atlas.random_hptp(3, 2, s1), atlas.random_hptp(3, 3, s2), atlas.random_hptp(2, 3, s3)
    assert choi_distance(compose(compose(f, g), h), compose(f, compose(g, h))) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(seeds, dims)
def test_dual_involution_property(seed, nm):
    psi = atlas.random_hptp(*nm, seed)
    assert choi_distance(dual(dual(psi)), psi) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from([2, 3]))
def test_inverse_both_sides_property(seed, n):
    phi = atlas.random_invertible_cptp(n, seed)
    if transfer_condition_number(phi) >= 1e6:
        return
    inv = inverse(phi)
    ident = QuantumMap.identity(n)
    assert choi_distance(compose(inv, phi), ident) <= 1e-8
    assert choi_distance(compose(phi, inv), ident) <= 1e-8
