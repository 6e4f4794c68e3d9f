import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from hptp_kit import linalg
from hptp_kit.errors import DimensionMismatch, NonHermitianInput, NullRestriction
from hptp_kit.linalg import Tolerances

import oracles

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def test_kron_identity_and_diagonal():
    assert_allclose(linalg.kron(np.eye(2), np.eye(2)), np.eye(4))
    assert_allclose(linalg.kron(np.diag([1, 2]), np.diag([3, 4])), np.diag([3, 4, 6, 8]))


def test_kron_pauli_vec_identity():
    lhs = linalg.kron(X, X) @ linalg.vec(np.eye(2))
    # direct: X I X^T = I
    assert_allclose(lhs, np.array([[1], [0], [0], [1]]))
    assert_allclose(lhs, linalg.vec(X @ np.eye(2) @ X.T))


def test_vec_convention_and_isometry(rng):
    assert_allclose(linalg.vec(np.eye(2)).ravel(), [1, 0, 0, 1])
    e01 = oracles.unit(0, 1, 3)
    expected = np.kron(np.eye(3)[:, [0]], np.eye(3)[:, [1]])
    assert_allclose(linalg.vec(e01), expected)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert abs(np.vdot(linalg.vec(a), linalg.vec(b)) - np.trace(a.conj().T @ b)) < 1e-12
    assert_allclose(linalg.unvec(linalg.vec(a)), a)


def test_unvec_rejects_non_square_length():
    with pytest.raises(DimensionMismatch):
        linalg.unvec(np.ones(5))


def test_partial_trace_examples(rng):
    rho = oracles.haar_density(2, rng)
    sigma = 2.5 * oracles.haar_density(3, rng)
    assert_allclose(linalg.partial_trace(np.kron(rho, sigma), 2, 3, "second"), 2.5 * rho, atol=1e-14)
    assert_allclose(linalg.partial_trace(np.kron(rho, sigma), 2, 3, "first"), sigma, atol=1e-14)
    v = linalg.vec(np.eye(2))
    assert_allclose(linalg.partial_trace(v @ v.conj().T, 2, 2, "first"), np.eye(2))
    h = oracles.random_hermitian(6, rng)
    for which, dims in (("first", (2, 3)), ("second", (3, 2))):
        assert abs(np.trace(linalg.partial_trace(h, *dims, which)) - np.trace(h)) < 1e-12


def test_partial_trace_bad_input():
    with pytest.raises(DimensionMismatch):
        linalg.partial_trace(np.eye(5), 2, 3)
    with pytest.raises(ValueError):
        linalg.partial_trace(np.eye(4), 2, 2, "middle")


def test_eig_hermitian_examples(rng):
    w, _ = linalg.eig_hermitian(np.eye(3))
    assert_allclose(w, [1, 1, 1])
    w, _ = linalg.eig_hermitian(Z)
    assert_allclose(w, [1, -1])
    h = oracles.random_hermitian(8, rng)
    w, v = linalg.eig_hermitian(h)
    assert np.all(np.diff(w) <= 0)
    assert linalg.max_abs(v @ np.diag(w) @ v.conj().T - h) <= 1e-10
    assert linalg.max_abs(v.conj().T @ v - np.eye(8)) <= 1e-10


def test_eig_hermitian_rejects_and_is_deterministic(rng):
    with pytest.raises(NonHermitianInput):
        linalg.eig_hermitian(np.array([[0, 1], [0, 0]]))
    h = oracles.random_hermitian(5, rng)
    w1, v1 = linalg.eig_hermitian(h)
    w2, v2 = linalg.eig_hermitian(h)
    assert np.array_equal(w1, w2) and np.array_equal(v1, v2)


def test_is_psd():
    assert linalg.is_psd(np.eye(3))
    assert not linalg.is_psd(np.diag([1, -0.5]))
    with pytest.raises(NonHermitianInput):
        linalg.is_psd(np.array([[1, 1], [0, 1]]))


def test_is_psd_example1_xi_boundary():
    # J(Xi) at lam = 1/3 has eigenvalues 2/3 (x3) and 0
    lam = 1 / 3
    t = oracles.swap(2)
    j = lam * t + (1 - lam) * np.eye(4) / 2
    assert linalg.is_psd(j)
    assert abs(linalg.min_eigenvalue(j)) < 1e-12


def test_polar_unitary_examples(rng):
    u0, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    assert_allclose(linalg.polar_unitary_on_subspace(u0, np.eye(3)), u0, atol=1e-12)
    assert_allclose(linalg.polar_unitary_on_subspace(2 * np.eye(3), np.eye(3)), np.eye(3), atol=1e-12)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    p = np.diag([1, 1, 0, 0]).astype(complex)
    u = linalg.polar_unitary_on_subspace(a, p)
    assert linalg.max_abs(u.conj().T @ u - np.eye(4)) <= 1e-10
    assert linalg.max_abs(a @ p - u @ linalg.sqrtm_psd(p @ a.conj().T @ a @ p)) <= 1e-10


def test_polar_null_restriction():
    p = np.diag([1, 0]).astype(complex)
    with pytest.raises(NullRestriction):
        linalg.polar_unitary_on_subspace(np.diag([0, 1]), p)


def test_tolerances_validated():
    assert Tolerances().sdp_tol == 1e-7
    with pytest.raises(ValueError):
        Tolerances(eig_tol=-1)


def test_orthonormal_completion_deterministic(rng):
    q, _ = np.linalg.qr(rng.normal(size=(5, 2)))
    c = linalg.orthonormal_completion(q)
    full = np.hstack([q, c])
    assert linalg.max_abs(full.conj().T @ full - np.eye(5)) < 1e-12
    assert np.array_equal(c, linalg.orthonormal_completion(q))


entries = st.floats(-1, 1, allow_nan=False)


def complex_matrix(r, c):
    return st.lists(entries, min_size=2 * r * c, max_size=2 * r * c).map(
        lambda xs: (np.array(xs[: r * c]) + 1j * np.array(xs[r * c :])).reshape(r, c)
    )


@settings(max_examples=60, deadline=None)
@given(complex_matrix(3, 4))
def test_vec_roundtrip_property(a):
    assert linalg.max_abs(linalg.unvec(linalg.vec(a), a.shape) - a) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3]).flatmap(lambda d: st.tuples(complex_matrix(d, d), complex_matrix(d, d), complex_matrix(d, d))))
def test_transfer_identity_property(abc):
    a, b, c = abc
    assert linalg.max_abs(np.kron(a, b) @ linalg.vec(c) - linalg.vec(a @ c @ b.T)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(complex_matrix(6, 6), complex_matrix(6, 6), st.floats(-2, 2))
def test_partial_trace_linear_and_trace_preserving(a, b, s):
    for which in ("first", "second"):
        lhs = linalg.partial_trace(a + s * b, 2, 3, which)
        rhs = linalg.partial_trace(a, 2, 3, which) + s * linalg.partial_trace(b, 2, 3, which)
        assert linalg.max_abs(lhs - rhs) <= 1e-12
        assert abs(np.trace(lhs) - np.trace(a + s * b)) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_eig_2x2_matches_characteristic_roots(a, d, br, bi):
    h = np.array([[a, br + 1j * bi], [br - 1j * bi, d]])
    disc = np.sqrt(((a - d) / 2) ** 2 + br**2 + bi**2)
    w, _ = linalg.eig_hermitian(h)
    assert_allclose(w, [(a + d) / 2 + disc, (a + d) / 2 - disc], atol=1e-12)
