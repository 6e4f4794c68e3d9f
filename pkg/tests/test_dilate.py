import numpy as np
import pytest
from numpy.testing import assert_allclose

from hptp_kit import atlas, linalg
from hptp_kit.decompose import SpDecomposition, sp_decompose
from hptp_kit.dilate import (
    ContextCircuit,
    Dilation,
    channel_dilation,
    env_first_to_system_first,
    example1_circuit,
    example1_dilations,
    example1_unitaries,
    realize_factorization,
    realize_sp_map,
    simulate_context_circuit,
    stinespring,
    swap_circuit,
)
from hptp_kit.errors import DimensionMismatch, NotCPTP, ParameterOutOfRange
from hptp_kit.maps import QuantumMap, SignedKrausRep, choi_distance, to_signed_kraus

import oracles


def env_first_channel(u, rho, d_env):
    """Tr_E[U (|0><0|_E (x) rho) U^dag] with the environment as first factor, by loops."""
    n = rho.shape[0]
    e0 = np.zeros((d_env, d_env))
    e0[0, 0] = 1
    joint = u @ np.kron(e0, rho) @ u.conj().T
    out = np.zeros((n, n), dtype=complex)
    for k in range(d_env):
        out += joint[k * n:(k + 1) * n, k * n:(k + 1) * n]
    return out


def basis_states(n):
    return [oracles.unit(i, j, n) for i in range(n) for j in range(n)]


def test_single_unitary_dilation(rng):
    u, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    d = stinespring([u])
    assert d.env_dim == 1
    assert_allclose(d.unitary, u, atol=1e-12)


def test_example2_phi_dilation(rng):
    k0 = np.array([[1, 0], [0, 0]], dtype=complex)
    k1 = np.array([[0, 1], [0, 0]], dtype=complex)
    d = stinespring([k0, k1])
    assert d.unitary.shape == (4, 4)
    assert d.unitarity_residual() < 1e-12
    for _ in range(5):
        assert_allclose(d.apply(oracles.haar_density(2, rng)), k0, atol=1e-12)


def test_random_channel_dilation():
    for seed in range(5):
        phi = atlas.random_cptp(2, 2, seed)
        d = channel_dilation(phi)
        assert d.unitarity_residual() <= 1e-10
        assert max(linalg.max_abs(d.apply(e) - phi(e)) for e in basis_states(2)) <= 1e-10
        padded = channel_dilation(phi, env_dim=6)
        assert padded.env_dim == 6 and choi_distance(padded.channel(), phi) <= 1e-10


def test_stinespring_rejects_non_channels():
    with pytest.raises(NotCPTP):
        stinespring(to_signed_kraus(atlas.transpose()))
    with pytest.raises(NotCPTP):
        stinespring([np.eye(2), np.eye(2)])
    with pytest.raises(NotCPTP):
        channel_dilation(atlas.transpose())
    with pytest.raises(DimensionMismatch):
        stinespring([np.eye(2)], env_dim=0)


@pytest.mark.parametrize("lam", [0.1, 0.25, 1 / 3])
def test_example1_blocks(lam):
    u_phi, u_xi = example1_unitaries(lam)
    for u in (u_phi, u_xi):
        assert u.shape == (8, 8)
        assert linalg.max_abs(u.conj().T @ u - np.eye(8)) <= 1e-12
    for e in basis_states(2):
        t = np.trace(e) * np.eye(2) / 2
        assert linalg.max_abs(env_first_channel(u_phi, e, 4) - (lam * e + (1 - lam) * t)) <= 1e-12
        assert linalg.max_abs(env_first_channel(u_xi, e, 4) - (lam * e.T + (1 - lam) * t)) <= 1e-12


def test_example1_dilations_system_first():
    dphi, dxi = example1_dilations(0.2)
    assert choi_distance(dphi.channel(), atlas.example1_phi(0.2)) <= 1e-12
    assert choi_distance(dxi.channel(), atlas.example1_xi(0.2)) <= 1e-12


def test_example1_range():
    with pytest.raises(ParameterOutOfRange):
        example1_unitaries(0.5)


def test_reordering_roundtrip(rng):
    a = rng.normal(size=(6, 6))
    # E (x) S -> S (x) E on a product operator
    e, s = rng.normal(size=(3, 3)), rng.normal(size=(2, 2))
    assert_allclose(env_first_to_system_first(np.kron(e, s), 2, 3), np.kron(s, e), atol=1e-14)
    back = env_first_to_system_first(env_first_to_system_first(a, 2, 3), 3, 2)
    assert_allclose(back, a)


def test_swap_circuit(rng):
    env = oracles.haar_density(2, rng)
    c = swap_circuit(env)
    firsts = []
    for _ in range(5):
        rho = oracles.haar_density(2, rng)
        r1, r2 = simulate_context_circuit(c, rho)
        assert_allclose(r1, env, atol=1e-12)
        assert_allclose(r2, rho, atol=1e-12)
        firsts.append(r1)
    # the intermediate state carries no information about the input
    assert max(linalg.max_abs(f - firsts[0]) for f in firsts) < 1e-14


@pytest.mark.parametrize("lam", [0.2, 1 / 3])
def test_example1_circuit_realizes_transpose(lam, rng):
    c = example1_circuit(lam)
    for _ in range(20):
        rho = oracles.haar_density(2, rng)
        r1, r2 = simulate_context_circuit(c, rho)
        assert linalg.max_abs(r2 - r1.T) <= 1e-9


def test_identity_context(rng):
    c = ContextCircuit(Dilation(np.eye(4), 2), np.eye(4))
    rho = oracles.haar_density(2, rng)
    r1, r2 = simulate_context_circuit(c, rho)
    assert_allclose(r1, rho, atol=1e-14)
    assert_allclose(r2, rho, atol=1e-14)
    with pytest.raises(DimensionMismatch):
        simulate_context_circuit(c, np.eye(3) / 3)
    with pytest.raises(DimensionMismatch):
        ContextCircuit(Dilation(np.eye(4), 2), np.eye(8))


def test_joint_state_conservation(rng):
    c = example1_circuit(0.3)
    rho = oracles.haar_density(2, rng)
    joint = c.u_c.unitary @ np.kron(rho, c.u_c.env_state) @ c.u_c.unitary.conj().T
    joint = c.u @ joint @ c.u.conj().T
    assert abs(np.trace(joint) - 1) <= 1e-12
    assert np.linalg.eigvalsh(joint)[0] >= -1e-12


def test_realize_transpose_decomposition(rng):
    d = sp_decompose(atlas.transpose(), np.eye(2) / 2)
    c = realize_sp_map(d)
    for _ in range(10):
        r1, r2 = simulate_context_circuit(c, oracles.haar_density(2, rng))
        assert linalg.max_abs(r2 - r1.T) <= 1e-9


def test_realize_identity_decomposition(rng):
    ident = QuantumMap.identity(2)
    c = realize_sp_map(SpDecomposition(ident, ident, 1.0, np.eye(2) / 2))
    rho = oracles.haar_density(2, rng)
    r1, r2 = simulate_context_circuit(c, rho)
    assert_allclose(r2, r1, atol=1e-12)


def test_realize_random_sp(rng):
    for seed in range(3):
        psi = atlas.random_sp(2, seed)
        d = sp_decompose(psi)
        c = realize_sp_map(d)
        resid = 0.0
        for _ in range(50):
            r1, r2 = simulate_context_circuit(c, oracles.haar_density(2, rng))
            resid = max(resid, linalg.max_abs(psi(r1) - r2))
        assert resid <= 1e-8
        # rho -> rho' is Phi and rho -> rho'' is Xi on an operator basis
        for e in basis_states(2):
            r1, r2 = simulate_context_circuit(c, e)
            assert linalg.max_abs(r1 - d.phi(e)) <= 1e-9
            assert linalg.max_abs(r2 - d.xi(e)) <= 1e-9


def test_realize_factorization_rejects_non_channel():
    with pytest.raises(NotCPTP):
        realize_factorization(atlas.transpose(), QuantumMap.identity(2))


def test_dilation_validation():
    with pytest.raises(DimensionMismatch):
        Dilation(np.eye(5), 2)
    with pytest.raises(DimensionMismatch):
        Dilation(np.eye(4), 2, np.eye(3) / 3)
    rep = SignedKrausRep.from_pairs([(1, np.eye(2))])
    assert stinespring(rep).env_dim == 1
