import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from hptp_kit import atlas, linalg
from hptp_kit.atlas import MapRecipe, named_map
from hptp_kit.classify import is_sn, is_sp
from hptp_kit.errors import ParameterOutOfRange, UnknownRecipe
from hptp_kit.maps import QuantumMap, choi_distance, compose, inverse, is_cp, is_hp, is_tp

import oracles


def test_example1_xi_spectrum_at_endpoint():
    w = np.linalg.eigvalsh(atlas.example1_xi(1 / 3).choi)
    assert_allclose(w, [0, 2 / 3, 2 / 3, 2 / 3], atol=1e-12)


@pytest.mark.parametrize("lam", [0.1, 0.2, 0.25, 1 / 3])
def test_example1_spectra_and_channels(lam):
    xi, phi = atlas.example1_xi(lam), atlas.example1_phi(lam)
    expected = sorted([(1 - 3 * lam) / 2] + [(1 + lam) / 2] * 3)
    assert_allclose(np.linalg.eigvalsh(xi.choi), expected, atol=1e-12)
    for f in (xi, phi):
        assert is_cp(f) and is_tp(f)


@pytest.mark.parametrize("lam", [0.1, 0.2, 1 / 3])
def test_transpose_is_xi_after_phi_inverse(lam):
    t = compose(atlas.example1_xi(lam), inverse(atlas.example1_phi(lam)))
    assert choi_distance(t, atlas.transpose()) <= 1e-9


@pytest.mark.parametrize("lam", [0, 0.34, 0.5, -0.1])
def test_example1_parameter_range(lam):
    with pytest.raises(ParameterOutOfRange):
        atlas.example1_xi(lam)


def test_transpose_choi_is_swap():
    assert_allclose(atlas.transpose(2).choi, oracles.swap(2))
    assert_allclose(atlas.transpose(3).choi, oracles.swap(3))


def test_example2_on_maximally_mixed():
    out = atlas.example2_psi()(np.eye(2) / 2)
    assert_allclose(out, [[1.5, 0], [0, -0.5]], atol=1e-15)


def test_example2_only_ground_state_maps_to_a_state():
    psi = atlas.example2_psi()
    for r in oracles.bloch_grid(2000):
        out_min = np.linalg.eigvalsh(psi(oracles.bloch_state(r)))[0]
        if np.linalg.norm(r - [0, 0, 1]) > 1e-9:
            assert out_min < 0


def test_indefinite_replacement_is_hptp_not_sn():
    ups = atlas.indefinite_replacement(np.diag([2.0, -1.0]))
    assert is_hp(ups) and is_tp(ups)
    assert not is_sn(ups).holds


def test_indefinite_replacement_rejects_bad_trace():
    with pytest.raises(ParameterOutOfRange):
        atlas.indefinite_replacement(np.diag([2.0, 1.0]))


def test_depolarizing_matches_pauli_twirl(rng):
    x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    paulis = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    twirl = sum(p @ x @ p.conj().T for p in paulis) / 4
    assert_allclose(atlas.depolarizing(1.0)(x), twirl, atol=1e-14)
    with pytest.raises(ParameterOutOfRange):
        atlas.depolarizing(1.5)


def test_named_map_registry():
    assert choi_distance(named_map("transpose", n=3), atlas.transpose(3)) == 0
    assert choi_distance(named_map("example1-xi", **{"lambda": 0.25}), atlas.example1_xi(0.25)) == 0
    r = MapRecipe("depolarizing", {"p": 0.3}, (2, 2))
    assert choi_distance(named_map(r), atlas.depolarizing(0.3)) == 0
    d = named_map("indefinite_replacement", D=np.diag([2.0, -1.0]))
    assert_allclose(d(np.eye(2) / 2), np.diag([2.0, -1.0]))
    with pytest.raises(UnknownRecipe):
        named_map("no-such-map")
    with pytest.raises(UnknownRecipe):
        MapRecipe("no-such-map")
    with pytest.raises(ParameterOutOfRange):
        named_map("example2_psi", n=3, m=3)
    with pytest.raises(ParameterOutOfRange):
        named_map("depolarizing", q=0.3)


@pytest.mark.parametrize("n,m", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_random_generators_valid_and_deterministic(n, m):
    for seed in range(5):
        c = atlas.random_cptp(n, m, seed)
        assert is_cp(c) and is_tp(c)
        h = atlas.random_hptp(n, m, seed)
        assert is_hp(h) and is_tp(h)
        assert np.array_equal(c.choi, atlas.random_cptp(n, m, seed).choi)
        assert np.array_equal(h.choi, atlas.random_hptp(n, m, seed).choi)
    assert not np.array_equal(atlas.random_cptp(n, m, 0).choi, atlas.random_cptp(n, m, 1).choi)


def test_random_cptp_golden(data_dir):
    # fixture rebuilt by tests/data/make_golden.py along an independent code path
    golden = json.loads((data_dir / "random_cptp_2_2_42.json").read_text())
    j = np.array([[complex(*z) for z in row] for row in golden["choi"]])
    assert linalg.max_abs(atlas.random_cptp(2, 2, 42).choi - j) <= 1e-12


def test_random_sp_samples_classify_sp():
    for seed in range(20):
        psi = atlas.random_sp(2, seed)
        assert is_hp(psi) and is_tp(psi)
        assert is_sp(psi).holds


def test_random_sp_with_trivial_phi_reduces_to_xi():
    xi = atlas.random_cptp(2, 2, 3)
    assert is_cp(compose(xi, inverse(QuantumMap.identity(2))))


def test_some_sp_map_expands_trace_norm(rng):
    ratios = []
    for seed in range(20):
        psi = atlas.random_sp(2, seed)
        for _ in range(20):
            h = oracles.random_hermitian(2, rng)
            ratios.append(linalg.trace_norm(psi(h)) / linalg.trace_norm(h))
    assert max(ratios) > 1 + 1e-6


def test_unbounded_family_sp_with_growing_norm():
    norms = []
    for k in (1, 10, 100):
        psi = atlas.unbounded_family(k)
        assert is_hp(psi) and is_tp(psi)
        assert is_sp(psi).holds
        norms.append(np.linalg.norm(psi.choi, 2))
    assert norms[0] < norms[1] < norms[2]
    assert norms[2] > 40


def test_theorem_family_members():
    g = atlas.gamma_eps(0.5)
    assert is_hp(g) and is_tp(g) and not is_sn(g).holds
    p = atlas.phi_eps(0.5)
    assert is_cp(p) and is_sp(p).holds
    s = atlas.spr_counterexample()
    assert is_hp(s) and is_tp(s) and is_sn(s).holds and not is_sp(s).holds
