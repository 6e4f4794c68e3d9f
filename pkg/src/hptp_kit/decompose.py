"""Factorizations of SP and SN maps through physical channels.

* SP maps: ``Psi = Xi o Phi^{-1}`` with ``Phi(x) = lam x + (1 - lam) Tr(x) rho`` and
  ``Xi = Psi o Phi``, both channels.
* SN maps: ``Psi o Phi = Xi`` with ``Phi(x) = Tr(x) rho`` and ``Xi(x) = Tr(x) Psi(rho)``.
* Any HPTP map is the midpoint of two SP maps.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from . import linalg
from .atlas import rng_from_seed
from .classify import is_sn, is_sp
from .errors import (
    DimensionMismatch,
    InvalidAnchor,
    NonHPTPInput,
    NotSN,
    NotSP,
    UnsupportedForm,
    VerificationFailed,
)
from .linalg import DEFAULT_TOLERANCES, Tolerances, dag
from .maps import (
    QuantumMap,
    apply_many,
    choi_distance,
    compose,
    inverse,
    is_cp,
    is_hp,
    is_tp,
    replacement_map,
)
from .sdp import DEFAULT_SDP_SETTINGS, SdpSettings, hermitian_basis


@dataclass(frozen=True)
class SpDecomposition:
    phi: QuantumMap
    xi: QuantumMap
    lam: float
    rho: np.ndarray


@dataclass(frozen=True)
class SnDecomposition:
    phi: QuantumMap
    xi: QuantumMap
    rho: np.ndarray


@dataclass(frozen=True)
class Verification:
    """Residual report for a decomposition.

    ``residual`` is the max-entry Choi distance between the recomposed map and the
    target. ``xi_min_eig`` is the smallest eigenvalue of ``J(Xi)``.
    """

    residual: float
    phi_cp: bool
    phi_tp: bool
    xi_cp: bool
    xi_tp: bool
    xi_min_eig: float
    passed: bool


def affine_channel(lam: float, rho) -> QuantumMap:
    """``x -> lam x + (1 - lam) Tr(x) rho``."""
    rho = linalg.as_matrix(rho, "rho")
    n = rho.shape[0]
    return lam * QuantumMap.identity(n) + (1 - lam) * replacement_map(rho, n)


def _strictly_pd(a, tol: Tolerances) -> bool:
    return linalg.is_hermitian(a, tol.eq_tol) and linalg.min_eigenvalue(a) > tol.eig_tol


def _anchor_from_witness(psi: QuantumMap, x: np.ndarray, tol: Tolerances) -> np.ndarray:
    """Clip, renormalize and mix 1% with ``I/n``; back off the mixing if the image degrades."""
    n = psi.dim_in
    w, v = np.linalg.eigh((x + dag(x)) / 2)
    w = np.maximum(w, tol.eig_tol)
    rho = (v * w) @ dag(v)
    rho /= np.trace(rho).real
    for mix in (1e-2, 1e-3, 1e-4, 0.0):
        cand = (1 - mix) * rho + mix * np.eye(n) / n
        if _strictly_pd(cand, tol) and _strictly_pd(psi(cand), tol):
            return cand
    raise InvalidAnchor("could not turn the SP witness into a strictly positive anchor")


def max_lambda(psi: QuantumMap, rho, width: float = 1e-12) -> float:
    """Largest ``lam`` in (0, 1] with ``lam J(Psi) + (1 - lam) Psi(rho) (x) I`` PSD.

    Bisection on the exact sign of the smallest eigenvalue; the returned value lies
    on the PSD side of the boundary.
    """
    c = np.kron(psi(rho), np.eye(psi.dim_in))
    j = psi.choi

    def psd(lam):
        return linalg.min_eigenvalue(lam * j + (1 - lam) * c) >= 0

    if psd(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if psd(mid):
            lo = mid
        else:
            hi = mid
    return lo


def sp_decompose(
    psi: QuantumMap,
    rho=None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    settings: SdpSettings = DEFAULT_SDP_SETTINGS,
) -> SpDecomposition:
    """Factor an SP map as ``Xi o Phi^{-1}`` with the largest admissible ``lam``.

    ``rho`` must be an invertible density matrix with invertible image. Without it
    the witness of the semi-positivity program is used.
    """
    if not (is_hp(psi, tol) and is_tp(psi, tol)):
        raise NonHPTPInput("sp_decompose needs an HPTP map")
    if rho is None:
        res = is_sp(psi, tol, settings)
        if not res.holds:
            raise NotSP(f"map is not semi-positive (y* = {res.sdp.y_star:.3e})")
        rho = _anchor_from_witness(psi, res.witness, tol)
    else:
        rho = linalg.as_matrix(rho, "rho")
        if rho.shape != (psi.dim_in, psi.dim_in):
            raise DimensionMismatch(f"rho has shape {rho.shape}, expected {(psi.dim_in, psi.dim_in)}")
        if not _strictly_pd(rho, tol) or abs(np.trace(rho) - 1) > tol.eq_tol:
            raise InvalidAnchor("rho must be an invertible density matrix")
        if not _strictly_pd(psi(rho), tol):
            raise InvalidAnchor("Psi(rho) is not positive definite")
    lam = max_lambda(psi, rho)
    phi = affine_channel(lam, rho)
    xi = QuantumMap(psi.dim_in, psi.dim_out, lam * psi.choi + (1 - lam) * np.kron(psi(rho), np.eye(psi.dim_in)))
    d = SpDecomposition(phi, xi, lam, rho)
    report = verify_sp_decomposition(d, psi, tol)
    if not report.passed:
        raise VerificationFailed(f"SP decomposition did not verify: {report}")
    return d


def verify_sp_decomposition(d: SpDecomposition, target: QuantumMap, tol: Tolerances = DEFAULT_TOLERANCES) -> Verification:
    try:
        residual = choi_distance(compose(d.xi, inverse(d.phi, tol)), target)
    except ArithmeticError:
        residual = np.inf
    xi_min = linalg.min_eigenvalue(d.xi.choi)
    flags = dict(
        phi_cp=is_cp(d.phi, tol),
        phi_tp=is_tp(d.phi, tol),
        xi_cp=is_hp(d.xi, tol) and xi_min >= -tol.eig_tol,
        xi_tp=is_tp(d.xi, tol),
    )
    passed = residual <= tol.eq_tol and all(flags.values())
    return Verification(float(residual), xi_min_eig=float(xi_min), passed=bool(passed), **flags)


def sn_decompose(
    psi: QuantumMap,
    tol: Tolerances = DEFAULT_TOLERANCES,
    settings: SdpSettings = DEFAULT_SDP_SETTINGS,
) -> SnDecomposition:
    """``Psi o Phi = Xi`` with replacement channels built from the SN witness."""
    res = is_sn(psi, tol, settings)
    if not res.holds:
        raise NotSN(f"map is not semi-nonnegative (y* = {res.sdp.y_star:.3e})")
    if not res.witness_validated:
        raise NotSN("the SN witness failed the eigenvalue recheck (optimum inside the tolerance band)")
    w, v = np.linalg.eigh(res.witness)
    w = np.where(w > tol.eig_tol, w, 0.0)
    rho = (v * w) @ dag(v)
    rho /= np.trace(rho).real
    d = SnDecomposition(replacement_map(rho, psi.dim_in), replacement_map(psi(rho), psi.dim_in), rho)
    report = verify_sn_decomposition(d, psi, tol)
    if not report.passed:
        raise VerificationFailed(f"SN decomposition did not verify: {report}")
    return d


def verify_sn_decomposition(d: SnDecomposition, target: QuantumMap, tol: Tolerances = DEFAULT_TOLERANCES) -> Verification:
    residual = choi_distance(compose(target, d.phi), d.xi)
    xi_min = linalg.min_eigenvalue(d.xi.choi)
    flags = dict(
        phi_cp=is_cp(d.phi, tol),
        phi_tp=is_tp(d.phi, tol),
        xi_cp=is_hp(d.xi, tol) and xi_min >= -tol.eig_tol,
        xi_tp=is_tp(d.xi, tol),
    )
    passed = residual <= tol.eq_tol and all(flags.values())
    return Verification(float(residual), xi_min_eig=float(xi_min), passed=bool(passed), **flags)


def split_basis(n: int) -> np.ndarray:
    """Hermitian basis ``H_1 = I/n``, ``H_2 = (I + G/2)/n`` with ``G = diag(1, -1, 0, ...)``.

    The first two elements are invertible density matrices; the rest are Gell-Mann
    elements orthogonalized against them in the trace inner product.
    """
    if n < 2:
        raise DimensionMismatch("the convex split needs input dimension at least 2")
    g = np.zeros((n, n), dtype=complex)
    g[0, 0], g[1, 1] = 1, -1
    h1 = np.eye(n, dtype=complex) / n
    h2 = (np.eye(n) + g / 2) / n
    q = [h1 / np.linalg.norm(h1)]
    r = h2 - np.vdot(q[0], h2) * q[0]
    q.append(r / np.linalg.norm(r))
    rest = []
    for v in hermitian_basis(n).elements:
        r = v.copy()
        for b in q:
            r = r - np.vdot(b, r) * b
        nrm = np.linalg.norm(r)
        if nrm > 1e-10:
            r = r / nrm
            q.append(r)
            rest.append(r)
    basis = np.stack([h1, h2] + rest)
    if basis.shape[0] != n * n:
        raise ArithmeticError("failed to build a Hermitian basis")
    return basis


def _map_from_images(basis: np.ndarray, images: np.ndarray, n: int, m: int) -> QuantumMap:
    b = basis.reshape(n * n, n * n).T
    img = images.reshape(n * n, m * m).T
    k = np.linalg.solve(b.T, img.T).T
    return QuantumMap.from_transfer(k, n, m)


def convex_split(psi: QuantumMap, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[QuantumMap, QuantumMap]:
    """Two SP maps whose average is ``psi``.

    With ``rho = I_m/m``: ``Psi_1(H_1) = Psi_2(H_2) = rho``, ``Psi_1(H_2) = 2 Psi(H_2) - rho``,
    ``Psi_2(H_1) = 2 Psi(H_1) - rho`` and both agree with ``psi`` on the remaining
    basis elements.
    """
    if not (is_hp(psi, tol) and is_tp(psi, tol)):
        raise NonHPTPInput("convex_split needs an HPTP map")
    n, m = psi.dim_in, psi.dim_out
    basis = split_basis(n)
    images = apply_many(psi, basis)
    images = (images + dag(images)) / 2
    rho = np.eye(m, dtype=complex) / m
    img1, img2 = images.copy(), images.copy()
    img1[0], img1[1] = rho, 2 * images[1] - rho
    img2[0], img2[1] = 2 * images[0] - rho, rho
    psi1 = _map_from_images(basis, img1, n, m)
    psi2 = _map_from_images(basis, img2, n, m)
    # the images are Hermitian, so only round-off separates the Choi from Hermitian
    psi1 = QuantumMap(n, m, (psi1.choi + dag(psi1.choi)) / 2)
    psi2 = QuantumMap(n, m, (psi2.choi + dag(psi2.choi)) / 2)
    if choi_distance(0.5 * (psi1 + psi2), psi) > tol.eq_tol:
        raise VerificationFailed("convex split does not average back to the input")
    return psi1, psi2


def coverage_ratio(d: SpDecomposition, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Volume fraction of the state space covered by ``Range(Phi)``: ``lam^(n^2 - 1)``.

    ``Phi`` contracts the state space by ``lam`` about ``rho``, and the real
    dimension of the state space is ``n^2 - 1``.
    """
    n = d.phi.dim_in
    if choi_distance(d.phi, affine_channel(d.lam, d.rho)) > tol.eq_tol:
        raise UnsupportedForm("Phi is not of the form lam x + (1 - lam) Tr(x) rho")
    return float(d.lam ** (n * n - 1))


def _paulis() -> np.ndarray:
    return np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)


def coverage_monte_carlo(d: SpDecomposition, samples: int = 100_000, seed: int = 0) -> float:
    """Fraction of qubit states ``s`` with ``Phi^{-1}(s) >= 0``, from quasi-random Bloch points.

    Points come from a scrambled Sobol sequence on ``[-1, 1]^3`` with the points
    outside the unit ball rejected; the first ``samples`` points inside are used.
    """
    if d.phi.dim_in != 2:
        raise UnsupportedForm("Monte-Carlo coverage is implemented for qubits only")
    sobol = qmc.Sobol(d=3, scramble=True, seed=rng_from_seed(seed))
    pts = np.zeros((0, 3))
    while pts.shape[0] < samples:
        cube = 2 * sobol.random(2 ** int(np.ceil(np.log2(2 * samples)))) - 1
        pts = np.vstack([pts, cube[np.einsum("ij,ij->i", cube, cube) <= 1]])
    pts = pts[:samples]
    states = (np.eye(2) + np.einsum("ri,iab->rab", pts, _paulis())) / 2
    pre = apply_many(inverse(d.phi), states)
    lam_min = np.linalg.eigvalsh((pre + dag(pre)) / 2)[:, 0]
    return float(np.mean(lam_min >= 0))
