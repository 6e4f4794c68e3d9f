"""Placing an HPTP map in the hierarchy CP, positive, SPR, SP, SN, HPTP.

Semi-positivity (SP) and semi-nonnegativity (SN) are read off the optimum ``y*`` of
:func:`hptp_kit.sdp.solve_sn_program` with a band of width ``sdp_tol`` around zero:

* ``y* < -sdp_tol``: SP, the maximizer is an invertible state with invertible image;
* ``|y*| <= sdp_tol``: SN but not SP (boundary);
* ``y* > sdp_tol``: not SN.

Positivity is decided by a sampled search. It can refute positivity with a pure
state witness but only confirms it exactly for CP maps, otherwise the answer is
``ProbablyTrue``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import linalg
from .atlas import random_density, rng_from_seed
from .errors import DichotomyViolation, NonHPTPInput
from .linalg import DEFAULT_TOLERANCES, Tolerances, dag
from .maps import QuantumMap, apply_many, dual, is_cp, is_hp, is_tp
from .sdp import DEFAULT_SDP_SETTINGS, SdpResult, SdpSettings, hermitian_basis, solve_sn_program


class Verdict(str, enum.Enum):
    NOT_HPTP = "NotHPTP"
    NON_SN_HPTP = "NonSN_HPTP"
    SN_NOT_SP = "SN_not_SP"
    SP = "SP"
    SPR_NOT_SP = "SPR_not_SP"
    POSITIVE = "Positive"
    CP = "CP"


class Positivity(str, enum.Enum):
    TRUE = "True"
    FALSE = "False"
    PROBABLY_TRUE = "ProbablyTrue"


@dataclass(frozen=True)
class PositivityResult:
    """Outcome of :func:`is_positive`.

    ``witness`` is the unit vector with the smallest output eigenvalue found and
    ``value`` that eigenvalue, ``lambda_min(Psi(|phi><phi|))``.
    """

    status: Positivity
    witness: np.ndarray | None
    value: float

    def __bool__(self):
        return self.status is not Positivity.FALSE


@dataclass(frozen=True)
class MembershipResult:
    """Answer of :func:`is_sp` / :func:`is_sn` with the state that certifies it."""

    holds: bool
    witness: np.ndarray | None
    sdp: SdpResult | None
    witness_validated: bool = True

    def __bool__(self):
        return self.holds


@dataclass(frozen=True)
class MapClass:
    verdict: Verdict
    hp: bool
    tp: bool
    cp: bool = False
    positive: Positivity | None = None
    sp: bool = False
    spr: bool = False
    sn: bool = False
    sdp: SdpResult | None = None
    sp_witness: np.ndarray | None = None
    sn_witness: np.ndarray | None = None
    positivity_witness: np.ndarray | None = None
    range_dim: int | None = None

    @property
    def y_star(self) -> float | None:
        return None if self.sdp is None else self.sdp.y_star

    @property
    def certified(self) -> bool:
        """False when the SDP hit its iteration limit, so SP/SN flags rest on an upper bound."""
        return self.sdp is None or self.sdp.converged

    def check_inclusions(self) -> bool:
        """Flags respect ``CP => P => SPR => SN`` and ``SP => SPR``."""
        ok = True
        if self.cp:
            ok &= self.positive is Positivity.TRUE
        if self.positive is Positivity.TRUE:
            ok &= self.spr
        if self.sp:
            ok &= self.spr
        if self.spr:
            ok &= self.sn
        return bool(ok)


# ---------------------------------------------------------------------------
# positivity


def is_positive(
    psi: QuantumMap,
    tol: Tolerances = DEFAULT_TOLERANCES,
    settings: SdpSettings = DEFAULT_SDP_SETTINGS,
    max_steps: int = 200,
) -> PositivityResult:
    """Search for a pure state whose image has a negative eigenvalue.

    Minimizes ``<w| Psi(|phi><phi|) |w>`` over unit ``phi, w`` by alternating exact
    minimization: for fixed ``phi`` the best ``w`` is the lowest eigenvector of
    ``Psi(|phi><phi|)``, for fixed ``w`` the best ``phi`` is the lowest eigenvector of
    ``Psi^*(|w><w|)``. Each step cannot increase the value. Starts are the
    computational basis vectors followed by seeded random vectors, ``settings.restarts``
    in total.
    """
    if not is_hp(psi, tol):
        raise NonHPTPInput("positivity is only defined here for Hermitian-preserving maps")
    if is_cp(psi, tol):
        return PositivityResult(Positivity.TRUE, None, np.nan)
    n = psi.dim_in
    psi_star = dual(psi)
    rng = rng_from_seed(settings.seed)
    count = max(settings.restarts, n)
    phi = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    phi[:n] = np.eye(n)
    phi /= np.linalg.norm(phi, axis=1, keepdims=True)
    prev = np.full(count, np.inf)
    for _ in range(max_steps):
        out = apply_many(psi, np.einsum("ra,rb->rab", phi, phi.conj()))
        w_vals, w_vecs = np.linalg.eigh((out + dag(out)) / 2)
        value, w = w_vals[:, 0], w_vecs[:, :, 0]
        back = apply_many(psi_star, np.einsum("ra,rb->rab", w, w.conj()))
        p_vals, p_vecs = np.linalg.eigh((back + dag(back)) / 2)
        phi = p_vecs[:, :, 0]
        if np.all(prev - p_vals[:, 0] <= 1e-14):
            break
        prev = p_vals[:, 0]
    out = apply_many(psi, np.einsum("ra,rb->rab", phi, phi.conj()))
    value = np.linalg.eigvalsh((out + dag(out)) / 2)[:, 0]
    best = int(np.argmin(value))
    if value[best] < -tol.eig_tol:
        return PositivityResult(Positivity.FALSE, phi[best], float(value[best]))
    return PositivityResult(Positivity.PROBABLY_TRUE, phi[best], float(value[best]))


# ---------------------------------------------------------------------------
# SP / SN


def _require_hptp(psi: QuantumMap, tol: Tolerances):
    if not (is_hp(psi, tol) and is_tp(psi, tol)):
        raise NonHPTPInput("map is not Hermitian-preserving and trace-preserving")


def _density(x: np.ndarray) -> np.ndarray:
    x = (x + dag(x)) / 2
    return x / np.trace(x).real


def is_sp(
    psi: QuantumMap,
    tol: Tolerances = DEFAULT_TOLERANCES,
    settings: SdpSettings = DEFAULT_SDP_SETTINGS,
    sdp: SdpResult | None = None,
) -> MembershipResult:
    """SP iff ``y* < -sdp_tol``; the witness is then re-checked by exact eigenvalues."""
    _require_hptp(psi, tol)
    sdp = solve_sn_program(psi, tol, settings) if sdp is None else sdp
    rho = _density(sdp.witness_state)
    if sdp.y_star < -tol.sdp_tol:
        ok = linalg.min_eigenvalue(rho) > 0 and linalg.min_eigenvalue(psi(rho)) > 0
        return MembershipResult(bool(ok), rho if ok else None, sdp, bool(ok))
    return MembershipResult(False, None, sdp)


def is_sn(
    psi: QuantumMap,
    tol: Tolerances = DEFAULT_TOLERANCES,
    settings: SdpSettings = DEFAULT_SDP_SETTINGS,
    sdp: SdpResult | None = None,
    require_tp: bool = True,
) -> MembershipResult:
    """SN iff ``y* <= sdp_tol``.

    Near the boundary the witness is re-validated with ``lambda_min >= -eig_tol`` for
    both the state and its image; ``witness_validated`` records the outcome.
    """
    if require_tp:
        _require_hptp(psi, tol)
    sdp = solve_sn_program(psi, tol, settings, require_tp=require_tp) if sdp is None else sdp
    if sdp.y_star > tol.sdp_tol:
        return MembershipResult(False, None, sdp)
    rho = _density(sdp.witness_state)
    ok = linalg.min_eigenvalue(rho) >= -tol.eig_tol and linalg.min_eigenvalue(psi(rho)) >= -tol.eig_tol
    return MembershipResult(True, rho, sdp, bool(ok))


def _rank(a: np.ndarray, tol: Tolerances) -> int:
    return int(np.sum(np.abs(np.linalg.eigvalsh((a + dag(a)) / 2)) > tol.eig_tol))


def output_range(psi: QuantumMap, tol: Tolerances = DEFAULT_TOLERANCES, seed: int = 0) -> np.ndarray:
    """Orthonormal basis (columns) of the maximal output range ``K_Psi``.

    ``K_Psi`` is the range of ``Psi(rho)`` for a generic invertible density matrix.
    Three seeded draws ``rho = w0 sigma + w1 I/n`` (Dirichlet weights, random full-rank
    ``sigma``) must agree on the rank of ``Psi(rho)``; otherwise the range is taken as
    the joint column space of the images of a Hermitian basis, which contains the
    range of every ``Psi(a)``.
    """
    n = psi.dim_in
    rng = rng_from_seed(seed)
    draws = []
    for _ in range(3):
        w = rng.dirichlet([1.0, 1.0])
        rho = w[0] * random_density(n, rng) + w[1] * np.eye(n) / n
        draws.append(psi(rho))
    ranks = {_rank(d, tol) for d in draws}
    if len(ranks) == 1:
        out = (draws[0] + dag(draws[0])) / 2
        w, v = np.linalg.eigh(out)
        return v[:, np.abs(w) > tol.eig_tol]
    images = apply_many(psi, hermitian_basis(n).as_array())
    return linalg.range_basis(np.hstack(list(images)), tol.eig_tol)


def compress(psi: QuantumMap, basis: np.ndarray) -> QuantumMap:
    """``X -> V^dag Psi(X) V`` for an isometry ``V`` given by orthonormal columns."""
    v = np.asarray(basis, dtype=complex)
    r = v.shape[1]
    return QuantumMap.from_function(lambda x: dag(v) @ psi(x) @ v, psi.dim_in, r)


def is_spr(
    psi: QuantumMap,
    tol: Tolerances = DEFAULT_TOLERANCES,
    settings: SdpSettings = DEFAULT_SDP_SETTINGS,
    sdp: SdpResult | None = None,
) -> MembershipResult:
    """SP after restricting the codomain to ``K_Psi``."""
    _require_hptp(psi, tol)
    basis = output_range(psi, tol, settings.seed)
    if basis.shape[1] == psi.dim_out:
        return is_sp(psi, tol, settings, sdp)
    reduced = compress(psi, basis)
    return is_sp(reduced, tol, settings)


# ---------------------------------------------------------------------------
# full classification


def classify(
    psi: QuantumMap,
    tol: Tolerances = DEFAULT_TOLERANCES,
    settings: SdpSettings = DEFAULT_SDP_SETTINGS,
) -> MapClass:
    """Most specific class of ``psi`` with certificates.

    Flags implied by a stronger certified property (for example ``sp => spr``) are
    set by inclusion rather than recomputed.
    """
    hp, tp = is_hp(psi, tol), is_tp(psi, tol)
    if not (hp and tp):
        return MapClass(Verdict.NOT_HPTP, hp, tp, cp=hp and is_cp(psi, tol))
    cp = is_cp(psi, tol)
    pos = is_positive(psi, tol, settings)
    sdp = solve_sn_program(psi, tol, settings)
    sp_res = is_sp(psi, tol, settings, sdp)
    sn_res = is_sn(psi, tol, settings, sdp)
    sp, sn = sp_res.holds, sn_res.holds
    spr, range_dim = sp, psi.dim_out
    if not sp and sn:
        basis = output_range(psi, tol, settings.seed)
        range_dim = basis.shape[1]
        if range_dim < psi.dim_out:
            spr = is_sp(compress(psi, basis), tol, settings).holds
    if pos.status is Positivity.TRUE:
        spr = True
    sn = sn or spr

    if cp:
        verdict = Verdict.CP
    elif pos.status is Positivity.PROBABLY_TRUE and sn:
        verdict = Verdict.POSITIVE
    elif sp:
        verdict = Verdict.SP
    elif spr:
        verdict = Verdict.SPR_NOT_SP
    elif sn:
        verdict = Verdict.SN_NOT_SP
    else:
        verdict = Verdict.NON_SN_HPTP
    return MapClass(
        verdict,
        hp,
        tp,
        cp=cp,
        positive=pos.status,
        sp=sp,
        spr=spr,
        sn=sn,
        sdp=sdp,
        sp_witness=sp_res.witness,
        sn_witness=sn_res.witness,
        positivity_witness=pos.witness if pos.status is Positivity.FALSE else None,
        range_dim=range_dim,
    )


# ---------------------------------------------------------------------------
# duality


class Branch(str, enum.Enum):
    SP_SIDE = "SP_side"
    SN_DUAL_SIDE = "SN_dual_side"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class DichotomyResult:
    branch: Branch
    sp: bool
    sn_dual: bool
    y_primal: float
    y_dual: float

    @property
    def margin(self) -> float:
        return min(abs(self.y_primal), abs(self.y_dual))


def duality_dichotomy(
    psi: QuantumMap,
    tol: Tolerances = DEFAULT_TOLERANCES,
    settings: SdpSettings = DEFAULT_SDP_SETTINGS,
) -> DichotomyResult:
    """Exactly one of ``SP(Psi)`` and ``SN(-Psi^*)`` holds.

    ``-Psi^*`` is Hermitian-preserving but not trace-preserving; the program only
    needs the former. If either optimum lies inside the ``sdp_tol`` band the result
    is ``Inconclusive``; both or neither branch holding outside the band raises
    :class:`DichotomyViolation`.
    """
    _require_hptp(psi, tol)
    primal = solve_sn_program(psi, tol, settings)
    neg_dual = -dual(psi)
    dual_res = solve_sn_program(neg_dual, tol, settings, require_tp=False)
    sp = is_sp(psi, tol, settings, primal).holds
    sn_dual = is_sn(neg_dual, tol, settings, dual_res, require_tp=False).holds
    y1, y2 = primal.y_star, dual_res.y_star
    if abs(y1) <= tol.sdp_tol or abs(y2) <= tol.sdp_tol:
        branch = Branch.INCONCLUSIVE
    elif sp == sn_dual:
        raise DichotomyViolation(
            f"SP(Psi)={sp} and SN(-Psi*)={sn_dual} (y* = {y1:.3e}, dual y* = {y2:.3e})"
        )
    else:
        branch = Branch.SP_SIDE if sp else Branch.SN_DUAL_SIDE
    return DichotomyResult(branch, sp, sn_dual, y1, y2)
