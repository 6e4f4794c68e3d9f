"""Error correction for noise given in signed operator-sum form.

Noise ``N(rho) = sum_i s_i E_i rho E_i^dag`` with signs ``s_i = +-1`` can be undone on
a code space by a *channel* when the Knill-Laflamme type condition holds. Two forms
of the condition appear:

* ``P E_i E_j^dag P = alpha_ij P``, checked by :func:`check_kl` as stated;
* ``P E_i^dag E_j P = beta_ij P``, the form the recovery construction relies on
  (polar decomposition of ``E_k P``).

For Pauli-type noise with real weights both coincide. :func:`build_recovery`
requires the second form and reports ``KlViolated`` when only the first holds.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import linalg
from .atlas import rng_from_seed
from .errors import DimensionMismatch, KlViolated, SignSectorObstruction, SingularMap, UnnormalizedNoise
from .linalg import DEFAULT_TOLERANCES, Tolerances, dag
from .maps import QuantumMap, SignedKrausRep, from_signed_kraus, inverse, is_cptp
from .sdp import hermitian_basis


@dataclass(frozen=True)
class CodeSpace:
    ambient_dim: int
    projector: np.ndarray
    code_dim: int = 0

    def __post_init__(self):
        p = linalg.as_matrix(self.projector, "projector")
        if p.shape != (self.ambient_dim, self.ambient_dim):
            raise DimensionMismatch(f"projector has shape {p.shape}, expected ambient dimension {self.ambient_dim}")
        if not linalg.is_hermitian(p, 1e-9) or linalg.max_abs(p @ p - p) > 1e-9:
            raise ValueError("code projector must be a Hermitian idempotent")
        k = int(round(np.trace(p).real))
        if k < 1:
            raise ValueError("code space is empty")
        object.__setattr__(self, "projector", p)
        object.__setattr__(self, "code_dim", k)

    @classmethod
    def from_vectors(cls, vectors) -> "CodeSpace":
        """Code spanned by the given columns (orthonormalized)."""
        q = linalg.range_basis(np.asarray(vectors, dtype=complex))
        return cls(q.shape[0], q @ dag(q))

    def isometry(self) -> np.ndarray:
        w, v = np.linalg.eigh(self.projector)
        return v[:, w > 0.5]


@dataclass(frozen=True)
class KlReport:
    alpha: np.ndarray
    max_violation: float
    satisfied: bool
    beta: np.ndarray
    beta_violation: float


@dataclass(frozen=True)
class RecoveryPlan:
    recovery: QuantumMap
    kraus: list
    diagonalized_alpha: list
    signs: list
    skipped_terms: list
    syndrome_projectors: list
    unitaries: list

    @property
    def sign_sum(self) -> float:
        return float(sum(s * a for s, a in zip(self.signs, self.diagonalized_alpha)))


@dataclass(frozen=True)
class RecoveryCheck:
    residual: float
    sign_sum: float
    passed: bool


# ---------------------------------------------------------------------------
# condition


def _as_rep(noise) -> SignedKrausRep:
    return noise if isinstance(noise, SignedKrausRep) else SignedKrausRep.from_pairs(noise)


def require_normalized(noise: SignedKrausRep, tol: Tolerances = DEFAULT_TOLERANCES):
    dev = linalg.max_abs(noise.normalization() - np.eye(noise.dim_in))
    if dev > tol.eq_tol:
        raise UnnormalizedNoise(f"sum_i sign(i) E_i^dag E_i deviates from I by {dev:.3e}")


def _gram_violation(pmat: np.ndarray, blocks: np.ndarray, k: int):
    coeff = np.einsum("ijab,ba->ij", blocks, pmat) / k
    resid = blocks - coeff[:, :, None, None] * pmat
    return coeff, linalg.max_abs(resid)


def check_kl(code: CodeSpace, noise, tol: Tolerances = DEFAULT_TOLERANCES) -> KlReport:
    """Test ``P E_i E_j^dag P = alpha_ij P`` with ``alpha_ij = Tr(P E_i E_j^dag P) / k``.

    The standard-form coefficients ``beta_ij`` (from ``P E_i^dag E_j P``) are reported
    alongside.
    """
    noise = _as_rep(noise)
    if noise.dim_in != code.ambient_dim or noise.dim_out != code.ambient_dim:
        raise DimensionMismatch("noise operators do not act on the code's ambient space")
    require_normalized(noise, tol)
    p = code.projector
    ops = np.stack(noise.operators)
    ee = np.einsum("iab,jcb->ijac", ops, ops.conj())  # E_i E_j^dag
    alpha, viol = _gram_violation(p, np.einsum("ab,ijbc,cd->ijad", p, ee, p), code.code_dim)
    ee_std = np.einsum("iba,jbc->ijac", ops.conj(), ops)  # E_i^dag E_j
    beta, viol_std = _gram_violation(p, np.einsum("ab,ijbc,cd->ijad", p, ee_std, p), code.code_dim)
    return KlReport(alpha, float(viol), bool(viol <= tol.eq_tol), beta, float(viol_std))


# ---------------------------------------------------------------------------
# recovery


def build_recovery(code: CodeSpace, noise, report: KlReport | None = None, tol: Tolerances = DEFAULT_TOLERANCES) -> RecoveryPlan:
    """Recovery channel ``R`` with ``R(N(P s P)) = P s P``.

    The coefficient matrix is diagonalized inside each sign sector, ``F_k = sum_i W_ik E_i``.
    For every ``F_k`` with ``d_kk > eig_tol`` the polar decomposition
    ``F_k P = sqrt(d_kk) U_k P`` gives ``P_k = U_k P U_k^dag`` and ``R_k = U_k^dag P_k``;
    the projector onto the complement of the syndrome spaces completes ``{R_k}`` to a
    channel.
    """
    noise = _as_rep(noise)
    report = check_kl(code, noise, tol) if report is None else report
    if not report.satisfied:
        raise KlViolated(f"condition violated by {report.max_violation:.3e}")
    if report.beta_violation > tol.eq_tol:
        raise KlViolated(
            f"P E_i^dag E_j P is not proportional to P (violation {report.beta_violation:.3e}); "
            "the recovery construction needs this form"
        )
    signs = np.array(noise.signs)
    beta = report.beta
    pos, neg = signs > 0, signs < 0
    cross = linalg.max_abs(beta[np.ix_(pos, neg)]) if pos.any() and neg.any() else 0.0
    if cross > tol.eq_tol:
        raise SignSectorObstruction(f"coefficients couple terms of opposite sign (max {cross:.3e})")

    ops = np.stack(noise.operators)
    new_ops, diag, new_signs = [], [], []
    for sector, s in ((pos, 1), (neg, -1)):
        idx = np.flatnonzero(sector)
        if idx.size == 0:
            continue
        b = beta[np.ix_(idx, idx)]
        d, w = np.linalg.eigh((b + dag(b)) / 2)
        for k in range(idx.size):
            new_ops.append(np.einsum("i,iab->ab", w[:, k], ops[idx]))
            diag.append(float(d[k]))
            new_signs.append(s)

    p = code.projector
    kraus, projectors, unitaries, skipped = [], [], [], []
    for k, (f, dkk) in enumerate(zip(new_ops, diag)):
        if dkk <= tol.eig_tol:
            skipped.append(k)
            continue
        u = linalg.polar_unitary_on_subspace(f, p, tol.eig_tol)
        pk = u @ p @ dag(u)
        projectors.append(pk)
        unitaries.append(u)
        kraus.append(dag(u) @ pk)
    for a in range(len(projectors)):
        for b in range(a + 1, len(projectors)):
            overlap = linalg.max_abs(projectors[a] @ projectors[b])
            if overlap > 1e-8:
                raise KlViolated(f"syndrome spaces {a} and {b} overlap ({overlap:.3e})")
    n = code.ambient_dim
    rest = np.eye(n) - reduce(np.add, projectors, np.zeros((n, n), dtype=complex))
    if np.trace(rest).real > 0.5:
        kraus.append(rest)
    recovery = QuantumMap.from_kraus(kraus)
    return RecoveryPlan(recovery, kraus, diag, new_signs, skipped, projectors, unitaries)


def verify_recovery(plan: RecoveryPlan, noise, code: CodeSpace, tol: Tolerances = DEFAULT_TOLERANCES) -> RecoveryCheck:
    """Max over a Hermitian basis ``s`` of code operators of ``|R(N(P s P)) - P s P|_max``."""
    noise_map = from_signed_kraus(_as_rep(noise))
    v = code.isometry()
    resid = 0.0
    for h in hermitian_basis(code.code_dim).elements:
        s = v @ h @ dag(v)
        resid = max(resid, linalg.max_abs(plan.recovery(noise_map(s)) - s))
    return RecoveryCheck(float(resid), plan.sign_sum, bool(resid <= tol.eq_tol))


def inverse_recovery_shortcut(noise, tol: Tolerances = DEFAULT_TOLERANCES) -> QuantumMap | None:
    """``N^{-1}`` when it exists and is itself a channel, else ``None``."""
    noise_map = noise if isinstance(noise, QuantumMap) else from_signed_kraus(_as_rep(noise))
    try:
        inv = inverse(noise_map, tol)
    except (SingularMap, ValueError):
        return None
    return inv if is_cptp(inv, tol) else None


# ---------------------------------------------------------------------------
# the three-qubit bit-flip code and its noise corpus


_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(label: str) -> np.ndarray:
    """Tensor product of Paulis, e.g. ``pauli("XII")``."""
    return reduce(np.kron, [_PAULI[c] for c in label.upper()])


def bit_flip_code() -> CodeSpace:
    """``span{|000>, |111>}``."""
    p = np.zeros((8, 8), dtype=complex)
    p[0, 0] = p[7, 7] = 1
    return CodeSpace(8, p)


def signed_bitflip_noise(seed: int) -> SignedKrausRep:
    """``{(+, I), (+, X1), (+, X2), (-, X3)}`` with random weights, trace-preserving.

    The negative weight ``q`` is drawn from [0.01, 0.2] and the positive weights
    from a Dirichlet distribution scaled to sum to ``1 + q``.
    """
    rng = rng_from_seed(seed)
    q = rng.uniform(0.01, 0.2)
    p = rng.dirichlet([1.0, 1.0, 1.0]) * (1 + q)
    labels = ("III", "XII", "IXI", "IIX")
    weights = (*p, q)
    signs = (1, 1, 1, -1)
    return SignedKrausRep.from_pairs([(s, np.sqrt(w) * pauli(l)) for s, w, l in zip(signs, weights, labels)])


def z_contaminated_noise() -> SignedKrausRep:
    """Negative control: a phase flip on qubit 1 is not correctable by the bit-flip code."""
    terms = [(1, np.sqrt(0.9) * pauli("III")), (1, np.sqrt(0.2) * pauli("ZII")), (-1, np.sqrt(0.1) * pauli("IIX"))]
    return SignedKrausRep.from_pairs(terms)


def unitary_noise(u) -> SignedKrausRep:
    u = linalg.as_matrix(u, "unitary")
    return SignedKrausRep.from_pairs([(1, u)])
