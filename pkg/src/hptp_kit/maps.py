"""Linear maps between matrix algebras, stored as Choi matrices.

The Choi matrix of ``Psi: B(C^n) -> B(C^m)`` is laid out output factor first,

    J(Psi) = sum_ij Psi(E_ij) (x) E_ij,

so that an operator-sum term ``x -> E x E^dag`` contributes ``vec(E) vec(E)^dag``
under row-stacking ``vec``. The transfer (natural) matrix ``K`` acts on vectorized
operators, ``vec(Psi(X)) = K vec(X)``; composition and inversion go through it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
import scipy.linalg

from . import linalg
from .errors import DimensionMismatch, NonHermitianChoi, NonHPTPInput, SingularMap
from .linalg import DEFAULT_TOLERANCES, Tolerances, dag


@dataclass(frozen=True, eq=False)
class QuantumMap:
    """A linear map ``B(C^dim_in) -> B(C^dim_out)`` represented by its Choi matrix."""

    dim_in: int
    dim_out: int
    choi: np.ndarray = field(repr=False)

    def __post_init__(self):
        n, m = int(self.dim_in), int(self.dim_out)
        if n < 1 or m < 1:
            raise DimensionMismatch(f"dimensions must be positive, got ({n}, {m})")
        choi = linalg.as_matrix(self.choi, "choi").copy()
        if choi.shape != (n * m, n * m):
            raise DimensionMismatch(f"Choi matrix must be {n * m}x{n * m} for dims ({n}, {m}), got {choi.shape}")
        choi.setflags(write=False)
        object.__setattr__(self, "dim_in", n)
        object.__setattr__(self, "dim_out", m)
        object.__setattr__(self, "choi", choi)

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], dim_in: int, dim_out: int | None = None):
        """Tabulate a linear function on the matrix units ``E_ij``."""
        dim_out = dim_in if dim_out is None else dim_out
        choi = np.zeros((dim_in * dim_out, dim_in * dim_out), dtype=complex)
        for i in range(dim_in):
            for j in range(dim_in):
                e = np.zeros((dim_in, dim_in), dtype=complex)
                e[i, j] = 1
                out = np.asarray(func(e), dtype=complex)
                if out.shape != (dim_out, dim_out):
                    raise DimensionMismatch(f"function returned shape {out.shape}, expected {(dim_out, dim_out)}")
                choi += np.kron(out, e)
        return cls(dim_in, dim_out, choi)

    @classmethod
    def from_transfer(cls, k, dim_in: int, dim_out: int):
        k = np.asarray(k, dtype=complex)
        if k.shape != (dim_out**2, dim_in**2):
            raise DimensionMismatch(f"transfer matrix must be {dim_out**2}x{dim_in**2}, got {k.shape}")
        t = k.reshape(dim_out, dim_out, dim_in, dim_in).transpose(0, 2, 1, 3)
        return cls(dim_in, dim_out, t.reshape(dim_in * dim_out, dim_in * dim_out))

    @classmethod
    def from_kraus(cls, ops: Sequence[np.ndarray], signs: Sequence[int] | None = None):
        ops = [linalg.as_matrix(e, "Kraus operator") for e in ops]
        signs = [1] * len(ops) if signs is None else list(signs)
        rep = SignedKrausRep.from_pairs(zip(signs, ops))
        return from_signed_kraus(rep)

    @classmethod
    def identity(cls, n: int):
        v = np.eye(n, dtype=complex).reshape(-1, 1)
        return cls(n, n, v @ dag(v))

    # -- views ------------------------------------------------------------

    @property
    def tensor(self) -> np.ndarray:
        """Choi entries as ``T[a, i, b, j] = Psi(E_ij)[a, b]``."""
        n, m = self.dim_in, self.dim_out
        return self.choi.reshape(m, n, m, n)

    @property
    def transfer(self) -> np.ndarray:
        n, m = self.dim_in, self.dim_out
        return self.tensor.transpose(0, 2, 1, 3).reshape(m * m, n * n)

    def __call__(self, x) -> np.ndarray:
        return apply(self, x)

    # -- linear structure ---------------------------------------------------

    def _check_same_shape(self, other: "QuantumMap"):
        if (self.dim_in, self.dim_out) != (other.dim_in, other.dim_out):
            raise DimensionMismatch(
                f"maps have different dimensions: {(self.dim_in, self.dim_out)} vs {(other.dim_in, other.dim_out)}"
            )

    def __add__(self, other: "QuantumMap") -> "QuantumMap":
        self._check_same_shape(other)
        return QuantumMap(self.dim_in, self.dim_out, self.choi + other.choi)

    def __sub__(self, other: "QuantumMap") -> "QuantumMap":
        self._check_same_shape(other)
        return QuantumMap(self.dim_in, self.dim_out, self.choi - other.choi)

    def __mul__(self, scalar) -> "QuantumMap":
        return QuantumMap(self.dim_in, self.dim_out, scalar * self.choi)

    __rmul__ = __mul__

    def __neg__(self) -> "QuantumMap":
        return QuantumMap(self.dim_in, self.dim_out, -self.choi)

    def __repr__(self):
        return f"QuantumMap(dim_in={self.dim_in}, dim_out={self.dim_out})"


@dataclass(frozen=True)
class SignedKrausRep:
    """Operator-sum form ``Psi(x) = sum_i sign_i E_i x E_i^dag``."""

    terms: tuple[tuple[int, np.ndarray], ...]
    dim_in: int
    dim_out: int

    @classmethod
    def from_pairs(cls, pairs, dim_in: int | None = None, dim_out: int | None = None):
        terms = []
        for sign, op in pairs:
            if sign not in (1, -1):
                raise ValueError(f"sign must be +1 or -1, got {sign!r}")
            op = linalg.as_matrix(op, "Kraus operator").copy()
            op.setflags(write=False)
            terms.append((int(sign), op))
        if terms:
            shapes = {op.shape for _, op in terms}
            if len(shapes) != 1:
                raise DimensionMismatch(f"Kraus operators have inconsistent shapes {sorted(shapes)}")
            m, n = shapes.pop()
            if (dim_in is not None and dim_in != n) or (dim_out is not None and dim_out != m):
                raise DimensionMismatch(f"operators are {m}x{n}, expected {dim_out}x{dim_in}")
            dim_in, dim_out = n, m
        if dim_in is None or dim_out is None:
            raise DimensionMismatch("dimensions are required for an empty representation")
        return cls(tuple(terms), int(dim_in), int(dim_out))

    @property
    def signs(self) -> list[int]:
        return [s for s, _ in self.terms]

    @property
    def operators(self) -> list[np.ndarray]:
        return [e for _, e in self.terms]

    @property
    def p0(self) -> float:
        """Weight of the positive part, ``Tr(sum_+ E^dag E) / dim_in``."""
        return sum(float(np.vdot(e, e).real) for s, e in self.terms if s > 0) / self.dim_in

    @property
    def p1(self) -> float:
        return sum(float(np.vdot(e, e).real) for s, e in self.terms if s < 0) / self.dim_in

    def normalization(self) -> np.ndarray:
        """``sum_i sign_i E_i^dag E_i``; the identity for trace-preserving maps."""
        out = np.zeros((self.dim_in, self.dim_in), dtype=complex)
        for s, e in self.terms:
            out += s * (dag(e) @ e)
        return out

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        return sum((s * (e @ x @ dag(e)) for s, e in self.terms), np.zeros((self.dim_out, self.dim_out), complex))

    def __len__(self):
        return len(self.terms)


class JordanHahn(NamedTuple):
    p0: float
    phi0: QuantumMap
    p1: float
    phi1: Optional[QuantumMap]


# ---------------------------------------------------------------------------
# evaluation and predicates


def apply(psi: QuantumMap, x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.shape != (psi.dim_in, psi.dim_in):
        raise DimensionMismatch(f"input must be {psi.dim_in}x{psi.dim_in}, got {x.shape}")
    return np.einsum("aibj,ij->ab", psi.tensor, x)


def apply_many(psi: QuantumMap, xs: np.ndarray) -> np.ndarray:
    """Apply to a stack of inputs of shape ``(..., n, n)``."""
    return np.einsum("aibj,...ij->...ab", psi.tensor, xs)


def is_hp(psi: QuantumMap, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    return linalg.is_hermitian(psi.choi, tol.eq_tol)


def input_marginal(psi: QuantumMap) -> np.ndarray:
    """Partial trace of the Choi matrix over the output factor."""
    return linalg.partial_trace(psi.choi, psi.dim_out, psi.dim_in, "first")


def is_tp(psi: QuantumMap, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    return linalg.max_abs(input_marginal(psi) - np.eye(psi.dim_in)) <= tol.eq_tol


def is_hptp(psi: QuantumMap, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    return is_hp(psi, tol) and is_tp(psi, tol)


def _require_hp(psi: QuantumMap, tol: Tolerances):
    if not is_hp(psi, tol):
        dev = linalg.max_abs(psi.choi - dag(psi.choi))
        raise NonHermitianChoi(f"Choi matrix is not Hermitian (deviation {dev:.3e})")


def require_hptp(psi: QuantumMap, tol: Tolerances = DEFAULT_TOLERANCES):
    if not is_hp(psi, tol):
        raise NonHPTPInput("map is not Hermitian-preserving")
    if not is_tp(psi, tol):
        raise NonHPTPInput("map is not trace-preserving")


def is_cp(psi: QuantumMap, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    _require_hp(psi, tol)
    return linalg.min_eigenvalue(psi.choi) >= -tol.eig_tol


def is_cptp(psi: QuantumMap, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    return is_hp(psi, tol) and is_tp(psi, tol) and is_cp(psi, tol)


def maps_close(f: QuantumMap, g: QuantumMap, tol: float = DEFAULT_TOLERANCES.eq_tol) -> bool:
    if (f.dim_in, f.dim_out) != (g.dim_in, g.dim_out):
        return False
    return linalg.max_abs(f.choi - g.choi) <= tol


def choi_distance(f: QuantumMap, g: QuantumMap) -> float:
    f._check_same_shape(g)
    return linalg.max_abs(f.choi - g.choi)


# ---------------------------------------------------------------------------
# representations


def to_signed_kraus(psi: QuantumMap, tol: Tolerances = DEFAULT_TOLERANCES) -> SignedKrausRep:
    """Spectral signed operator-sum form of an HP map.

    Each Choi eigenpair with ``|w| > eig_tol`` gives the term
    ``(sign(w), sqrt|w| unvec(v))``; positive terms come first.
    """
    _require_hp(psi, tol)
    w, v = linalg.eig_hermitian(psi.choi, tol.eq_tol)
    terms = []
    for lam, vec in zip(w, v.T):
        if abs(lam) > tol.eig_tol:
            op = np.sqrt(abs(lam)) * vec.reshape(psi.dim_out, psi.dim_in)
            terms.append((1 if lam > 0 else -1, op))
    return SignedKrausRep.from_pairs(terms, psi.dim_in, psi.dim_out)


def from_signed_kraus(rep: SignedKrausRep, dim_in: int | None = None, dim_out: int | None = None) -> QuantumMap:
    n = rep.dim_in if dim_in is None else dim_in
    m = rep.dim_out if dim_out is None else dim_out
    if (n, m) != (rep.dim_in, rep.dim_out):
        raise DimensionMismatch(f"representation is {rep.dim_out}x{rep.dim_in}, requested ({n}, {m})")
    choi = np.zeros((n * m, n * m), dtype=complex)
    for s, e in rep.terms:
        v = e.reshape(-1, 1)
        choi += s * (v @ dag(v))
    return QuantumMap(n, m, choi)


def jordan_hahn(psi: QuantumMap, tol: Tolerances = DEFAULT_TOLERANCES) -> JordanHahn:
    """Write an HPTP map as ``p0 Phi0 - p1 Phi1`` with CPTP ``Phi0, Phi1``.

    The split starts from the spectral positive/negative parts ``P, Q`` of the Choi
    matrix. When the input marginal of ``Q`` is not a multiple of the identity (so
    ``Q / Tr Q`` would not be trace-preserving), the same PSD term
    ``(I_m / m) (x) (q I - Tr_out Q)`` is added to both parts with ``q`` the largest
    eigenvalue of ``Tr_out Q``; this is the smallest shift of that form making both
    normalized parts CPTP.
    """
    require_hptp(psi, tol)
    n, m = psi.dim_in, psi.dim_out
    w, v = linalg.eig_hermitian(psi.choi, tol.eq_tol)
    pos = w > tol.eig_tol
    neg = w < -tol.eig_tol
    p_part = (v[:, pos] * w[pos]) @ dag(v[:, pos])
    q_part = (v[:, neg] * -w[neg]) @ dag(v[:, neg])
    marg = linalg.partial_trace(q_part, m, n, "first")
    q = float(np.linalg.eigvalsh((marg + dag(marg)) / 2)[-1]) if neg.any() else 0.0
    shift = q * np.eye(n) - marg
    if linalg.max_abs(shift) > tol.eq_tol:
        d = np.kron(np.eye(m) / m, shift)
        p_part = p_part + d
        q_part = q_part + d
    p0 = float(np.trace(p_part).real) / n
    p1 = float(np.trace(q_part).real) / n
    phi0 = QuantumMap(n, m, p_part / p0)
    phi1 = QuantumMap(n, m, q_part / p1) if p1 > tol.eig_tol else None
    return JordanHahn(p0, phi0, p1, phi1)


# ---------------------------------------------------------------------------
# algebra of maps


def compose(f: QuantumMap, g: QuantumMap) -> QuantumMap:
    """``f o g``, i.e. apply ``g`` first."""
    if g.dim_out != f.dim_in:
        raise DimensionMismatch(f"cannot compose: g outputs dim {g.dim_out}, f expects {f.dim_in}")
    return QuantumMap.from_transfer(f.transfer @ g.transfer, g.dim_in, f.dim_out)


def dual(psi: QuantumMap) -> QuantumMap:
    """Adjoint under the trace pairing: ``Tr(dual(y) x) = Tr(y psi(x))``."""
    t = psi.tensor
    tstar = np.einsum("srqp->pqrs", t)
    n, m = psi.dim_in, psi.dim_out
    return QuantumMap(m, n, tstar.reshape(m * n, m * n))


def inverse(psi: QuantumMap, tol: Tolerances = DEFAULT_TOLERANCES) -> QuantumMap:
    """Inverse map via LU factorization of the transfer matrix.

    Raises :class:`SingularMap` when the 2-norm condition number of the transfer
    matrix exceeds ``1 / eig_tol``.
    """
    if psi.dim_in != psi.dim_out:
        raise DimensionMismatch("only maps with equal input and output dimension can be inverted")
    k = psi.transfer
    cond = np.linalg.cond(k)
    limit = 1.0 / tol.eig_tol if tol.eig_tol > 0 else np.inf
    if not np.isfinite(cond) or cond > limit:
        raise SingularMap(f"transfer matrix is singular (condition number {cond:.3e} > {limit:.1e})")
    lu = scipy.linalg.lu_factor(k)
    kinv = scipy.linalg.lu_solve(lu, np.eye(k.shape[0], dtype=complex))
    return QuantumMap.from_transfer(kinv, psi.dim_in, psi.dim_out)


def transfer_condition_number(psi: QuantumMap) -> float:
    return float(np.linalg.cond(psi.transfer))


def replacement_map(state, dim_in: int) -> QuantumMap:
    """``x -> Tr(x) state``."""
    state = linalg.as_matrix(state, "state")
    return QuantumMap(dim_in, state.shape[0], np.kron(state, np.eye(dim_in)))


def hermitian_part(psi: QuantumMap) -> QuantumMap:
    return QuantumMap(psi.dim_in, psi.dim_out, (psi.choi + dag(psi.choi)) / 2)
