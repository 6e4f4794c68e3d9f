"""Unitary dilations and the two-unitary context circuit.

Joint states live on ``system (x) environment`` with the environment second; a
dilation of the channel with Kraus operators ``E_k`` maps ``|i>|0>`` to
``sum_k E_k|i> |k>``. The explicit Example-1 unitaries are written environment
first, as block matrices; :func:`env_first_to_system_first` converts between the two.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .errors import DimensionMismatch, NotCPTP, ParameterOutOfRange
from .linalg import DEFAULT_TOLERANCES, Tolerances, dag
from .maps import QuantumMap, SignedKrausRep, to_signed_kraus


def _ket0(d: int) -> np.ndarray:
    e = np.zeros((d, d), dtype=complex)
    e[0, 0] = 1
    return e


@dataclass(frozen=True)
class Dilation:
    unitary: np.ndarray
    env_dim: int
    env_state: np.ndarray = field(default=None)

    def __post_init__(self):
        u = linalg.as_matrix(self.unitary, "unitary")
        if u.shape[0] % self.env_dim or u.shape[0] != u.shape[1]:
            raise DimensionMismatch(f"unitary of shape {u.shape} does not factor with env_dim {self.env_dim}")
        env = _ket0(self.env_dim) if self.env_state is None else linalg.as_matrix(self.env_state, "env_state")
        if env.shape != (self.env_dim, self.env_dim):
            raise DimensionMismatch("environment state has the wrong size")
        object.__setattr__(self, "unitary", u)
        object.__setattr__(self, "env_state", env)

    @property
    def sys_dim(self) -> int:
        return self.unitary.shape[0] // self.env_dim

    def apply(self, rho) -> np.ndarray:
        """``Tr_E[U (rho (x) env) U^dag]``."""
        joint = self.unitary @ np.kron(rho, self.env_state) @ dag(self.unitary)
        return linalg.partial_trace(joint, self.sys_dim, self.env_dim, "second")

    def channel(self) -> QuantumMap:
        return QuantumMap.from_function(self.apply, self.sys_dim)

    def unitarity_residual(self) -> float:
        u = self.unitary
        return linalg.max_abs(dag(u) @ u - np.eye(u.shape[0]))


@dataclass(frozen=True)
class ContextCircuit:
    """Context unitary ``u_c`` (with its environment state) followed by ``u`` on the same joint space."""

    u_c: Dilation
    u: np.ndarray

    def __post_init__(self):
        u = linalg.as_matrix(self.u, "u")
        if u.shape != self.u_c.unitary.shape:
            raise DimensionMismatch(f"second unitary has shape {u.shape}, context unitary {self.u_c.unitary.shape}")
        object.__setattr__(self, "u", u)


def env_first_to_system_first(u, sys_dim: int, env_dim: int) -> np.ndarray:
    """Reorder a joint operator from ``E (x) S`` to ``S (x) E``."""
    u = linalg.as_matrix(u)
    t = u.reshape(env_dim, sys_dim, env_dim, sys_dim).transpose(1, 0, 3, 2)
    return t.reshape(sys_dim * env_dim, sys_dim * env_dim)


def _isometry_to_unitary(ops: Sequence[np.ndarray]) -> np.ndarray:
    n = ops[0].shape[1]
    d = len(ops)
    v = np.zeros((n * d, n), dtype=complex)
    for k, e in enumerate(ops):
        v[k::d, :] = e  # row (a, k) -> a*d + k
    # orthonormalize the isometry exactly before completing it
    q, r = np.linalg.qr(v)
    q = q * np.sign(np.diag(r).real + (np.diag(r).real == 0))
    comp = linalg.orthonormal_completion(q)
    u = np.zeros((n * d, n * d), dtype=complex)
    cols0 = np.arange(n) * d
    rest = np.setdiff1d(np.arange(n * d), cols0)
    u[:, cols0] = v
    u[:, rest] = comp
    return u


def stinespring(rep: SignedKrausRep | Sequence[np.ndarray], tol: Tolerances = DEFAULT_TOLERANCES, env_dim: int | None = None) -> Dilation:
    """Dilation of a channel given by Kraus operators (all signs ``+1``).

    ``env_dim`` pads the Kraus list with zero operators to a larger environment.
    """
    if not isinstance(rep, SignedKrausRep):
        rep = SignedKrausRep.from_pairs([(1, e) for e in rep])
    if any(s != 1 for s in rep.signs):
        raise NotCPTP("every term of a channel's Kraus representation must have sign +1")
    if rep.dim_in != rep.dim_out:
        raise DimensionMismatch("a dilation on a joint space needs equal input and output dimensions")
    n = rep.dim_in
    if linalg.max_abs(rep.normalization() - np.eye(n)) > tol.eq_tol:
        raise NotCPTP("Kraus operators are not normalized: sum E^dag E != I")
    ops = list(rep.operators)
    d = len(ops) if env_dim is None else env_dim
    if d < len(ops):
        raise DimensionMismatch(f"env_dim {d} is smaller than the number of Kraus operators {len(ops)}")
    ops += [np.zeros((n, n), dtype=complex)] * (d - len(ops))
    return Dilation(_isometry_to_unitary(ops), d)


def channel_dilation(phi: QuantumMap, tol: Tolerances = DEFAULT_TOLERANCES, env_dim: int | None = None) -> Dilation:
    """Dilation of a channel from its spectral Kraus operators."""
    rep = to_signed_kraus(phi, tol)
    if any(s != 1 for s in rep.signs):
        raise NotCPTP("map is not completely positive")
    return stinespring(rep, tol, env_dim)


# ---------------------------------------------------------------------------
# Example 1


def example1_kraus(lam: float):
    """Kraus sets ``(C_0..C_3)`` for ``Phi`` and ``(D_0..D_3)`` for ``Xi``."""
    if not 0 < lam <= 1 / 3 + 1e-12:
        raise ParameterOutOfRange(f"lambda must lie in (0, 1/3], got {lam}")
    lam = min(lam, 1 / 3)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    iy = np.array([[0, 1], [-1, 0]], dtype=complex)
    z = np.diag([1, -1]).astype(complex)
    e01 = np.array([[0, 1], [0, 0]], dtype=complex)
    a0 = np.sqrt((1 - lam) / 2) * e01
    a1 = np.sqrt((1 - lam) / 2) * e01.T
    a2 = np.sqrt(1 + 3 * lam) / 2 * np.eye(2)
    a3 = np.sqrt(1 - lam) / 2 * z
    b0 = np.sqrt((1 + lam) / 2) * np.diag([1, 0]).astype(complex)
    b1 = np.sqrt((1 + lam) / 2) * np.diag([0, 1]).astype(complex)
    b2 = np.sqrt(1 + lam) / 2 * x
    b3 = np.sqrt(1 - 3 * lam) / 2 * iy
    s = 1 / np.sqrt(2)
    # C_1 = A_1: the rotation relating (A_k) and (C_k) is I (+) Hadamard
    c = (a0, a1, s * (a2 + a3), s * (a2 - a3))
    d = (b0, b1, s * (b2 + b3), s * (b2 - b3))
    return c, d


def example1_unitaries(lam: float) -> tuple[np.ndarray, np.ndarray]:
    """The 8x8 block unitaries ``U_Phi`` and ``U_Xi`` (environment first, 4x4 grid of 2x2 blocks)."""
    (c0, c1, c2, c3), (d0, d1, d2, d3) = example1_kraus(lam)
    h = dag
    u_phi = np.block(
        [
            [c2, -c3, h(c0), h(c1)],
            [c3, c2, h(c1), -h(c0)],
            [c0, c1, -c3, c2],
            [c1, -c0, -c2, -c3],
        ]
    )
    u_xi = np.block(
        [
            [d0, -d1, h(d2), h(d3)],
            [d1, d0, h(d3), -h(d2)],
            [d2, d3, -d1, d0],
            [d3, -d2, -d0, -d1],
        ]
    )
    return u_phi, u_xi


def example1_dilations(lam: float) -> tuple[Dilation, Dilation]:
    """Example-1 unitaries reordered to system-first, as dilations with environment ``|0>``."""
    u_phi, u_xi = example1_unitaries(lam)
    return (
        Dilation(env_first_to_system_first(u_phi, 2, 4), 4),
        Dilation(env_first_to_system_first(u_xi, 2, 4), 4),
    )


def example1_circuit(lam: float) -> ContextCircuit:
    dphi, dxi = example1_dilations(lam)
    return ContextCircuit(dphi, dxi.unitary @ dag(dphi.unitary))


# ---------------------------------------------------------------------------
# circuits


def swap_unitary(d: int) -> np.ndarray:
    """Swap of two ``d``-dimensional factors."""
    s = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1
    return s


def swap_circuit(env_state) -> ContextCircuit:
    """Two swaps: the system is first replaced by ``env_state`` and then restored."""
    env_state = linalg.as_matrix(env_state, "env_state")
    d = env_state.shape[0]
    s = swap_unitary(d)
    return ContextCircuit(Dilation(s, d, env_state), s)


def simulate_context_circuit(c: ContextCircuit, rho_s) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(rho_S', rho_S'')``: the system after ``U_c`` and after ``U``.

    ``U`` acts on the full correlated joint state left by ``U_c``.
    """
    rho_s = linalg.as_matrix(rho_s, "rho_s")
    n, d = c.u_c.sys_dim, c.u_c.env_dim
    if rho_s.shape != (n, n):
        raise DimensionMismatch(f"system state has shape {rho_s.shape}, expected {(n, n)}")
    joint = c.u_c.unitary @ np.kron(rho_s, c.u_c.env_state) @ dag(c.u_c.unitary)
    rho1 = linalg.partial_trace(joint, n, d, "second")
    joint = c.u @ joint @ dag(c.u)
    rho2 = linalg.partial_trace(joint, n, d, "second")
    return rho1, rho2


def realize_factorization(phi: QuantumMap, xi: QuantumMap, tol: Tolerances = DEFAULT_TOLERANCES) -> ContextCircuit:
    """Circuit with ``U_c = U_Phi`` and ``U = U_Xi U_Phi^dag`` on a common environment."""
    rep_phi, rep_xi = to_signed_kraus(phi, tol), to_signed_kraus(xi, tol)
    d = max(len(rep_phi), len(rep_xi), 1)
    u_phi = stinespring(rep_phi, tol, d)
    u_xi = stinespring(rep_xi, tol, d)
    return ContextCircuit(u_phi, u_xi.unitary @ dag(u_phi.unitary))


def realize_sp_map(d, tol: Tolerances = DEFAULT_TOLERANCES) -> ContextCircuit:
    """Circuit for an :class:`~hptp_kit.decompose.SpDecomposition` (or SN one)."""
    return realize_factorization(d.phi, d.xi, tol)
