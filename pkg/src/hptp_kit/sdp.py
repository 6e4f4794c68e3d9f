"""Feasibility program deciding semi-nonnegativity / semi-positivity.

For an HP map ``Psi: B(C^n) -> B(C^m)`` the program

    minimize y  s.t.  y I + X (+) Psi(X) >= 0,  X Hermitian,  Tr X = 1

is solved in its eigenvalue form: maximize the concave function

    f(X) = lambda_min(X (+) Psi(X))

over the trace-one affine slice and report ``y* = -max f``. ``X`` is parametrized
in an orthonormal Hermitian basis ``{V_k}`` whose first element is ``I / sqrt(n)``,
so the slice is ``X = I/n + sum_{k>=1} z_k V_k`` with free real ``z``.

Two phases:

1. projected supergradient ascent from many starting points (batched), with
   Polyak steps towards an adaptive target level;
2. a cutting-plane refinement. Every unit vector ``v`` gives a global affine upper
   bound ``f(X) <= v^dag (X (+) Psi(X)) v``; the LP over the collected bounds yields
   a certified upper bound on ``max f`` and the next trial point (Kelley's method).
"""
from __future__ import annotations

import enum
import os
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from . import linalg
from .errors import NonHPTPInput
from .linalg import DEFAULT_TOLERANCES, Tolerances, dag
from .maps import QuantumMap, apply_many, is_hp, is_tp


@dataclass(frozen=True)
class HermitianBasis:
    dim: int
    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.elements) != self.dim**2:
            raise ValueError(f"a Hermitian basis of {self.dim}x{self.dim} matrices has {self.dim**2} elements")

    def as_array(self) -> np.ndarray:
        return np.stack(self.elements)

    def gram(self) -> np.ndarray:
        b = self.as_array()
        return np.einsum("kab,lba->kl", b, b).real

    def coordinates(self, x) -> np.ndarray:
        """Real coordinates ``Tr(V_k X)`` of a Hermitian matrix."""
        return np.einsum("kab,ba->k", self.as_array(), np.asarray(x, complex)).real

    def combine(self, coeffs) -> np.ndarray:
        return np.einsum("k,kab->ab", np.asarray(coeffs, float), self.as_array())


def hermitian_basis(n: int) -> HermitianBasis:
    """Normalized generalized Gell-Mann basis, identity element first.

    Order: ``I/sqrt(n)``; then for each pair ``j < k`` the symmetric element
    ``(E_jk + E_kj)/sqrt(2)`` followed by ``-i (E_jk - E_kj)/sqrt(2)``; then the
    traceless diagonal elements.
    """
    if n < 1:
        raise ValueError("dimension must be at least 1")
    els = [np.eye(n, dtype=complex) / np.sqrt(n)]
    for j in range(n):
        for k in range(j + 1, n):
            s = np.zeros((n, n), dtype=complex)
            s[j, k] = s[k, j] = 1 / np.sqrt(2)
            a = np.zeros((n, n), dtype=complex)
            a[j, k] = -1j / np.sqrt(2)
            a[k, j] = 1j / np.sqrt(2)
            els += [s, a]
    for l in range(1, n):
        d = np.zeros(n)
        d[:l] = 1
        d[l] = -l
        els.append(np.diag(d / np.sqrt(l * (l + 1))).astype(complex))
    return HermitianBasis(n, tuple(els))


class SdpStatus(str, enum.Enum):
    CONVERGED = "Converged"
    ITERATION_LIMIT = "IterationLimit"


@dataclass(frozen=True)
class SdpResult:
    """Outcome of :func:`solve_sn_program`.

    ``y_star`` is attained by ``witness_state`` (``y_star = -f(witness_state)``);
    ``y_lower`` is a certified lower bound on the true optimum from the
    cutting-plane model. Their difference is the remaining optimality gap.
    """

    y_star: float
    x: np.ndarray
    witness_state: np.ndarray
    status: SdpStatus
    y_lower: float
    iterations: int
    restart_spread: float

    @property
    def gap(self) -> float:
        return self.y_star - self.y_lower

    @property
    def converged(self) -> bool:
        return self.status is SdpStatus.CONVERGED


@dataclass(frozen=True)
class SdpSettings:
    restarts: int = 64
    max_iters: int = 5000
    refine_iters: int = 400
    seed: int = 0
    norm_cap: float = 1e6

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1 or self.refine_iters < 0:
            raise ValueError("restarts and max_iters must be positive, refine_iters nonnegative")


DEFAULT_SDP_SETTINGS = SdpSettings()


def sn_objective(psi: QuantumMap, x) -> float:
    """``lambda_min(X (+) Psi(X))``."""
    x = np.asarray(x, complex)
    return min(linalg.min_eigenvalue(x), linalg.min_eigenvalue(psi(x)))


class _Problem:
    """Affine matrix pencil ``M(z) = M0 + sum_k z_k M_k`` for a given map."""

    def __init__(self, psi: QuantumMap):
        n, m = psi.dim_in, psi.dim_out
        self.n, self.m = n, m
        self.basis = hermitian_basis(n)
        vs = self.basis.as_array()
        images = apply_many(psi, vs)
        images = (images + dag(images)) / 2
        s = n + m
        blocks = np.zeros((n * n, s, s), dtype=complex)
        blocks[:, :n, :n] = vs
        blocks[:, n:, n:] = images
        scale = 1 / np.sqrt(n)
        self.m0 = blocks[0] * scale
        self.mk = blocks[1:]
        self.d = n * n - 1
        self.vs = vs

    def matrices(self, z: np.ndarray) -> np.ndarray:
        return self.m0 + np.einsum("rk,kab->rab", z, self.mk)

    def evaluate(self, z: np.ndarray):
        """Objective values, supergradients and full eigen-decompositions for a batch."""
        w, v = np.linalg.eigh(self.matrices(z))
        vmin = v[:, :, 0]
        g = np.einsum("ra,kab,rb->rk", vmin.conj(), self.mk, vmin).real
        return w[:, 0], g, w, v

    def cuts(self, vecs: np.ndarray):
        """Affine upper bounds ``c + a.z`` from unit vectors (rows of ``vecs``)."""
        c = np.einsum("ra,ab,rb->r", vecs.conj(), self.m0, vecs).real
        a = np.einsum("ra,kab,rb->rk", vecs.conj(), self.mk, vecs).real
        return c, a

    def state(self, z: np.ndarray) -> np.ndarray:
        return self.m0[: self.n, : self.n] + np.einsum("k,kab->ab", z, self.mk[:, : self.n, : self.n])

    def full_coordinates(self, z: np.ndarray) -> np.ndarray:
        return np.concatenate([[1 / np.sqrt(self.n)], z])


def _start_points(prob: _Problem, settings: SdpSettings) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(settings.seed))
    n, r = prob.n, settings.restarts
    z = np.zeros((r, prob.d))
    for i in range(1, r):
        g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        rho = g @ dag(g)
        rho /= np.trace(rho).real
        z[i] = prob.basis.coordinates(rho)[1:]
    return z


_WINDOW = 50
_CUT_MARGIN = 0.5
_WINDOW_PROGRESS = 1e-4


def _ascent(prob: _Problem, settings: SdpSettings, target_tol: float):
    """Batched supergradient ascent; returns best points, values and iteration count."""
    z = _start_points(prob, settings)
    r = z.shape[0]
    f, g, _, _ = prob.evaluate(z)
    best_f, best_z = f.copy(), z.copy()
    delta = np.full(r, 0.5)
    stall = np.zeros(r, dtype=int)
    active = np.ones(r, dtype=bool)
    capped = False
    window_best = best_f.copy()
    it = 0
    for it in range(1, settings.max_iters + 1):
        if not active.any():
            break
        if it % _WINDOW == 0:
            # slow progress is left to the cutting-plane phase
            active &= best_f - window_best > _WINDOW_PROGRESS
            window_best = best_f.copy()
        gn2 = np.einsum("rk,rk->r", g, g)
        dead = gn2 <= 1e-30
        active &= ~dead
        step = np.where(active, (best_f + delta - f) / np.where(dead, 1.0, gn2), 0.0)
        z = z + step[:, None] * g
        norms = np.linalg.norm(z, axis=1)
        over = norms > settings.norm_cap
        if over.any():
            capped = True
            z[over] = best_z[over]
            active &= ~over
        f, g, _, _ = prob.evaluate(z)
        improved = active & (f > best_f)
        best_f = np.where(improved, f, best_f)
        best_z[improved] = z[improved]
        stall = np.where(improved, 0, stall + 1)
        shrink = active & (stall >= 20)
        delta = np.where(shrink, delta / 2, delta)
        stall[shrink] = 0
        if shrink.any():
            z[shrink] = best_z[shrink]
            fz, gz, _, _ = prob.evaluate(best_z[shrink])
            f[shrink], g[shrink] = fz, gz
        active &= delta > target_tol
    return best_z, best_f, it, capped


def _lp_max(c, a, lo, hi, tol):
    """Maximize t subject to t <= c_j + a_j.z and box bounds on z."""
    d = a.shape[1]
    obj = np.zeros(d + 1)
    obj[-1] = -1.0
    a_ub = np.hstack([-a, np.ones((a.shape[0], 1))])
    bounds = [(lo[k], hi[k]) for k in range(d)] + [(None, None)]
    res = linprog(
        obj,
        A_ub=a_ub,
        b_ub=c,
        bounds=bounds,
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        return None, None
    zopt = res.x[:d]
    return float(np.min(c + a @ zopt)), zopt


def solve_sn_program(
    psi: QuantumMap,
    tol: Tolerances = DEFAULT_TOLERANCES,
    settings: SdpSettings = DEFAULT_SDP_SETTINGS,
    require_tp: bool = True,
) -> SdpResult:
    """Solve the semi-nonnegativity program for an HP(TP) map.

    ``require_tp=False`` admits HP maps that are not trace-preserving (the program
    itself only needs Hermiticity; the dual-map test relies on this).
    Non-convergence is reported through ``status``, never raised.
    """
    if not is_hp(psi, tol) or (require_tp and not is_tp(psi, tol)):
        raise NonHPTPInput("the semi-nonnegativity program needs a Hermitian-preserving, trace-preserving map")
    prob = _Problem(psi)
    gap_target = min(0.1 * tol.sdp_tol, tol.eig_tol) if tol.sdp_tol > 0 else tol.eig_tol
    gap_target = max(gap_target, 1e-12)

    if prob.d == 0:
        w, _ = np.linalg.eigh(prob.m0)
        fval = float(w[0])
        x = np.array([1.0])
        return SdpResult(-fval, x, prob.state(np.zeros(0)), SdpStatus.CONVERGED, -fval, 0, 0.0)

    zs, fs, iters, capped = _ascent(prob, settings, max(gap_target, 1e-6))
    order = np.argsort(-fs, kind="stable")
    spread = float(fs.max() - fs.min())
    best = int(order[0])
    z_best, f_best = zs[best].copy(), float(fs[best])

    # cut bank from every restart's best point
    _, _, _, v = prob.evaluate(zs)
    c, a = prob.cuts(v.transpose(0, 2, 1).reshape(-1, v.shape[1]))
    # cuts far above the incumbent are rarely active near the optimum
    keep = c + a @ z_best <= f_best + _CUT_MARGIN
    c, a = c[keep], a[keep]

    def box():
        flo = min(f_best, 0.0)
        n = prob.n
        span = max(abs(flo - 1 / n), abs(1 - (n - 1) * flo - 1 / n))
        r = np.sqrt(n) * span * (1 + 1e-9) + 1e-12
        return np.full(prob.d, -r), np.full(prob.d, r)

    upper = np.inf
    status = SdpStatus.ITERATION_LIMIT
    refine = 0
    for refine in range(settings.refine_iters + 1):
        lo, hi = box()
        upper_new, z_u = _lp_max(c, a, lo, hi, gap_target)
        if upper_new is None:
            break
        upper = max(min(upper, upper_new), f_best)
        if upper - f_best <= gap_target:
            status = SdpStatus.CONVERGED
            break
        if refine == settings.refine_iters:
            break
        ft, _, _, vt = prob.evaluate(z_u[None, :])
        nc, na = prob.cuts(vt[0].T)
        c = np.concatenate([c, nc])
        a = np.vstack([a, na])
        if ft[0] > f_best:
            f_best, z_best = float(ft[0]), z_u.copy()

    if capped and status is not SdpStatus.CONVERGED:
        status = SdpStatus.ITERATION_LIMIT
    x = prob.full_coordinates(z_best)
    witness = prob.state(z_best)
    witness = (witness + dag(witness)) / 2
    y_lower = -upper if np.isfinite(upper) else -np.inf
    return SdpResult(-f_best, x, witness, status, y_lower, iters + refine, spread)


def default_threads() -> int:
    """Thread cap from ``HPTP_KIT_THREADS`` (unset or invalid means no cap, 0)."""
    try:
        return max(0, int(os.environ.get("HPTP_KIT_THREADS", "0")))
    except ValueError:
        return 0
