"""Named maps and seeded random generators.

Every generator draws from ``np.random.Generator(np.random.Philox(seed))`` so a
``(dims, seed)`` pair always gives the same map.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import linalg
from .errors import ParameterOutOfRange, UnknownRecipe
from .linalg import dag
from .maps import QuantumMap, compose, inverse, replacement_map


def rng_from_seed(seed: int) -> np.random.Generator:
    """Counter-based generator used for all sampling in the package."""
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    return np.random.Generator(np.random.Philox(int(seed)))


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def random_density(n: int, rng: np.random.Generator) -> np.ndarray:
    """Full-rank density matrix ``G G^dag / Tr`` (Hilbert-Schmidt measure)."""
    g = _ginibre(rng, n, n)
    rho = g @ dag(g)
    return rho / np.trace(rho).real


# ---------------------------------------------------------------------------
# named maps


def transpose(n: int = 2) -> QuantumMap:
    return QuantumMap.from_function(lambda x: x.T, n)


def _check_example1_lambda(lam: float):
    if not 0 < lam <= 1 / 3 + 1e-12:
        raise ParameterOutOfRange(f"lambda must lie in (0, 1/3], got {lam}")


def example1_phi(lam: float) -> QuantumMap:
    """``x -> lam x + (1 - lam) Tr(x) I/2`` on qubits."""
    _check_example1_lambda(lam)
    return QuantumMap.from_function(lambda x: lam * x + (1 - lam) * np.trace(x) * np.eye(2) / 2, 2)


def example1_xi(lam: float) -> QuantumMap:
    """``x -> lam x^T + (1 - lam) Tr(x) I/2`` on qubits."""
    _check_example1_lambda(lam)
    return QuantumMap.from_function(lambda x: lam * x.T + (1 - lam) * np.trace(x) * np.eye(2) / 2, 2)


def example2_psi() -> QuantumMap:
    """``[[a, b], [c, d]] -> [[a + 2d, b], [c, -d]]``: semi-nonnegative, not semi-positive."""

    def f(x):
        return np.array([[x[0, 0] + 2 * x[1, 1], x[0, 1]], [x[1, 0], -x[1, 1]]])

    return QuantumMap.from_function(f, 2)


def example2_phi() -> QuantumMap:
    """Channel with Kraus operators ``|0><0|`` and ``|0><1|`` (reset to ``|0>``)."""
    k0 = np.array([[1, 0], [0, 0]], dtype=complex)
    k1 = np.array([[0, 1], [0, 0]], dtype=complex)
    return QuantumMap.from_kraus([k0, k1])


def replacement(sigma, dim_in: int | None = None) -> QuantumMap:
    """``x -> Tr(x) sigma`` for a density matrix ``sigma``."""
    sigma = linalg.as_matrix(sigma, "sigma")
    if not linalg.is_psd(sigma) or abs(np.trace(sigma) - 1) > 1e-9:
        raise ParameterOutOfRange("replacement state must be a density matrix")
    return replacement_map(sigma, sigma.shape[0] if dim_in is None else dim_in)


def indefinite_replacement(d, dim_in: int | None = None) -> QuantumMap:
    """``x -> Tr(x) D`` for a trace-one Hermitian (possibly indefinite) ``D``."""
    d = linalg.as_matrix(d, "D")
    if not linalg.is_hermitian(d) or abs(np.trace(d) - 1) > 1e-9:
        raise ParameterOutOfRange("D must be Hermitian with unit trace")
    return replacement_map(d, d.shape[0] if dim_in is None else dim_in)


def depolarizing(p: float, n: int = 2) -> QuantumMap:
    """``x -> (1 - p) x + p Tr(x) I/n``."""
    if not 0 <= p <= 1:
        raise ParameterOutOfRange(f"p must lie in [0, 1], got {p}")
    return QuantumMap.from_function(lambda x: (1 - p) * x + p * np.trace(x) * np.eye(n) / n, n)


def _traceless_diag(n: int) -> np.ndarray:
    z = np.zeros((n, n), dtype=complex)
    z[0, 0], z[1, 1] = 1, -1
    return z / np.sqrt(2)


def unbounded_family(k: float, n: int = 2, m: int = 2) -> QuantumMap:
    """``Tr(X) I/m + k Tr(Z1 X) Z2`` with ``Z = diag(1, -1, 0, ...)/sqrt(2)``.

    Trace-preserving and sends ``I/n`` to ``I/m`` for every ``k``, while the norm
    grows linearly in ``k``.
    """
    if n < 2 or m < 2:
        raise ParameterOutOfRange("unbounded_family needs n, m >= 2")
    z1, z2 = _traceless_diag(n), _traceless_diag(m)
    choi = np.kron(np.eye(m) / m, np.eye(n)) + k * np.kron(z2, z1.T)
    return QuantumMap(n, m, choi)


def gamma_eps(eps: float, n: int = 2, m: int = 2) -> QuantumMap:
    """``Tr(X) (|0><0| + eps Z)`` with ``Z = diag(m-1, -1, ..., -1)/(m-1)``; never SN for eps > 0."""
    if not 0 < eps < 1:
        raise ParameterOutOfRange(f"eps must lie in (0, 1), got {eps}")
    if m < 2:
        raise ParameterOutOfRange("gamma_eps needs m >= 2")
    sigma = np.zeros((m, m), dtype=complex)
    sigma[0, 0] = 1
    z = -np.eye(m, dtype=complex) / (m - 1)
    z[0, 0] = 1
    return replacement_map(sigma + eps * z, n)


def phi_eps(eps: float, n: int = 2, m: int = 2) -> QuantumMap:
    """``Tr(X) ((1 - eps)|0><0| + eps I/m)``; positive and SP for eps in (0, 1)."""
    if not 0 < eps < 1:
        raise ParameterOutOfRange(f"eps must lie in (0, 1), got {eps}")
    sigma = np.zeros((m, m), dtype=complex)
    sigma[0, 0] = 1
    return replacement_map((1 - eps) * sigma + eps * np.eye(m) / m, n)


def spr_counterexample(n: int = 2, m: int = 2) -> QuantumMap:
    """``Tr(X) E11 + Tr(E22 X)(E11 - E22)``: semi-nonnegative but not SPR."""
    if n < 2 or m < 2:
        raise ParameterOutOfRange("spr_counterexample needs n, m >= 2")
    e11_k = np.zeros((m, m), dtype=complex)
    e11_k[0, 0] = 1
    e22_k = np.zeros((m, m), dtype=complex)
    e22_k[1, 1] = 1
    e22_h = np.zeros((n, n), dtype=complex)
    e22_h[1, 1] = 1
    return QuantumMap(n, m, np.kron(e11_k, np.eye(n)) + np.kron(e11_k - e22_k, e22_h))


# ---------------------------------------------------------------------------
# random maps


def random_cptp(n: int, m: int, seed: int) -> QuantumMap:
    """Random channel: Choi ``G G^dag`` conditioned to identity input marginal.

    ``J = (I (x) M^{-1/2}) G G^dag (I (x) M^{-1/2})`` with ``M = Tr_out(G G^dag)``.
    """
    rng = rng_from_seed(seed)
    return _random_cptp(n, m, rng)


def _random_cptp(n: int, m: int, rng: np.random.Generator) -> QuantumMap:
    g = _ginibre(rng, n * m, n * m)
    j0 = g @ dag(g)
    marg = linalg.partial_trace(j0, m, n, "first")
    c = np.kron(np.eye(m), linalg.inv_sqrtm_pd(marg))
    j = c @ j0 @ c
    return QuantumMap(n, m, (j + dag(j)) / 2)


def random_hptp(n: int, m: int, seed: int, scale: float = 1.0) -> QuantumMap:
    """Random HPTP map.

    A Hermitian Gaussian matrix ``H`` (entries of size ``scale``) is projected onto
    the affine set ``{J : Tr_out J = I_n}`` in the Frobenius norm, which gives
    ``J = H - (I_m/m) (x) (Tr_out H - I_n)``.
    """
    rng = rng_from_seed(seed)
    g = _ginibre(rng, n * m, n * m)
    h = scale * (g + dag(g)) / 2
    marg = linalg.partial_trace(h, m, n, "first")
    return QuantumMap(n, m, h - np.kron(np.eye(m) / m, marg - np.eye(n)))


def random_invertible_cptp(n: int, seed: int) -> QuantumMap:
    """``mu id + (1 - mu) Phi0`` with random channel ``Phi0`` and ``mu`` in [0.55, 0.95].

    The transfer matrix of a channel has spectral radius 1, so any ``mu > 1/2``
    keeps the mixture invertible.
    """
    rng = rng_from_seed(seed)
    phi0 = _random_cptp(n, n, rng)
    mu = rng.uniform(0.55, 0.95)
    return mu * QuantumMap.identity(n) + (1 - mu) * phi0


def random_sp(n: int, seed: int) -> QuantumMap:
    """``Xi o Phi^{-1}`` for a random channel ``Xi`` and random invertible channel ``Phi``."""
    rng = rng_from_seed(seed)
    xi = _random_cptp(n, n, rng)
    phi0 = _random_cptp(n, n, rng)
    mu = rng.uniform(0.55, 0.95)
    phi = mu * QuantumMap.identity(n) + (1 - mu) * phi0
    return compose(xi, inverse(phi))


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class MapRecipe:
    name: str
    parameters: dict = field(default_factory=dict)
    dims: tuple[int, int] | None = None

    def __post_init__(self):
        if self.name not in RECIPES:
            raise UnknownRecipe(self.name)


def _dims_args(dims):
    if dims is None:
        return {}
    n, m = dims
    return {"n": n, "m": m}


def _square(f: Callable) -> Callable:
    def g(n: int = 2, m: int | None = None, **kw):
        if m is not None and m != n:
            raise ParameterOutOfRange("this recipe needs equal input and output dimensions")
        return f(n=n, **kw)

    return g


def _fixed_qubit(f: Callable) -> Callable:
    def g(n: int = 2, m: int = 2, **kw):
        if (n, m) != (2, 2):
            raise ParameterOutOfRange("this recipe is defined on qubits only")
        return f(**kw)

    return g


def _as_matrix_param(f: Callable, key: str) -> Callable:
    def g(n: int | None = None, m: int | None = None, **kw):
        mat = np.asarray(kw.pop(key), dtype=complex)
        if m is not None and m != mat.shape[0]:
            raise ParameterOutOfRange(f"{key} is {mat.shape[0]}-dimensional, requested output dimension {m}")
        return f(mat, dim_in=n, **kw)

    return g


RECIPES: dict[str, Callable[..., QuantumMap]] = {
    "identity": _square(lambda n: QuantumMap.identity(n)),
    "transpose": _square(lambda n: transpose(n)),
    "depolarizing": _square(lambda n, p: depolarizing(p, n)),
    "example1_phi": _fixed_qubit(lambda **kw: example1_phi(kw.get("lambda", kw.get("lam")))),
    "example1_xi": _fixed_qubit(lambda **kw: example1_xi(kw.get("lambda", kw.get("lam")))),
    "example2_psi": _fixed_qubit(example2_psi),
    "example2_phi": _fixed_qubit(example2_phi),
    "replacement": _as_matrix_param(replacement, "sigma"),
    "indefinite_replacement": _as_matrix_param(indefinite_replacement, "D"),
    "unbounded_family": lambda n=2, m=2, k=1.0: unbounded_family(k, n, m),
    "gamma_eps": lambda n=2, m=2, eps=0.5: gamma_eps(eps, n, m),
    "phi_eps": lambda n=2, m=2, eps=0.5: phi_eps(eps, n, m),
    "spr_counterexample": lambda n=2, m=2: spr_counterexample(n, m),
    "random_cptp": lambda n=2, m=None, seed=0: random_cptp(n, n if m is None else m, seed),
    "random_hptp": lambda n=2, m=None, seed=0, scale=1.0: random_hptp(n, n if m is None else m, seed, scale),
    "random_sp": _square(lambda n, seed=0: random_sp(n, seed)),
    "random_invertible_cptp": _square(lambda n, seed=0: random_invertible_cptp(n, seed)),
}


def named_map(recipe: MapRecipe | str, **parameters) -> QuantumMap:
    """Build a registered map. Accepts a :class:`MapRecipe` or a name plus keywords.

    Names are matched after replacing ``-`` with ``_``, so CLI spellings such as
    ``example1-xi`` work.
    """
    if isinstance(recipe, MapRecipe):
        name, params = recipe.name, {**_dims_args(recipe.dims), **recipe.parameters}
    else:
        name, params = recipe.replace("-", "_"), parameters
    if name not in RECIPES:
        raise UnknownRecipe(name)
    try:
        return RECIPES[name](**params)
    except TypeError as exc:
        raise ParameterOutOfRange(f"bad parameters for recipe {name!r}: {exc}") from None
