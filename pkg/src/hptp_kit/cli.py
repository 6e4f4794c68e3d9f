"""Command-line front end.

Exit codes: 0 success, 2 parse or usage error, 3 input map not HPTP, 4 map in the
wrong class for the requested operation, 5 verification failure.
"""
from __future__ import annotations

import argparse
import sys
from contextlib import nullcontext
from dataclasses import asdict, dataclass

import numpy as np

from . import atlas, io
from .classify import classify
from .decompose import (
    SpDecomposition,
    convex_split,
    coverage_monte_carlo,
    coverage_ratio,
    sn_decompose,
    sp_decompose,
    verify_sn_decomposition,
    verify_sp_decomposition,
)
from .dilate import channel_dilation, example1_circuit, example1_dilations, realize_sp_map, simulate_context_circuit
from .errors import (
    DimensionMismatch,
    HptpKitError,
    InvalidAnchor,
    NonHPTPInput,
    NotCPTP,
    NotSN,
    NotSP,
    ParameterOutOfRange,
    UnknownRecipe,
    VerificationFailed,
)
from .linalg import Tolerances, max_abs
from .maps import QuantumMap, choi_distance, compose, inverse, is_hptp
from .qec import build_recovery, check_kl, verify_recovery
from .sdp import SdpSettings, default_threads

EXIT_OK, EXIT_PARSE, EXIT_NOT_HPTP, EXIT_WRONG_CLASS, EXIT_VERIFY = 0, 2, 3, 4, 5


@dataclass(frozen=True)
class RunConfig:
    tolerances: Tolerances
    seed: int
    output: str
    sdp: SdpSettings

    def to_json(self) -> dict:
        return {
            "tolerances": asdict(self.tolerances),
            "seed": self.seed,
            "output": self.output,
            "sdp": {"restarts": self.sdp.restarts, "max_iters": self.sdp.max_iters},
        }


class _Fail(Exception):
    def __init__(self, code: int, message: str, report: dict | None = None):
        super().__init__(message)
        self.code = code
        self.report = report or {}


# ---------------------------------------------------------------------------
# output


def _human(report: dict, indent: int = 0) -> str:
    lines = []
    pad = " " * indent
    for k, v in report.items():
        if isinstance(v, QuantumMap):
            v = {"dim_in": v.dim_in, "dim_out": v.dim_out, "choi": v.choi}
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(_human(v, indent + 2))
        elif isinstance(v, np.ndarray) or (isinstance(v, list) and v and isinstance(v[0], (list, np.ndarray))):
            arr = np.asarray(v)
            with np.printoptions(precision=6, suppress=True):
                body = str(arr).replace("\n", "\n" + pad + "  ")
            lines.append(f"{pad}{k}:\n{pad}  {body}")
        elif isinstance(v, float):
            lines.append(f"{pad}{k}: {v:.12g}")
        else:
            lines.append(f"{pad}{k}: {v}")
    return "\n".join(lines)


def _emit(config: RunConfig, command: str, report: dict, out=None) -> None:
    out = sys.stdout if out is None else out
    if config.output == "json":
        print(io.dumps({"command": command, "config": config.to_json(), **report}), file=out)
    else:
        print(_human(report), file=out)


# ---------------------------------------------------------------------------
# commands


def _load_hptp(path: str, config: RunConfig):
    psi = io.load_map(path)
    if not is_hptp(psi, config.tolerances):
        raise _Fail(EXIT_NOT_HPTP, f"{path}: map is not Hermitian-preserving and trace-preserving")
    return psi


def cmd_classify(args, config: RunConfig) -> tuple[int, dict]:
    psi = io.load_map(args.map_file)
    c = classify(psi, config.tolerances, config.sdp)
    report = {
        "verdict": c.verdict.value,
        "flags": {
            "hp": c.hp,
            "tp": c.tp,
            "cp": c.cp,
            "positive": None if c.positive is None else c.positive.value,
            "spr": c.spr,
            "sp": c.sp,
            "sn": c.sn,
        },
    }
    if c.sdp is not None:
        report["y_star"] = c.sdp.y_star
        report["y_lower"] = c.sdp.y_lower
        report["sdp_status"] = c.sdp.status.value
    witnesses = {}
    for name, w in (("sp", c.sp_witness), ("sn", c.sn_witness), ("positivity", c.positivity_witness)):
        if w is not None:
            witnesses[name] = np.asarray(w, dtype=complex)
    if witnesses:
        report["witnesses"] = witnesses
    code = EXIT_NOT_HPTP if c.verdict.value == "NotHPTP" else EXIT_OK
    return code, report


def cmd_decompose(args, config: RunConfig) -> tuple[int, dict]:
    psi = _load_hptp(args.map_file, config)
    tol = config.tolerances
    if args.kind == "sp":
        rho = io.load_matrix(args.rho) if args.rho else None
        d = sp_decompose(psi, rho, tol, config.sdp)
        check = verify_sp_decomposition(d, psi, tol)
        bundle = {"phi": d.phi, "xi": d.xi, "lambda": d.lam, "rho": np.asarray(d.rho, complex)}
        report = {"bundle": bundle, "verification": asdict(check), "coverage": coverage_ratio(d, tol)}
    elif args.kind == "sn":
        d = sn_decompose(psi, tol, config.sdp)
        check = verify_sn_decomposition(d, psi, tol)
        report = {"bundle": {"phi": d.phi, "xi": d.xi, "rho": np.asarray(d.rho, complex)}, "verification": asdict(check)}
    else:
        psi1, psi2 = convex_split(psi, tol)
        residual = choi_distance(0.5 * (psi1 + psi2), psi)
        check = {"residual": residual, "passed": residual <= tol.eq_tol}
        report = {"bundle": {"psi1": psi1, "psi2": psi2}, "verification": check}
    passed = report["verification"]["passed"]
    if args.out:
        io.save_json(report["bundle"], args.out)
    return (EXIT_OK if passed else EXIT_VERIFY), report


def demo_transpose_report(lam: float, config: RunConfig, samples: int = 50) -> dict:
    """Every check of the transpose walkthrough, as a flat report."""
    tol = config.tolerances
    t = atlas.transpose(2)
    phi, xi = atlas.example1_phi(lam), atlas.example1_xi(lam)
    choi_eigs = np.sort(np.linalg.eigvalsh(xi.choi))
    expected = np.sort([(1 + lam) / 2] * 3 + [(1 - 3 * lam) / 2])
    dphi, dxi = example1_dilations(lam)
    circuit = example1_circuit(lam)
    rng = atlas.rng_from_seed(config.seed)
    sim = 0.0
    for _ in range(samples):
        r1, r2 = simulate_context_circuit(circuit, atlas.random_density(2, rng))
        sim = max(sim, max_abs(r2 - r1.T))
    d = SpDecomposition(phi, xi, lam, np.eye(2) / 2)
    checks = {
        "xi_choi_spectrum": float(max_abs(choi_eigs - expected)),
        "transpose_residual": choi_distance(compose(xi, inverse(phi, tol)), t),
        "u_phi_unitarity": dphi.unitarity_residual(),
        "u_xi_unitarity": dxi.unitarity_residual(),
        "u_phi_dilation": choi_distance(dphi.channel(), phi),
        "u_xi_dilation": choi_distance(dxi.channel(), xi),
        "circuit_residual": float(sim),
    }
    return {
        "lambda": lam,
        "max_lambda_from_decomposition": sp_decompose(t, np.eye(2) / 2, tol, config.sdp).lam,
        "checks": checks,
        "coverage": coverage_ratio(d, tol),
        "coverage_monte_carlo": coverage_monte_carlo(d, 100_000, config.seed),
        "passed": bool(max(checks.values()) <= tol.eq_tol),
    }


def cmd_demo(args, config: RunConfig) -> tuple[int, dict]:
    report = demo_transpose_report(args.lam, config)
    return (EXIT_OK if report["passed"] else EXIT_VERIFY), report


def cmd_qec(args, config: RunConfig) -> tuple[int, dict]:
    tol = config.tolerances
    code = io.load_code(args.code_file)
    noise = io.load_signed_kraus(args.noise_file)
    kl = check_kl(code, noise, tol)
    report = {
        "satisfied": kl.satisfied,
        "max_violation": kl.max_violation,
        "alpha": kl.alpha,
    }
    if args.action == "check":
        return (EXIT_OK if kl.satisfied else EXIT_VERIFY), report
    if not kl.satisfied:
        raise _Fail(EXIT_VERIFY, "condition violated; no recovery exists by this construction", report)
    plan = build_recovery(code, noise, kl, tol)
    report["recovery"] = plan.recovery
    report["diagonalized_alpha"] = plan.diagonalized_alpha
    report["signs"] = plan.signs
    report["skipped_terms"] = plan.skipped_terms
    report["sign_sum"] = plan.sign_sum
    if args.action == "recover":
        if args.out:
            io.save_json(io.map_to_json(plan.recovery), args.out)
        return EXIT_OK, report
    check = verify_recovery(plan, noise, code, tol)
    report["residual"] = check.residual
    report["passed"] = check.passed
    return (EXIT_OK if check.passed else EXIT_VERIFY), report


_SAMPLE_PARAMS = {"lam": "lambda", "p": "p", "k": "k", "eps": "eps", "scale": "scale"}


def cmd_sample(args, config: RunConfig) -> tuple[int, dict]:
    name = args.recipe.replace("-", "_")
    params: dict = {}
    for attr, key in _SAMPLE_PARAMS.items():
        value = getattr(args, attr)
        if value is not None:
            params[key] = value
    if args.n is not None:
        params["n"] = args.n
    if args.m is not None:
        params["m"] = args.m
    if name.startswith("random_"):
        params["seed"] = config.seed
    if args.matrix:
        key = "D" if name == "indefinite_replacement" else "sigma"
        params[key] = io.load_matrix(args.matrix)
    psi = atlas.named_map(name, **params)
    if args.out:
        io.save_json(io.map_to_json(psi), args.out)
    return EXIT_OK, {"map": psi}


def cmd_dilate(args, config: RunConfig) -> tuple[int, dict]:
    psi = _load_hptp(args.map_file, config)
    try:
        dil = channel_dilation(psi, config.tolerances)
    except NotCPTP as exc:
        raise _Fail(EXIT_WRONG_CLASS, f"cannot dilate: {exc}") from None
    residual = choi_distance(dil.channel(), psi)
    report = {
        "env_dim": dil.env_dim,
        "unitary": dil.unitary,
        "unitarity_residual": dil.unitarity_residual(),
        "dilation_residual": residual,
        "passed": bool(residual <= config.tolerances.eq_tol and dil.unitarity_residual() <= config.tolerances.eq_tol),
    }
    if args.out:
        io.save_json({"env_dim": dil.env_dim, "unitary": io.encode_matrix(dil.unitary)}, args.out)
    return (EXIT_OK if report["passed"] else EXIT_VERIFY), report


def cmd_simulate(args, config: RunConfig) -> tuple[int, dict]:
    """Realize the map as a context circuit and compare ``rho''`` with ``Psi(rho')``."""
    psi = _load_hptp(args.map_file, config)
    tol = config.tolerances
    try:
        d = sp_decompose(psi, None, tol, config.sdp)
        kind = "sp"
    except NotSP:
        d = sn_decompose(psi, tol, config.sdp)
        kind = "sn"
    circuit = realize_sp_map(d, tol)
    rng = atlas.rng_from_seed(config.seed)
    states = [io.load_matrix(args.rho)] if args.rho else [atlas.random_density(psi.dim_in, rng) for _ in range(args.samples)]
    residual = 0.0
    last = None
    for rho in states:
        r1, r2 = simulate_context_circuit(circuit, rho)
        residual = max(residual, max_abs(psi(r1) - r2))
        last = (r1, r2)
    report = {
        "factorization": kind,
        "env_dim": circuit.u_c.env_dim,
        "samples": len(states),
        "residual": residual,
        "passed": bool(residual <= tol.eq_tol),
    }
    if args.rho:
        report["rho_s1"], report["rho_s2"] = last
    return (EXIT_OK if report["passed"] else EXIT_VERIFY), report


# ---------------------------------------------------------------------------
# argument parsing


def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--tol", type=float, default=d(1e-9), help="eigenvalue and equality tolerance (default 1e-9)")
    parser.add_argument("--sdp-tol", type=float, default=d(1e-7), help="SDP optimality band (default 1e-7)")
    parser.add_argument("--sdp-restarts", type=int, default=d(64), help="supergradient restarts (default 64)")
    parser.add_argument("--sdp-max-iters", type=int, default=d(5000), help="iterations per restart (default 5000)")
    parser.add_argument("--seed", type=int, default=d(0), help="seed for all sampling (default 0)")
    parser.add_argument("--output", choices=("human", "json"), default=d("human"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hptp-kit", description="Classify, decompose and realize HPTP maps.")
    _common(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _common(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="place a map in the CP/P/SPR/SP/SN hierarchy")
    p.add_argument("map_file")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("decompose", parents=[common], help="SP, SN or convex-split decomposition")
    p.add_argument("kind", choices=("sp", "sn", "convex"))
    p.add_argument("map_file")
    p.add_argument("--rho", help="anchor state file for the SP decomposition")
    p.add_argument("--out", help="write the decomposition bundle here")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("demo", parents=[common], help="end-to-end walkthroughs")
    p.add_argument("name", choices=("transpose",))
    p.add_argument("--lambda", dest="lam", type=float, default=1 / 3)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("qec", parents=[common], help="error-correction condition and recovery")
    p.add_argument("action", choices=("check", "recover", "verify"))
    p.add_argument("code_file")
    p.add_argument("noise_file")
    p.add_argument("--out", help="write the recovery map here (recover)")
    p.set_defaults(func=cmd_qec)

    p = sub.add_parser("sample", parents=[common], help="write a named or random map")
    p.add_argument("recipe")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--k", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--scale", type=float)
    p.add_argument("--matrix", help="matrix file for replacement recipes")
    p.add_argument("--out", help="write the map here instead of only printing it")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("dilate", parents=[common], help="unitary dilation of a channel")
    p.add_argument("map_file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_dilate)

    p = sub.add_parser("simulate", parents=[common], help="simulate the context circuit realizing a map")
    p.add_argument("map_file")
    p.add_argument("--rho", help="input state file (default: random states)")
    p.add_argument("--samples", type=int, default=20)
    p.set_defaults(func=cmd_simulate)
    return parser


def _config(args) -> RunConfig:
    tol = Tolerances(eig_tol=args.tol, eq_tol=args.tol, sdp_tol=args.sdp_tol)
    sdp = SdpSettings(restarts=args.sdp_restarts, max_iters=args.sdp_max_iters, seed=args.seed)
    return RunConfig(tol, args.seed, args.output, sdp)


def _thread_limit():
    n = default_threads()
    if n <= 0:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _config(args)
    except ValueError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_PARSE
    try:
        with _thread_limit():
            code, report = args.func(args, config)
    except _Fail as exc:
        print(f"error: {exc}", file=err)
        if exc.report:
            _emit(config, args.command, exc.report, out)
        return exc.code
    except io.ParseError as exc:
        print(f"parse error: {exc}", file=err)
        return EXIT_PARSE
    except (UnknownRecipe, ParameterOutOfRange, InvalidAnchor, DimensionMismatch) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_PARSE
    except NonHPTPInput as exc:
        print(f"error: {exc}", file=err)
        return EXIT_NOT_HPTP
    except (NotSP, NotSN) as exc:
        print(f"error: wrong class for this operation: {exc}", file=err)
        return EXIT_WRONG_CLASS
    except VerificationFailed as exc:
        print(f"error: {exc}", file=err)
        return EXIT_VERIFY
    except HptpKitError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_VERIFY
    _emit(config, args.command, report, out)
    return code


if __name__ == "__main__":
    sys.exit(main())
