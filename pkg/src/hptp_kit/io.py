"""JSON interchange formats.

Complex numbers are ``[re, im]`` pairs and matrices are row-major nested lists of
them. A map is either

    {"dim_in": n, "dim_out": m, "choi": [[[re, im], ...], ...]}

with the Choi matrix laid out output factor first, or

    {"dim_in": n, "dim_out": m, "kraus": [{"sign": 1, "matrix": [[[re, im], ...]]}, ...]}.

A code space is ``{"ambient_dim": N, "projector": [[...]]}``.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import HptpKitError
from .maps import QuantumMap, SignedKrausRep, from_signed_kraus, to_signed_kraus
from .qec import CodeSpace

SIGNIFICANT_DIGITS = 12


class ParseError(HptpKitError, ValueError):
    """Malformed input file."""


def _round(x: float) -> float:
    return float(f"{x:.{SIGNIFICANT_DIGITS}g}")


def encode_complex(z) -> list:
    z = complex(z)
    return [_round(z.real), _round(z.imag)]


def encode_matrix(a) -> list:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        return [encode_complex(z) for z in a]
    return [[encode_complex(z) for z in row] for row in a]


def decode_matrix(obj, name: str = "matrix") -> np.ndarray:
    """Nested lists of ``[re, im]`` pairs (plain real numbers are also accepted)."""
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ParseError(f"{name}: expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(obj):
        out = []
        for j, z in enumerate(row):
            if isinstance(z, (int, float)) and not isinstance(z, bool):
                out.append(complex(z))
            elif isinstance(z, list) and len(z) == 2 and all(isinstance(t, (int, float)) for t in z):
                out.append(complex(z[0], z[1]))
            else:
                raise ParseError(f"{name}[{i}][{j}]: expected [re, im], got {z!r}")
        rows.append(out)
    if len({len(r) for r in rows}) != 1:
        raise ParseError(f"{name}: rows have different lengths")
    a = np.array(rows, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise ParseError(f"{name}: non-finite entry")
    return a


def to_jsonable(obj):
    """Recursively convert numpy values, complex numbers and matrices for ``json.dumps``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return encode_matrix(obj)
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return _round(x) if np.isfinite(x) else None
    if isinstance(obj, complex):
        return encode_complex(obj)
    if isinstance(obj, QuantumMap):
        return map_to_json(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=False)


# ---------------------------------------------------------------------------
# maps


def map_to_json(psi: QuantumMap) -> dict:
    return {"dim_in": psi.dim_in, "dim_out": psi.dim_out, "choi": encode_matrix(psi.choi)}


def signed_kraus_to_json(rep: SignedKrausRep) -> dict:
    return {
        "dim_in": rep.dim_in,
        "dim_out": rep.dim_out,
        "kraus": [{"sign": s, "matrix": encode_matrix(e)} for s, e in rep.terms],
    }


def _dims(obj) -> tuple[int, int]:
    try:
        n, m = int(obj["dim_in"]), int(obj["dim_out"])
    except (KeyError, TypeError, ValueError):
        raise ParseError("map needs integer fields dim_in and dim_out") from None
    if n < 1 or m < 1:
        raise ParseError("dimensions must be positive")
    return n, m


def signed_kraus_from_json(obj) -> SignedKrausRep:
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object")
    n, m = _dims(obj)
    if "kraus" not in obj:
        if "choi" in obj:
            return to_signed_kraus(map_from_json(obj))
        raise ParseError("expected a 'kraus' or 'choi' field")
    terms = []
    for k, t in enumerate(obj["kraus"]):
        if not isinstance(t, dict) or "matrix" not in t:
            raise ParseError(f"kraus[{k}]: expected an object with 'sign' and 'matrix'")
        sign = t.get("sign", 1)
        if sign not in (1, -1):
            raise ParseError(f"kraus[{k}].sign must be 1 or -1")
        e = decode_matrix(t["matrix"], f"kraus[{k}].matrix")
        if e.shape != (m, n):
            raise ParseError(f"kraus[{k}].matrix has shape {e.shape}, expected {(m, n)}")
        terms.append((sign, e))
    return SignedKrausRep.from_pairs(terms, n, m)


def map_from_json(obj) -> QuantumMap:
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object")
    n, m = _dims(obj)
    if "choi" in obj:
        choi = decode_matrix(obj["choi"], "choi")
        if choi.shape != (n * m, n * m):
            raise ParseError(f"choi has shape {choi.shape}, expected {(n * m, n * m)}")
        return QuantumMap(n, m, choi)
    if "kraus" in obj:
        return from_signed_kraus(signed_kraus_from_json(obj))
    raise ParseError("expected a 'choi' or 'kraus' field")


def code_to_json(code: CodeSpace) -> dict:
    return {"ambient_dim": code.ambient_dim, "projector": encode_matrix(code.projector)}


def code_from_json(obj) -> CodeSpace:
    if not isinstance(obj, dict) or "projector" not in obj or "ambient_dim" not in obj:
        raise ParseError("code file needs 'ambient_dim' and 'projector'")
    p = decode_matrix(obj["projector"], "projector")
    try:
        return CodeSpace(int(obj["ambient_dim"]), p)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


# ---------------------------------------------------------------------------
# files


def load_json(path) -> object:
    """Read a JSON file; syntax errors are reported with line and column."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def load_map(path) -> QuantumMap:
    return map_from_json(load_json(path))


def load_signed_kraus(path) -> SignedKrausRep:
    return signed_kraus_from_json(load_json(path))


def load_code(path) -> CodeSpace:
    return code_from_json(load_json(path))


def load_matrix(path) -> np.ndarray:
    obj = load_json(path)
    if isinstance(obj, dict) and "matrix" in obj:
        obj = obj["matrix"]
    return decode_matrix(obj)


def save_json(obj, path) -> None:
    Path(path).write_text(dumps(obj) + "\n")
