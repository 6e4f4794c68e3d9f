"""Hermitian-preserving trace-preserving maps beyond complete positivity.

Maps are stored as Choi matrices (:class:`QuantumMap`). The package classifies them
in the hierarchy CP, positive, SPR, SP, SN, HPTP, factors SP and SN maps through
physical channels, builds unitary dilations and context circuits, and synthesizes
error-correcting recoveries for signed operator-sum noise.
"""
from .classify import MapClass, Positivity, Verdict, classify, duality_dichotomy, is_positive, is_sn, is_sp, is_spr
from .decompose import (
    SnDecomposition,
    SpDecomposition,
    convex_split,
    coverage_ratio,
    sn_decompose,
    sp_decompose,
    verify_sn_decomposition,
    verify_sp_decomposition,
)
from .linalg import DEFAULT_TOLERANCES, Tolerances
from .maps import (
    QuantumMap,
    SignedKrausRep,
    compose,
    dual,
    from_signed_kraus,
    inverse,
    is_cp,
    is_hp,
    is_tp,
    jordan_hahn,
    to_signed_kraus,
)
from .sdp import SdpResult, SdpSettings, hermitian_basis, solve_sn_program

__version__ = "0.1.0"
