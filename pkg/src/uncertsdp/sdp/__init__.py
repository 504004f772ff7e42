"""Semidefinite programming: a dense interior point solver and a small modeling layer."""
from .solver import (
    NONNEG,
    PSD,
    Certificate,
    SdpProblem,
    SdpSolution,
    certify,
    embed_hermitian,
    solve,
)
from .model import Affine, Model, ModelResult, SolverFailure

__all__ = [
    "NONNEG",
    "PSD",
    "Certificate",
    "SdpProblem",
    "SdpSolution",
    "certify",
    "embed_hermitian",
    "solve",
    "Affine",
    "Model",
    "ModelResult",
    "SolverFailure",
]
