"""Projections with a prescribed diagonal, and frames with prescribed column norms.

The construction is a Givens chain: starting from the coordinate projection onto
the k largest targets, each plane rotation moves diagonal weight from an entry
above its target to one below, pinning at least one of the two exactly. Working
in coordinates sorted by decreasing target keeps every prefix sum of the current
diagonal above the target's, which guarantees that the rotation angle exists and
that at most n-1 rotations are needed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, NumericalStall
from .hermitian import column_norms, factor_projection, tight_residual, unitary_act
from .polytope import TOL_POLY, norm_vector
from .rng import as_rng, haar_unitary

PIN_TOL = 1e-15


def schur_horn_rotations(d, k: int | None = None) -> tuple[np.ndarray, int]:
    """Real symmetric rank-k projection with diagonal d and the number of rotations used."""
    d, k = norm_vector(d, k)
    n = len(d)
    order = np.argsort(-d, kind="stable")
    P_sorted, rotations, resid = _kernels.schur_horn_chain(d[order], k, PIN_TOL)
    if resid > TOL_POLY:
        raise NumericalStall(f"Givens chain stopped with diagonal residual {resid:.3e}")
    P = np.empty((n, n))
    P[np.ix_(order, order)] = P_sorted
    return P, rotations


def construct_projection_with_diagonal(d, k: int | None = None) -> np.ndarray:
    """Rank-k Hermitian projection whose diagonal is d."""
    P, _ = schur_horn_rotations(d, k)
    return P.astype(complex)


def construct_frame(d, seed=None, k: int | None = None) -> np.ndarray:
    """A frame with ``F F^* = I_k`` and squared column norms d.

    The Schur-Horn projection is factored and then moved along its fiber by a
    Haar-random unitary drawn from `seed`.
    """
    d, k = norm_vector(d, k)
    P = construct_projection_with_diagonal(d, k)
    F = factor_projection(P)
    return unitary_act(haar_unitary(k, as_rng(seed)), F)


@dataclass(frozen=True)
class MembershipReport:
    tight_residual: float
    norm_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.tight_residual <= self.tol and self.norm_residual <= self.tol

    def to_dict(self) -> dict:
        return {
            "tight_residual": self.tight_residual,
            "norm_residual": self.norm_residual,
            "tol": self.tol,
            "passed": self.passed,
        }


def verify_membership(F, d, tol: float = 1e-9) -> MembershipReport:
    F = np.asarray(F)
    d = np.asarray(d, dtype=float)
    if F.ndim != 2 or F.shape[1] != d.shape[0]:
        raise DimensionMismatch(f"frame of shape {F.shape} vs norm vector of length {d.shape[0]}")
    norm_res = float(np.max(np.abs(column_norms(F) - d))) if d.size else 0.0
    return MembershipReport(tight_residual(F), norm_res, tol)
