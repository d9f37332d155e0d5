"""Frames, Hermitian projections and the bundle map between them.

A frame is a k x n complex array with orthonormal rows; its Gram projection
``F^* F`` is an n x n Hermitian idempotent of trace k. Matrices are plain numpy
arrays throughout.
"""
from __future__ import annotations

import numpy as np

from .errors import (
    DimensionMismatch,
    EigenvalueTie,
    FrameInvariantViolated,
    NotAProjection,
    NotHermitian,
    TraceNotIntegral,
)
from .rng import as_rng, complex_gaussian

TOL_ALG = 1e-9
TIE_TOL = 1e-12


def maxabs(A) -> float:
    A = np.asarray(A)
    return float(np.max(np.abs(A))) if A.size else 0.0


def dagger(A: np.ndarray) -> np.ndarray:
    return np.conj(A).T


def hermitian_residual(H) -> float:
    H = np.asarray(H)
    return maxabs(H - dagger(H))


def tight_residual(F) -> float:
    """``max |F F^* - I_k|``."""
    F = np.asarray(F)
    k = F.shape[0]
    return maxabs(F @ dagger(F) - np.eye(k))


def check_frame(F, tol: float = TOL_ALG) -> np.ndarray:
    F = np.asarray(F, dtype=complex)
    if F.ndim != 2 or F.shape[0] > F.shape[1]:
        raise FrameInvariantViolated(f"frame must be k x n with k <= n, got shape {F.shape}")
    res = tight_residual(F)
    if res > tol:
        raise FrameInvariantViolated(f"||FF* - I|| = {res:.3e} exceeds {tol:.1e}")
    return F


def projection_rank(P, tol: float = TOL_ALG) -> int:
    """Validate a projection matrix and return its (integral) trace."""
    P = np.asarray(P)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise NotAProjection(f"projection must be square, got shape {P.shape}")
    if hermitian_residual(P) > tol:
        raise NotAProjection("matrix is not Hermitian")
    if maxabs(P @ P - P) > tol:
        raise NotAProjection("matrix is not idempotent")
    tr = np.trace(P)
    k = int(round(tr.real))
    if abs(tr.imag) > tol or abs(tr.real - k) > tol:
        raise TraceNotIntegral(f"trace {tr} is not an integer")
    return k


def gram_projection(F, tol: float = TOL_ALG) -> np.ndarray:
    """Bundle map ``F -> F^* F`` from frames to the Grassmannian."""
    F = check_frame(F, tol)
    return dagger(F) @ F


def column_norms(F) -> np.ndarray:
    """Squared column norms ``(|f_1|^2, ..., |f_n|^2)``."""
    F = np.asarray(F)
    return np.sum(F.real**2 + F.imag**2, axis=0)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # first significant entry made real positive
    mags = np.abs(v)
    j = int(np.argmax(mags > 1e-8 * mags.max())) if mags.max() > 0 else 0
    if mags[j] == 0:
        return v
    return v * (np.conj(v[j]) / mags[j])


def factor_projection(P, tol: float = TOL_ALG) -> np.ndarray:
    """A frame whose Gram projection is P.

    Rows are the eigenvectors of the k largest eigenvalues (descending, ties by
    index), each with its first significant entry real positive, conjugated so
    that ``F^* F = P``.
    """
    P = np.asarray(P, dtype=complex)
    k = projection_rank(P, tol)
    n = P.shape[0]
    w, V = np.linalg.eigh((P + dagger(P)) / 2)
    order = sorted(range(n), key=lambda i: (-round(w[i], 12), i))[:k]
    rows = [np.conj(_fix_phase(V[:, i])) for i in order]
    return np.array(rows, dtype=complex).reshape(k, n)


def unitary_act(U, F) -> np.ndarray:
    """Left action of U(k) on frames; preserves the Gram projection."""
    U = np.asarray(U)
    F = np.asarray(F)
    if U.ndim != 2 or U.shape[0] != U.shape[1] or U.shape[1] != F.shape[0]:
        raise DimensionMismatch(f"cannot act by {U.shape} on a frame of shape {F.shape}")
    return U @ F


def nearest_projection(H, k: int, tol: float = TOL_ALG) -> np.ndarray:
    """Projection onto the span of the k leading eigenvectors of a Hermitian H."""
    H = np.asarray(H, dtype=complex)
    n = H.shape[0]
    if hermitian_residual(H) > tol:
        raise NotHermitian("input to nearest_projection is not Hermitian")
    if not 0 <= k <= n:
        raise DimensionMismatch(f"rank {k} outside [0, {n}]")
    w, V = np.linalg.eigh((H + dagger(H)) / 2)
    if 0 < k < n and w[n - k] - w[n - k - 1] <= TIE_TOL:
        raise EigenvalueTie(f"eigenvalues {w[n - k - 1]:.15g} and {w[n - k]:.15g} are tied")
    top = V[:, n - k:]
    return top @ dagger(top)


def random_frame(n: int, k: int, seed=None) -> np.ndarray:
    """Haar-random frame: Gram-Schmidt (positive real pivots) on Gaussian rows."""
    if not 0 <= k <= n:
        raise DimensionMismatch(f"need 0 <= k <= n, got n={n}, k={k}")
    rng = as_rng(seed)
    if k == 0:
        return np.zeros((0, n), dtype=complex)
    Z = complex_gaussian(rng, (k, n))
    q, r = np.linalg.qr(dagger(Z))
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return dagger(q * ph[np.newaxis, :])


def random_projection(n: int, k: int, seed=None) -> np.ndarray:
    F = random_frame(n, k, seed)
    return dagger(F) @ F


def random_hermitian(n: int, seed=None) -> np.ndarray:
    """GUE-type Hermitian matrix with unit Frobenius norm."""
    rng = as_rng(seed)
    A = complex_gaussian(rng, (n, n))
    H = (A + dagger(A)) / 2
    return H / np.linalg.norm(H)


def tangent_project(P, Y) -> np.ndarray:
    """Orthogonal projection of a Hermitian Y onto the tangent space at P."""
    P = np.asarray(P)
    Q = np.eye(P.shape[0]) - P
    X = P @ Y @ Q
    return X + dagger(X)


def random_tangent(P, seed=None) -> np.ndarray:
    """Unit-norm random tangent vector at P."""
    X = tangent_project(P, random_hermitian(P.shape[0], seed))
    return X / np.linalg.norm(X)


def polar_unitary(A) -> np.ndarray:
    """Unitary factor of the polar decomposition of a square matrix."""
    u, _, vh = np.linalg.svd(A)
    return u @ vh
