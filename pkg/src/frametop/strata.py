"""Strata of the norm-squared moment map on the Grassmannian.

A critical point P of ``f = |mu(P) - d|^2`` commutes with ``Diag(a)`` where
``a = mu(P) - d``, so a is constant on the blocks of a set partition and P is
block diagonal. Block i carries a projection of some rank ``c_i``, whence its
level is ``alpha_i = (c_i - sum_{B_i} d) / |B_i|``. Enumerating partitions and
capacities, keeping the feasible ones with distinct levels, lists every
critical component together with the complex codimension of its stratum.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import _kernels
from .errors import AmbiguousEigenvalue, BadComposition, InfeasibleDescriptor, TooLarge
from .flow import height
from .hermitian import dagger, factor_projection
from .polytope import norm_vector
from .rng import as_rng
from .schur_horn import schur_horn_rotations

LEVEL_SEPARATION = 1e-9
FEASIBILITY_TOL = 1e-12
ZERO_LEVEL = 1e-12


@dataclass(frozen=True)
class StratumDescriptor:
    """Blocks are 0-based index tuples ordered by strictly decreasing level."""

    blocks: tuple[tuple[int, ...], ...]
    capacities: tuple[int, ...]
    levels: tuple[float, ...]
    a: np.ndarray
    codim_complex: int

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    @property
    def energy_level(self) -> float:
        return float(self.a @ self.a)

    @property
    def is_minimum(self) -> bool:
        return not np.any(self.a)

    def key(self) -> tuple:
        return tuple(np.round(self.a, 9).tolist())

    def to_dict(self) -> dict:
        return {
            "blocks": [[j + 1 for j in b] for b in self.blocks],
            "capacities": list(self.capacities),
            "alphas": list(self.levels),
            "a": self.a.tolist(),
            "codim_complex": self.codim_complex,
            "energy_level": self.energy_level,
        }


def stratum_codim(multiplicities, capacities) -> int:
    """``sum_{i<j} c_i (m_j - c_j)`` for blocks listed by decreasing level."""
    m = [int(x) for x in multiplicities]
    c = [int(x) for x in capacities]
    if len(m) != len(c) or any(not 0 <= ci <= mi for ci, mi in zip(c, m)):
        raise BadComposition(f"capacities {c} incompatible with multiplicities {m}")
    total, free_below = 0, 0
    for mi, ci in zip(reversed(m), reversed(c)):
        total += ci * free_below
        free_below += mi - ci
    return total


def _descriptor(d, labels, caps, alphas) -> StratumDescriptor:
    nb = len(caps)
    order = sorted(range(nb), key=lambda b: -alphas[b])
    blocks = tuple(tuple(j for j, lab in enumerate(labels) if lab == b) for b in order)
    capacities = tuple(int(caps[b]) for b in order)
    # sum(d) carries rounding, so the level of the minimum stratum can come out at ~1e-16
    levels = tuple(0.0 if abs(alphas[b]) <= ZERO_LEVEL else float(alphas[b]) for b in order)
    a = np.zeros(len(d))
    for blk, lev in zip(blocks, levels):
        a[list(blk)] = lev
    return StratumDescriptor(blocks, capacities, levels, a, stratum_codim([len(b) for b in blocks], capacities))


def enumerate_strata(d, k: int | None = None, max_n: int = 9) -> list[StratumDescriptor]:
    """Every critical component of f for the norm vector d, sorted by codimension."""
    d, k = norm_vector(d, k)
    if len(d) > max_n:
        raise TooLarge(f"strata enumeration is limited to n <= {max_n}")
    merged: dict[tuple, StratumDescriptor] = {}
    for labels, caps, alphas in _kernels.level_partitions(d, k, LEVEL_SEPARATION, FEASIBILITY_TOL):
        desc = _descriptor(d, labels, caps, alphas)
        merged.setdefault(desc.key(), desc)
    return sorted(merged.values(), key=lambda s: (s.codim_complex, s.energy_level, s.key()))


def min_positive_codim(d, k: int | None = None, max_n: int = 9) -> int | None:
    """Smallest codimension among strata with a != 0 (None if there are none)."""
    codims = [s.codim_complex for s in enumerate_strata(d, k, max_n) if not s.is_minimum]
    return min(codims) if codims else None


def _block_targets(desc: StratumDescriptor, d) -> list[np.ndarray]:
    targets = []
    for blk, c, lev in zip(desc.blocks, desc.capacities, desc.levels):
        t = np.asarray(d, dtype=float)[list(blk)] + lev
        if np.any(t < -1e-9) or np.any(t > 1 + 1e-9) or abs(t.sum() - c) > 1e-9:
            raise InfeasibleDescriptor(f"block {blk} cannot carry rank {c} with diagonal {t.tolist()}")
        targets.append(np.clip(t, 0.0, 1.0))
    return targets


def critical_manifold_point(desc: StratumDescriptor, d, seed=None) -> np.ndarray:
    """A point of the critical component: block-diagonal along the blocks, block i a
    rank-c_i projection with diagonal ``d + alpha_i``, twisted by random torus phases."""
    rng = as_rng(seed)
    d = np.asarray(d, dtype=float)
    n = len(d)
    P = np.zeros((n, n), dtype=complex)
    for blk, c, t in zip(desc.blocks, desc.capacities, _block_targets(desc, d)):
        idx = np.array(blk)
        sub, _ = schur_horn_rotations(t, c)
        P[np.ix_(idx, idx)] = sub
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    return phases[:, np.newaxis] * P * np.conj(phases)[np.newaxis, :]


def tangent_basis(P) -> list[np.ndarray]:
    """Orthonormal real basis (trace metric) of ``{X Hermitian : XP + PX = X}``."""
    n = P.shape[0]
    F = factor_projection(P)
    G = factor_projection(np.eye(n) - P)
    basis = []
    for i in range(F.shape[0]):
        for j in range(G.shape[0]):
            for w in (1.0, 1j):
                X = np.outer(np.conj(F[i]), G[j]) * (w / np.sqrt(2))
                basis.append(X + dagger(X))
    return basis


def _height_hessian(P, a, basis, eps: float) -> np.ndarray:
    def h_along(X):
        omega = X @ P - P @ X
        U = expm(omega)
        return height(U @ P @ dagger(U), a)

    m = len(basis)
    H = np.zeros((m, m))
    h0 = height(P, a)
    for p in range(m):
        H[p, p] = (h_along(eps * basis[p]) - 2 * h0 + h_along(-eps * basis[p])) / eps**2
        for q in range(p + 1, m):
            s, t = basis[p] + basis[q], basis[p] - basis[q]
            val = (h_along(eps * s) + h_along(-eps * s) - h_along(eps * t) - h_along(-eps * t)) / (4 * eps**2)
            H[p, q] = H[q, p] = val
    return H


def hessian_index_oracle(desc: StratumDescriptor, d, seed=None, eps: float = 1e-3,
                         rel_threshold: float = 1e-6) -> int:
    """Complex Morse index of the height function of a along the critical component.

    The Hessian is estimated by central differences along geodesics
    ``exp(t[X, P]) P exp(-t[X, P])`` and Richardson-extrapolated; eigenvalues
    below ``-rel_threshold * max|eig|`` count as negative.
    """
    d = np.asarray(d, dtype=float)
    if len(d) > 6:
        raise TooLarge("hessian_index_oracle is limited to n <= 6")
    P = critical_manifold_point(desc, d, seed)
    basis = tangent_basis(P)
    if not basis:
        return 0
    H = (4 * _height_hessian(P, desc.a, basis, eps / 2) - _height_hessian(P, desc.a, basis, eps)) / 3
    w = np.linalg.eigvalsh((H + H.T) / 2)
    scale = np.max(np.abs(w))
    if scale == 0 or scale < 1e-10:
        return 0
    thr = rel_threshold * scale
    if np.any((np.abs(w) > thr / 10) & (np.abs(w) < 10 * thr)):
        raise AmbiguousEigenvalue("a Hessian eigenvalue lies inside the classification band")
    negatives = int(np.sum(w < -thr))
    if negatives % 2:
        raise AmbiguousEigenvalue(f"odd number ({negatives}) of negative directions")
    return negatives // 2


def intersection_dims(P, desc: StratumDescriptor, tol: float = 1e-6) -> list[int]:
    """``dim(range P  cap  span of blocks 1..j)`` for every prefix j."""
    F = factor_projection(P)
    dims, cols = [], []
    for blk in desc.blocks:
        cols.extend(blk)
        if F.shape[0] == 0:
            dims.append(0)
            continue
        s = np.linalg.svd(F[:, cols], compute_uv=False)
        dims.append(int(np.sum(s >= 1 - tol)))
    return dims


def stable_manifold_membership(P, desc: StratumDescriptor, tol: float = 1e-6) -> bool:
    return intersection_dims(P, desc, tol) == list(np.cumsum(desc.capacities))
