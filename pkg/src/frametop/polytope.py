"""Membership and subset-sum tests on the polytope of admissible norm vectors.

A norm vector ``d`` of length n is admissible for rank k when ``0 <= d_j <= 1``
and ``sum(d) == k``; these are exactly the diagonals of rank-k projections.
"""
from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .errors import BadDimensions, NotInPolytope, TooLarge
from .rng import as_rng

TOL_POLY = 1e-9
BRUTE_FORCE_LIMIT = 10**6


def in_polytope(d, k: int, tol: float = TOL_POLY) -> bool:
    d = np.asarray(d, dtype=float)
    if d.ndim != 1:
        return False
    return bool(np.all(d >= -tol) and np.all(d <= 1 + tol) and abs(d.sum() - k) <= tol)


def infer_rank(d) -> int:
    return int(round(float(np.sum(d))))


def norm_vector(d, k: int | None = None, tol: float = TOL_POLY) -> tuple[np.ndarray, int]:
    """Validate ``d`` against the polytope and return ``(d, k)``.

    When k is omitted it is taken as the rounded sum of d.
    """
    d = np.asarray(d, dtype=float)
    if k is None:
        k = infer_rank(d)
    if not in_polytope(d, k, tol):
        raise NotInPolytope(f"d={d.tolist()} is not in the polytope for k={k}")
    return d, int(k)


def min_subset_sum(d, k: int) -> float:
    """Smallest sum over (n-k)-subsets: the sum of the n-k smallest entries."""
    d = np.sort(np.asarray(d, dtype=float))
    return float(d[: len(d) - k].sum())


def satisfies_hypothesis(d, k: int | None = None, tol: float = TOL_POLY) -> bool:
    """Every choice of n-k distinct entries of d sums to at least 1.

    Boundary equality counts as satisfied. For n == k the single empty subset
    has sum 0, so the answer is False.
    """
    d, k = norm_vector(d, k, tol)
    return min_subset_sum(d, k) >= 1 - tol


def brute_force_hypothesis(d, k: int | None = None, tol: float = TOL_POLY) -> bool:
    """Exhaustive check of every (n-k)-subset; oracle for :func:`satisfies_hypothesis`."""
    d, k = norm_vector(d, k, tol)
    n = len(d)
    if math.comb(n, n - k) > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"C({n}, {n - k}) subsets exceeds {BRUTE_FORCE_LIMIT}")
    return bool(_kernels.all_subset_sums_at_least(d, n - k, 1 - tol))


def uniform_d(n: int, k: int) -> np.ndarray:
    if n < 1 or not 0 <= k <= n:
        raise BadDimensions(f"need n >= 1 and 0 <= k <= n, got n={n}, k={k}")
    return np.full(n, k / n)


def sample_polytope(n: int, k: int, seed=None, max_tries: int = 100_000) -> np.ndarray:
    """Random point of the polytope by rejection from a scaled flat Dirichlet.

    For k > n/2 the complement ``1 - d`` of a sample for n-k is returned, which
    keeps the acceptance rate reasonable.
    """
    if n < 1 or not 0 <= k <= n:
        raise BadDimensions(f"need n >= 1 and 0 <= k <= n, got n={n}, k={k}")
    rng = as_rng(seed)
    if k == 0:
        return np.zeros(n)
    if k == n:
        return np.ones(n)
    if 2 * k > n:
        return 1.0 - sample_polytope(n, n - k, rng, max_tries)
    for _ in range(max_tries):
        d = k * rng.dirichlet(np.ones(n))
        if d.max() <= 1.0:
            return d
    raise TooLarge(f"rejection sampling for n={n}, k={k} exceeded {max_tries} tries")


def sample_hypothesis(n: int, k: int, seed=None) -> np.ndarray:
    """Random point of the polytope that satisfies the subset-sum hypothesis.

    The admissible region is convex and contains ``uniform_d(n, k)``; a polytope
    sample x is pulled toward it to ``u + s (x - u)`` with s uniform on
    ``[0, s_max]``, s_max the largest admissible scale. For n = 4, k = 2 the
    region is the single point u.
    """
    if not 2 <= k <= n - 2:
        raise BadDimensions(f"no admissible d exists for n={n}, k={k}")
    rng = as_rng(seed)
    u = uniform_d(n, k)
    x = sample_polytope(n, k, rng)
    lo, hi = 0.0, 1.0
    if min_subset_sum(x, k) < 1:
        for _ in range(60):
            mid = (lo + hi) / 2
            if min_subset_sum(u + mid * (x - u), k) >= 1:
                lo = mid
            else:
                hi = mid
        hi = lo
    return u + rng.uniform(0.0, hi) * (x - u)
