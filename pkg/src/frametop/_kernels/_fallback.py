"""Pure-Python/numpy implementations of the hot kernels.

Semantics are shared with the compiled ``_core`` module; see ``__init__`` for
the selection logic. Status codes returned by :func:`retract_flow`:

    0 converged, 1 critical point, 2 iteration limit, 3 eigenvalue tie,
    4 line search stalled.
"""
from __future__ import annotations

import numpy as np

CONVERGED, CRITICAL, ITERATION_LIMIT, TIE, STALLED = range(5)


def _split(H, k, tie_tol):
    """Top-k / bottom-(n-k) spectral projections of a Hermitian matrix.

    Returns ``None`` when the k-th and (k+1)-th eigenvalues are tied.
    """
    n = H.shape[0]
    w, V = np.linalg.eigh(H)
    if 0 < k < n and w[n - k] - w[n - k - 1] <= tie_tol:
        return None
    top = V[:, n - k:]
    bot = V[:, : n - k]
    return top @ top.conj().T, bot @ bot.conj().T


def _residual(P, Q, d):
    # entries near 1 are measured through the complement to avoid cancellation
    return np.where(d <= 0.5, P.diagonal().real - d, (1.0 - d) - Q.diagonal().real)


def _grad(P, Q, r):
    X = (P * (2.0 * r)[np.newaxis, :]) @ Q
    return X + X.conj().T


def _next_step(eta, rho, growth, shrink, step_max):
    """Quadratic-model step update: along the ray, f(t) ~ f - g2 t + A t^2 and the
    observed decrease ratio rho puts the model minimizer at t / (2 (1 - rho))."""
    target = eta * growth if rho >= 1 - 0.5 / growth else eta / (2 * (1 - rho))
    return min(max(target, eta * shrink), eta * growth, step_max)


def retract_flow(P0, d, k, step0, step_max, step_growth, armijo_c, backtrack_factor,
                 max_backtracks, max_iter, f_tol, grad_tol, f_crit, tie_tol):
    P0 = np.asarray(P0, dtype=complex)
    d = np.asarray(d, dtype=float)
    fs, gs, steps = [], [], []
    split = _split(P0, k, tie_tol)
    if split is None:
        return P0.copy(), np.array([np.nan]), np.array([np.nan]), np.array([0.0]), TIE
    P, Q = split
    r = _residual(P, Q, d)
    f = float(r @ r)
    if f <= f_tol:
        X = _grad(P, Q, r)
        return P0.copy(), np.array([f]), np.array([np.linalg.norm(X)]), np.array([0.0]), CONVERGED
    eta = step0
    last_step = 0.0
    status = ITERATION_LIMIT
    for _ in range(max_iter + 1):
        X = _grad(P, Q, r)
        g2 = float(np.sum(X.real**2 + X.imag**2))
        g = np.sqrt(g2)
        fs.append(f)
        gs.append(g)
        steps.append(last_step)
        if f <= f_tol:
            status = CONVERGED
            break
        if g <= grad_tol and f > f_crit:
            status = CRITICAL
            break
        if len(fs) > max_iter:
            status = ITERATION_LIMIT
            break
        accepted = False
        tied = True
        for _bt in range(max_backtracks + 1):
            trial = _split(P - eta * X, k, tie_tol)
            if trial is not None:
                tied = False
                Pn, Qn = trial
                rn = _residual(Pn, Qn, d)
                fn = float(rn @ rn)
                if fn <= f - armijo_c * eta * g2:
                    accepted = True
                    break
            eta *= backtrack_factor
        if not accepted:
            status = TIE if tied else STALLED
            break
        rho = (f - fn) / (eta * g2)
        P, Q, r, f = Pn, Qn, rn, fn
        last_step = eta
        eta = _next_step(eta, rho, step_growth, backtrack_factor, step_max)
    return P, np.array(fs), np.array(gs), np.array(steps), status


def level_partitions(d, k, sep_tol, feas_tol):
    """Set partitions of range(n) with per-block capacities whose block levels
    ``(c_i - sum_{B_i} d) / |B_i|`` keep ``d + level`` inside [0, 1] and are
    pairwise separated by more than ``sep_tol``.

    Returns a list of ``(labels, capacities, levels)`` with block ids in
    first-occurrence order.
    """
    d = [float(x) for x in d]
    n = len(d)
    out = []
    if n == 0:
        return out
    labels = [0] * n

    def emit(nblocks):
        sizes = [0] * nblocks
        sums = [0.0] * nblocks
        lo = [2.0] * nblocks
        hi = [-1.0] * nblocks
        for j, b in enumerate(labels):
            sizes[b] += 1
            sums[b] += d[j]
            lo[b] = min(lo[b], d[j])
            hi[b] = max(hi[b], d[j])
        options = []
        for b in range(nblocks):
            opts = []
            for c in range(sizes[b] + 1):
                alpha = (c - sums[b]) / sizes[b]
                if lo[b] + alpha >= -feas_tol and hi[b] + alpha <= 1.0 + feas_tol:
                    opts.append((c, alpha))
            if not opts:
                return
            options.append(opts)
        caps = [0] * nblocks
        alphas = [0.0] * nblocks

        def assign(b, remaining):
            if b == nblocks:
                if remaining != 0:
                    return
                srt = sorted(alphas)
                for i in range(1, nblocks):
                    if srt[i] - srt[i - 1] <= sep_tol:
                        return
                out.append((list(labels), list(caps), list(alphas)))
                return
            for c, alpha in options[b]:
                if c > remaining:
                    break
                caps[b] = c
                alphas[b] = alpha
                assign(b + 1, remaining - c)

        assign(0, k)

    def grow(j, nblocks):
        if j == n:
            emit(nblocks)
            return
        for b in range(nblocks + 1):
            labels[j] = b
            grow(j + 1, max(nblocks, b + 1))

    labels[0] = 0
    grow(1, 1)
    return out


def all_subset_sums_at_least(d, r, threshold):
    """True iff every r-element subset of d sums to at least `threshold`."""
    d = [float(x) for x in d]
    n = len(d)
    if r > n:
        return True
    idx = list(range(r))
    while True:
        if sum(d[i] for i in idx) < threshold:
            return False
        i = r - 1
        while i >= 0 and idx[i] == i + n - r:
            i -= 1
        if i < 0:
            return True
        idx[i] += 1
        for j in range(i + 1, r):
            idx[j] = idx[j - 1] + 1


def schur_horn_chain(d_sorted, k, tol):
    """Givens chain from Diag(1^k, 0^(n-k)) to a real projection with diagonal
    `d_sorted` (non-increasing). Returns (P, rotations, max residual)."""
    d = np.asarray(d_sorted, dtype=float)
    n = d.shape[0]
    P = np.zeros((n, n))
    P[np.arange(k), np.arange(k)] = 1.0
    p = np.diagonal(P).copy()
    rotations = 0
    while True:
        i = next((t for t in range(n) if p[t] > d[t] + tol), -1)
        j = next((t for t in range(n) if p[t] < d[t] - tol), -1)
        if i < 0 or j < 0:
            break
        x, y = p[i], p[j]
        give, take = x - d[i], d[j] - y
        delta = min(give, take)
        s2 = delta / (x - y)
        c, s = np.sqrt(1.0 - s2), np.sqrt(s2)
        ri, rj = P[i].copy(), P[j].copy()
        P[i], P[j] = c * ri + s * rj, -s * ri + c * rj
        ci, cj = P[:, i].copy(), P[:, j].copy()
        P[:, i], P[:, j] = c * ci + s * cj, -s * ci + c * cj
        p[i] = d[i] if give <= take else x - delta
        p[j] = d[j] if take <= give else y + delta
        P[i, i], P[j, j] = p[i], p[j]
        rotations += 1
    resid = float(np.max(np.abs(p - d))) if n else 0.0
    return P, rotations, resid
