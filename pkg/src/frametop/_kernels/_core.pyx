# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Same contracts as ``_fallback``; see that module."""
import numpy as np

from libc.math cimport sqrt, INFINITY
from scipy.linalg.cython_lapack cimport zheev

cdef enum:
    CONVERGED = 0
    CRITICAL = 1
    ITERATION_LIMIT = 2
    TIE = 3
    STALLED = 4


cdef class _Workspace:
    cdef int n, lwork
    cdef double complex[::1] a
    cdef double complex[::1] work
    cdef double[::1] w
    cdef double[::1] rwork

    def __cinit__(self, int n):
        self.n = n
        self.lwork = max(1, 33 * n)
        self.a = np.empty(max(1, n * n), dtype=np.complex128)
        self.work = np.empty(self.lwork, dtype=np.complex128)
        self.w = np.empty(max(1, n), dtype=np.float64)
        self.rwork = np.empty(max(1, 3 * n - 2), dtype=np.float64)


cdef int _split(_Workspace ws, const double complex[:, ::1] H, int k, double tie_tol,
                double complex[:, ::1] P, double complex[:, ::1] Q) noexcept nogil:
    """Spectral projections onto the top-k and bottom-(n-k) eigenspaces of H.
    Returns 0 on success, 1 on an eigenvalue tie, -1 on LAPACK failure."""
    cdef int n = ws.n, i, j, m, info = 0
    cdef char jobz = b'V'
    cdef char uplo = b'L'
    cdef double complex acc
    if n == 0:
        return 0
    for j in range(n):
        for i in range(n):
            ws.a[i + j * n] = H[i, j]
    zheev(&jobz, &uplo, &n, &ws.a[0], &n, &ws.w[0], &ws.work[0], &ws.lwork, &ws.rwork[0], &info)
    if info != 0:
        return -1
    if 0 < k < n and ws.w[n - k] - ws.w[n - k - 1] <= tie_tol:
        return 1
    for i in range(n):
        for j in range(i, n):
            acc = 0.0
            for m in range(n - k, n):
                acc = acc + ws.a[i + m * n] * ws.a[j + m * n].conjugate()
            P[i, j] = acc
            P[j, i] = acc.conjugate()
            acc = 0.0
            for m in range(n - k):
                acc = acc + ws.a[i + m * n] * ws.a[j + m * n].conjugate()
            Q[i, j] = acc
            Q[j, i] = acc.conjugate()
    for i in range(n):
        P[i, i] = P[i, i].real
        Q[i, i] = Q[i, i].real
    return 0


cdef double _residual(const double complex[:, ::1] P, const double complex[:, ::1] Q,
                      const double[::1] d, double[::1] r) noexcept nogil:
    cdef Py_ssize_t j, n = d.shape[0]
    cdef double f = 0.0
    for j in range(n):
        if d[j] <= 0.5:
            r[j] = P[j, j].real - d[j]
        else:
            r[j] = (1.0 - d[j]) - Q[j, j].real
        f += r[j] * r[j]
    return f


cdef double _grad(const double complex[:, ::1] P, const double complex[:, ::1] Q,
                  const double[::1] r, double complex[:, ::1] T,
                  double complex[:, ::1] X) noexcept nogil:
    """X = P G Q + Q G P with G = 2 Diag(r); returns ||X||_F^2."""
    cdef Py_ssize_t i, j, m, n = r.shape[0]
    cdef double complex acc
    cdef double g2 = 0.0
    for i in range(n):
        for m in range(n):
            T[i, m] = P[i, m] * (2.0 * r[m])
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for m in range(n):
                acc = acc + T[i, m] * Q[m, j]
            X[i, j] = acc
    for i in range(n):
        for j in range(i, n):
            acc = X[i, j] + X[j, i].conjugate()
            X[i, j] = acc
            X[j, i] = acc.conjugate()
            if i == j:
                g2 += acc.real * acc.real
            else:
                g2 += 2.0 * (acc.real * acc.real + acc.imag * acc.imag)
    return g2


cdef inline double _next_step(double eta, double rho, double growth, double shrink,
                              double step_max) nogil:
    cdef double target
    if rho >= 1.0 - 0.5 / growth:
        target = eta * growth
    else:
        target = eta / (2.0 * (1.0 - rho))
    if target < eta * shrink:
        target = eta * shrink
    if target > eta * growth:
        target = eta * growth
    if target > step_max:
        target = step_max
    return target


def retract_flow(P0, d, int k, double step0, double step_max, double step_growth,
                 double armijo_c, double backtrack_factor, int max_backtracks,
                 int max_iter, double f_tol, double grad_tol, double f_crit, double tie_tol):
    cdef double complex[:, ::1] P_in = np.ascontiguousarray(P0, dtype=np.complex128)
    cdef double[::1] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef int n = dv.shape[0]
    cdef _Workspace ws = _Workspace(n)
    cdef double complex[:, ::1] P = np.empty((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] Q = np.empty((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] Pn = np.empty((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] Qn = np.empty((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] H = np.empty((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] X = np.empty((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] T = np.empty((n, n), dtype=np.complex128)
    cdef double[::1] r = np.empty(n, dtype=np.float64)
    cdef double[::1] rn = np.empty(n, dtype=np.float64)
    fs_arr = np.empty(max_iter + 1, dtype=np.float64)
    gs_arr = np.empty(max_iter + 1, dtype=np.float64)
    st_arr = np.empty(max_iter + 1, dtype=np.float64)
    cdef double[::1] fs = fs_arr
    cdef double[::1] gs = gs_arr
    cdef double[::1] st = st_arr
    cdef int rc, count = 0, bt, i, j, status = ITERATION_LIMIT
    cdef double f, fn, g2, eta, rho, last_step = 0.0
    cdef bint accepted, tied

    with nogil:
        rc = _split(ws, P_in, k, tie_tol, P, Q)
    if rc != 0:
        if rc < 0:
            raise np.linalg.LinAlgError("zheev failed")
        return np.array(P_in), np.array([np.nan]), np.array([np.nan]), np.array([0.0]), TIE
    f = _residual(P, Q, dv, r)
    if f <= f_tol:
        g2 = _grad(P, Q, r, T, X)
        return np.array(P_in), np.array([f]), np.array([sqrt(g2)]), np.array([0.0]), CONVERGED

    eta = step0
    with nogil:
        while True:
            g2 = _grad(P, Q, r, T, X)
            fs[count] = f
            gs[count] = sqrt(g2)
            st[count] = last_step
            count += 1
            if f <= f_tol:
                status = CONVERGED
                break
            if sqrt(g2) <= grad_tol and f > f_crit:
                status = CRITICAL
                break
            if count > max_iter:
                status = ITERATION_LIMIT
                break
            accepted = False
            tied = True
            for bt in range(max_backtracks + 1):
                for i in range(n):
                    for j in range(n):
                        H[i, j] = P[i, j] - eta * X[i, j]
                rc = _split(ws, H, k, tie_tol, Pn, Qn)
                if rc < 0:
                    break
                if rc == 0:
                    tied = False
                    fn = _residual(Pn, Qn, dv, rn)
                    if fn <= f - armijo_c * eta * g2:
                        accepted = True
                        break
                eta *= backtrack_factor
            if rc < 0:
                break
            if not accepted:
                status = TIE if tied else STALLED
                break
            rho = (f - fn) / (eta * g2)
            P[...] = Pn
            Q[...] = Qn
            r[...] = rn
            f = fn
            last_step = eta
            eta = _next_step(eta, rho, step_growth, backtrack_factor, step_max)
    if rc < 0:
        raise np.linalg.LinAlgError("zheev failed")
    return np.array(P), fs_arr[:count].copy(), gs_arr[:count].copy(), st_arr[:count].copy(), status


def level_partitions(d, int k, double sep_tol, double feas_tol):
    cdef double[::1] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef int n = dv.shape[0]
    out = []
    if n == 0:
        return out
    cdef int[::1] labels = np.zeros(n, dtype=np.intc)
    cdef int[::1] maxlab = np.zeros(n, dtype=np.intc)   # max label among positions < j, plus 1
    cdef int[::1] sizes = np.zeros(n, dtype=np.intc)
    cdef double[::1] sums = np.zeros(n)
    cdef double[::1] lo = np.zeros(n)
    cdef double[::1] hi = np.zeros(n)
    cdef int[::1] nopt = np.zeros(n, dtype=np.intc)
    cdef int[:, ::1] optc = np.zeros((n, n + 1), dtype=np.intc)
    cdef double[:, ::1] opta = np.zeros((n, n + 1))
    cdef int[::1] choice = np.zeros(n, dtype=np.intc)
    cdef int[::1] caps = np.zeros(n, dtype=np.intc)
    cdef double[::1] alphas = np.zeros(n)
    cdef int j, b, c, nb, pos, rem, i, q
    cdef double alpha, x, y
    cdef bint ok

    # restricted growth strings, iterative
    while True:
        nb = 0
        for j in range(n):
            if labels[j] + 1 > nb:
                nb = labels[j] + 1
        for b in range(nb):
            sizes[b] = 0
            sums[b] = 0.0
            lo[b] = 2.0
            hi[b] = -1.0
        for j in range(n):
            b = labels[j]
            sizes[b] += 1
            sums[b] += dv[j]
            if dv[j] < lo[b]:
                lo[b] = dv[j]
            if dv[j] > hi[b]:
                hi[b] = dv[j]
        ok = True
        for b in range(nb):
            nopt[b] = 0
            for c in range(sizes[b] + 1):
                alpha = (c - sums[b]) / sizes[b]
                if lo[b] + alpha >= -feas_tol and hi[b] + alpha <= 1.0 + feas_tol:
                    optc[b, nopt[b]] = c
                    opta[b, nopt[b]] = alpha
                    nopt[b] += 1
            if nopt[b] == 0:
                ok = False
                break
        if ok:
            # odometer over per-block options
            for b in range(nb):
                choice[b] = 0
            while True:
                rem = 0
                for b in range(nb):
                    rem += optc[b, choice[b]]
                if rem == k:
                    ok = True
                    for i in range(nb):
                        x = opta[i, choice[i]]
                        for q in range(i + 1, nb):
                            y = opta[q, choice[q]] - x
                            if -sep_tol <= y <= sep_tol:
                                ok = False
                                break
                        if not ok:
                            break
                    if ok:
                        out.append((
                            [labels[j] for j in range(n)],
                            [optc[b, choice[b]] for b in range(nb)],
                            [opta[b, choice[b]] for b in range(nb)],
                        ))
                pos = nb - 1
                while pos >= 0:
                    choice[pos] += 1
                    if choice[pos] < nopt[pos]:
                        break
                    choice[pos] = 0
                    pos -= 1
                if pos < 0:
                    break
        # next restricted growth string
        maxlab[0] = 0
        for j in range(1, n):
            maxlab[j] = maxlab[j - 1] if maxlab[j - 1] > labels[j - 1] + 1 else labels[j - 1] + 1
        j = n - 1
        while j >= 1 and labels[j] >= maxlab[j]:
            j -= 1
        if j < 1:
            break
        labels[j] += 1
        for i in range(j + 1, n):
            labels[i] = 0
    return out


def all_subset_sums_at_least(d, int r, double threshold):
    cdef double[::1] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef int n = dv.shape[0]
    if r > n:
        return True
    cdef int[::1] idx = np.arange(max(r, 1), dtype=np.intc)
    cdef int i, j
    cdef double s
    cdef bint result = True
    with nogil:
        while True:
            s = 0.0
            for i in range(r):
                s += dv[idx[i]]
            if s < threshold:
                result = False
                break
            i = r - 1
            while i >= 0 and idx[i] == i + n - r:
                i -= 1
            if i < 0:
                break
            idx[i] += 1
            for j in range(i + 1, r):
                idx[j] = idx[j - 1] + 1
    return result


def schur_horn_chain(d_sorted, int k, double tol):
    cdef double[::1] d = np.ascontiguousarray(d_sorted, dtype=np.float64)
    cdef int n = d.shape[0]
    P_arr = np.zeros((n, n))
    cdef double[:, ::1] P = P_arr
    cdef double[::1] p = np.zeros(n)
    cdef int i, j, t, rotations = 0
    cdef double x, y, give, take, delta, s2, c, s, u, v, resid = 0.0
    for t in range(k):
        P[t, t] = 1.0
        p[t] = 1.0
    with nogil:
        while True:
            i = -1
            j = -1
            for t in range(n):
                if i < 0 and p[t] > d[t] + tol:
                    i = t
                if j < 0 and p[t] < d[t] - tol:
                    j = t
            if i < 0 or j < 0:
                break
            x = p[i]
            y = p[j]
            give = x - d[i]
            take = d[j] - y
            delta = give if give < take else take
            s2 = delta / (x - y)
            c = sqrt(1.0 - s2)
            s = sqrt(s2)
            for t in range(n):
                u = P[i, t]
                v = P[j, t]
                P[i, t] = c * u + s * v
                P[j, t] = -s * u + c * v
            for t in range(n):
                u = P[t, i]
                v = P[t, j]
                P[t, i] = c * u + s * v
                P[t, j] = -s * u + c * v
            p[i] = d[i] if give <= take else x - delta
            p[j] = d[j] if take <= give else y + delta
            P[i, i] = p[i]
            P[j, j] = p[j]
            rotations += 1
        for t in range(n):
            x = p[t] - d[t]
            if x < 0:
                x = -x
            if x > resid:
                resid = x
    return P_arr, rotations, resid
