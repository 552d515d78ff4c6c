# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled entropy objective and local refinement.

Mirrors ``_pykernels`` operation for operation; see there for the contract.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, log, sqrt, fabs
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double PROB_FLOOR = 1e-15
cdef double BIG = 1e10
cdef double INV_PHI = 0.6180339887498949


cdef struct Plan:
    int kind
    int d
    int dim
    int n_rows
    int n_pairs
    int n_groups
    const double* rows_re
    const double* rows_im
    const int* pair_row
    const int* pair_group
    double* psi_re
    double* psi_im
    double* amp2
    double* acc


cdef int _build_ket(Plan* p, const double* x) noexcept nogil:
    cdef int d = p.d, j, l
    cdef double ca, sa, cb, sb, na, nb, norm
    if p.kind == 0:
        ca = cos(x[0]); sa = sin(x[0]); cb = cos(x[1]); sb = sin(x[1])
        p.psi_re[0] = ca * cb
        p.psi_im[0] = 0.0
        p.psi_re[1] = ca * sb * cos(x[3])
        p.psi_im[1] = ca * sb * sin(x[3])
        p.psi_re[2] = sa * cb * cos(x[2])
        p.psi_im[2] = sa * cb * sin(x[2])
        p.psi_re[3] = sa * sb * cos(x[2] + x[3])
        p.psi_im[3] = sa * sb * sin(x[2] + x[3])
        return 0
    if p.kind == 1:
        na = 0.0
        nb = 0.0
        for j in range(d):
            na += x[j] * x[j] + x[d + j] * x[d + j]
            nb += x[2 * d + j] * x[2 * d + j] + x[3 * d + j] * x[3 * d + j]
        if na <= 0.0 or nb <= 0.0:
            return -1
        norm = 1.0 / sqrt(na * nb)
        for j in range(d):
            for l in range(d):
                p.psi_re[j * d + l] = (x[j] * x[2 * d + l] - x[d + j] * x[3 * d + l]) * norm
                p.psi_im[j * d + l] = (x[j] * x[3 * d + l] + x[d + j] * x[2 * d + l]) * norm
        return 0
    na = 0.0
    for j in range(p.dim):
        na += x[j] * x[j] + x[p.dim + j] * x[p.dim + j]
    if na <= 0.0:
        return -1
    norm = 1.0 / sqrt(na)
    for j in range(p.dim):
        p.psi_re[j] = x[j] * norm
        p.psi_im[j] = x[p.dim + j] * norm
    return 0


cdef double _objective(Plan* p, const double* x) noexcept nogil:
    cdef int u, j, k, g
    cdef double re, im, a, total
    if _build_ket(p, x) != 0:
        return BIG
    for u in range(p.n_rows):
        re = 0.0
        im = 0.0
        for j in range(p.dim):
            a = p.rows_re[u * p.dim + j]
            re += a * p.psi_re[j]
            im += a * p.psi_im[j]
            a = p.rows_im[u * p.dim + j]
            re -= a * p.psi_im[j]
            im += a * p.psi_re[j]
        p.amp2[u] = re * re + im * im
    for g in range(p.n_groups):
        p.acc[g] = 0.0
    for k in range(p.n_pairs):
        p.acc[p.pair_group[k]] += p.amp2[p.pair_row[k]]
    total = 0.0
    for g in range(p.n_groups):
        a = p.acc[g]
        if a > PROB_FLOOR:
            if a > 1.0:
                a = 1.0
            total -= a * log(a)
    return total


cdef double _golden_sweeps(Plan* p, double* x, int n, double h, int sweeps,
                           int iters, double fx, long* nfev) noexcept nogil:
    cdef int s, i, t
    cdef double lo, hi, c1, c2, f1, f2, orig, best, bestx
    for s in range(sweeps):
        for i in range(n):
            orig = x[i]
            best = fx
            bestx = orig
            lo = orig - h
            hi = orig + h
            c1 = hi - INV_PHI * (hi - lo)
            c2 = lo + INV_PHI * (hi - lo)
            x[i] = c1
            f1 = _objective(p, x)
            x[i] = c2
            f2 = _objective(p, x)
            nfev[0] += 2
            if f1 < best:
                best = f1
                bestx = c1
            if f2 < best:
                best = f2
                bestx = c2
            for t in range(iters):
                if f1 < f2:
                    hi = c2
                    c2 = c1
                    f2 = f1
                    c1 = hi - INV_PHI * (hi - lo)
                    x[i] = c1
                    f1 = _objective(p, x)
                    if f1 < best:
                        best = f1
                        bestx = c1
                else:
                    lo = c1
                    c1 = c2
                    f1 = f2
                    c2 = lo + INV_PHI * (hi - lo)
                    x[i] = c2
                    f2 = _objective(p, x)
                    if f2 < best:
                        best = f2
                        bestx = c2
                nfev[0] += 1
            x[i] = bestx
            fx = best
        h = h / 3.0
    return fx


cdef void _sort_simplex(double* sim, double* fs, int n) noexcept nogil:
    # insertion sort of n+1 vertices by objective value (stable)
    cdef int i, j, k
    cdef double fv, tmp
    for i in range(1, n + 1):
        j = i
        while j > 0 and fs[j - 1] > fs[j]:
            fv = fs[j]; fs[j] = fs[j - 1]; fs[j - 1] = fv
            for k in range(n):
                tmp = sim[j * n + k]
                sim[j * n + k] = sim[(j - 1) * n + k]
                sim[(j - 1) * n + k] = tmp
            j -= 1


cdef int _nelder_mead(Plan* p, double* x, int n, double step, double ftol, double xtol,
                      long maxfev, double* fx, long* nfev, double* work) noexcept nogil:
    cdef double* sim = work
    cdef double* fs = sim + (n + 1) * n
    cdef double* cen = fs + (n + 1)
    cdef double* xr = cen + n
    cdef double* xe = xr + n
    cdef double* xc = xe + n
    cdef int i, k, accept, converged = 0
    cdef double fr, fe, fc, spread, dx, diam
    for k in range(n):
        sim[k] = x[k]
    fs[0] = fx[0]
    for i in range(1, n + 1):
        for k in range(n):
            sim[i * n + k] = x[k]
        sim[i * n + i - 1] += step
        fs[i] = _objective(p, sim + i * n)
        nfev[0] += 1
    _sort_simplex(sim, fs, n)
    while nfev[0] < maxfev:
        spread = fs[n] - fs[0]
        diam = 0.0
        for i in range(1, n + 1):
            for k in range(n):
                dx = fabs(sim[i * n + k] - sim[k])
                if dx > diam:
                    diam = dx
        if spread <= ftol and diam <= xtol:
            converged = 1
            break
        for k in range(n):
            cen[k] = 0.0
        for i in range(n):
            for k in range(n):
                cen[k] += sim[i * n + k]
        for k in range(n):
            cen[k] /= n
            xr[k] = 2.0 * cen[k] - sim[n * n + k]
        fr = _objective(p, xr)
        nfev[0] += 1
        if fr < fs[0]:
            for k in range(n):
                xe[k] = 3.0 * cen[k] - 2.0 * sim[n * n + k]
            fe = _objective(p, xe)
            nfev[0] += 1
            if fe < fr:
                for k in range(n):
                    sim[n * n + k] = xe[k]
                fs[n] = fe
            else:
                for k in range(n):
                    sim[n * n + k] = xr[k]
                fs[n] = fr
        elif fr < fs[n - 1]:
            for k in range(n):
                sim[n * n + k] = xr[k]
            fs[n] = fr
        else:
            if fr < fs[n]:
                for k in range(n):
                    xc[k] = 0.5 * (cen[k] + xr[k])
                fc = _objective(p, xc)
                nfev[0] += 1
                accept = fc <= fr
            else:
                for k in range(n):
                    xc[k] = 0.5 * (cen[k] + sim[n * n + k])
                fc = _objective(p, xc)
                nfev[0] += 1
                accept = fc < fs[n]
            if accept:
                for k in range(n):
                    sim[n * n + k] = xc[k]
                fs[n] = fc
            else:
                for i in range(1, n + 1):
                    for k in range(n):
                        sim[i * n + k] = sim[k] + 0.5 * (sim[i * n + k] - sim[k])
                    fs[i] = _objective(p, sim + i * n)
                    nfev[0] += 1
        _sort_simplex(sim, fs, n)
    for k in range(n):
        x[k] = sim[k]
    fx[0] = fs[0]
    return converged


cdef int _refine(Plan* p, double* x, int n, double h, int sweeps, int iters, double step,
                 double ftol, double xtol, long maxfev, int restarts, double* fx,
                 long* nfev, double* work) noexcept nogil:
    cdef int r, converged = 0
    cdef double before
    fx[0] = _objective(p, x)
    nfev[0] += 1
    fx[0] = _golden_sweeps(p, x, n, h, sweeps, iters, fx[0], nfev)
    for r in range(restarts + 1):
        before = fx[0]
        converged = _nelder_mead(p, x, n, step, ftol, xtol, maxfev, fx, nfev, work)
        if not converged or before - fx[0] <= ftol:
            break
        step = step * 0.1
    return converged


cdef class _PlanHolder:
    cdef Plan plan
    cdef object keep

    def __cinit__(self, int kind, int d, cnp.ndarray rows_re, cnp.ndarray rows_im,
                  cnp.ndarray pair_row, cnp.ndarray pair_group, int n_groups):
        cdef int dim = rows_re.shape[1]
        psi_re = np.zeros(dim)
        psi_im = np.zeros(dim)
        amp2 = np.zeros(rows_re.shape[0])
        acc = np.zeros(n_groups)
        self.keep = (rows_re, rows_im, pair_row, pair_group, psi_re, psi_im, amp2, acc)
        self.plan.kind = kind
        self.plan.d = d
        self.plan.dim = dim
        self.plan.n_rows = rows_re.shape[0]
        self.plan.n_pairs = pair_row.shape[0]
        self.plan.n_groups = n_groups
        self.plan.rows_re = <const double*> cnp.PyArray_DATA(rows_re)
        self.plan.rows_im = <const double*> cnp.PyArray_DATA(rows_im)
        self.plan.pair_row = <const int*> cnp.PyArray_DATA(pair_row)
        self.plan.pair_group = <const int*> cnp.PyArray_DATA(pair_group)
        self.plan.psi_re = <double*> cnp.PyArray_DATA(psi_re)
        self.plan.psi_im = <double*> cnp.PyArray_DATA(psi_im)
        self.plan.amp2 = <double*> cnp.PyArray_DATA(amp2)
        self.plan.acc = <double*> cnp.PyArray_DATA(acc)


def _holder(kind, d, rows_re, rows_im, pair_row, pair_group, n_groups):
    return _PlanHolder(
        kind, d,
        np.ascontiguousarray(rows_re, dtype=np.float64),
        np.ascontiguousarray(rows_im, dtype=np.float64),
        np.ascontiguousarray(pair_row, dtype=np.intc),
        np.ascontiguousarray(pair_group, dtype=np.intc),
        n_groups,
    )


def objective(double[::1] x, int kind, int d, rows_re, rows_im, pair_row, pair_group,
              int n_groups):
    cdef _PlanHolder h = _holder(kind, d, rows_re, rows_im, pair_row, pair_group, n_groups)
    return _objective(&h.plan, &x[0])


def batch_objective(double[:, ::1] xs, int kind, int d, rows_re, rows_im, pair_row,
                    pair_group, int n_groups):
    cdef _PlanHolder h = _holder(kind, d, rows_re, rows_im, pair_row, pair_group, n_groups)
    cdef Py_ssize_t i, m = xs.shape[0]
    out = np.empty(m)
    cdef double[::1] o = out
    with nogil:
        for i in range(m):
            o[i] = _objective(&h.plan, &xs[i, 0])
    return out


def refine(double[::1] x0, int kind, int d, rows_re, rows_im, pair_row, pair_group,
           int n_groups, double h=0.5, int sweeps=3, int iters=30, double step=0.1,
           double ftol=1e-10, double xtol=1e-8, long maxfev=20000, int restarts=2):
    """Golden-section coordinate sweeps followed by Nelder-Mead.

    Returns ``(x, f, nfev, converged)``.
    """
    cdef _PlanHolder hold = _holder(kind, d, rows_re, rows_im, pair_row, pair_group, n_groups)
    cdef int n = x0.shape[0]
    x = np.array(x0, dtype=np.float64)
    cdef double[::1] xv = x
    cdef double fx = 0.0
    cdef long nfev = 0
    cdef int converged
    cdef double* work = <double*> malloc(((n + 1) * n + (n + 1) + 4 * n) * sizeof(double))
    if work == NULL:
        raise MemoryError()
    try:
        with nogil:
            converged = _refine(&hold.plan, &xv[0], n, h, sweeps, iters, step, ftol, xtol,
                                maxfev, restarts, &fx, &nfev, work)
    finally:
        free(work)
    return x, fx, int(nfev), bool(converged)
