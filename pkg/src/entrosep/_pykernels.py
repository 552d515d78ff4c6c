"""Pure-Python kernels: the fallback when the compiled core is unavailable.

Parameter vector kinds:

0  two-qubit product angles ``(alpha, beta, delta, gamma)``
1  two unnormalised local kets packed as ``(Re a, Im a, Re b, Im b)``, 4d reals
2  one unnormalised joint ket packed as ``(Re psi, Im psi)``, 2 d^2 reals

The objective is ``sum_g F(sum_{k: group[k]=g} |<row[k]|psi>|^2)`` with
``F(x) = -x ln x``. ``rows`` already hold conjugated basis vectors.
"""

from __future__ import annotations

import math

import numpy as np

PROB_FLOOR = 1e-15
BIG = 1e10
INV_PHI = 0.6180339887498949


def _ket_builder(kind: int, d: int):
    if kind == 0:
        def build(x):
            ca, sa, cb, sb = math.cos(x[0]), math.sin(x[0]), math.cos(x[1]), math.sin(x[1])
            ed = complex(math.cos(x[2]), math.sin(x[2]))
            eg = complex(math.cos(x[3]), math.sin(x[3]))
            return np.array([ca * cb, ca * sb * eg, sa * cb * ed, sa * sb * ed * eg])
        return build
    if kind == 1:
        def build(x):
            a = x[:d] + 1j * x[d:2 * d]
            b = x[2 * d:3 * d] + 1j * x[3 * d:]
            na = float(np.dot(x[:2 * d], x[:2 * d]))
            nb = float(np.dot(x[2 * d:], x[2 * d:]))
            if na <= 0.0 or nb <= 0.0:
                return None
            return np.outer(a, b).ravel() / math.sqrt(na * nb)
        return build

    def build(x):
        n = len(x) // 2
        nrm = float(np.dot(x, x))
        if nrm <= 0.0:
            return None
        return (x[:n] + 1j * x[n:]) / math.sqrt(nrm)
    return build


def make_objective(kind, d, rows_re, rows_im, pair_row, pair_group, n_groups):
    rows = np.asarray(rows_re, dtype=float) + 1j * np.asarray(rows_im, dtype=float)
    pair_row = np.asarray(pair_row, dtype=np.intp)
    pair_group = np.asarray(pair_group, dtype=np.intp)
    build = _ket_builder(kind, d)

    def f(x):
        psi = build(np.asarray(x, dtype=float))
        if psi is None:
            return BIG
        amp2 = np.abs(rows @ psi) ** 2
        acc = np.bincount(pair_group, weights=amp2[pair_row], minlength=n_groups)
        acc = np.minimum(acc[acc > PROB_FLOOR], 1.0)
        return float(-np.sum(acc * np.log(acc)))

    return f


def objective(x, kind, d, rows_re, rows_im, pair_row, pair_group, n_groups):
    return make_objective(kind, d, rows_re, rows_im, pair_row, pair_group, n_groups)(x)


def batch_objective(xs, kind, d, rows_re, rows_im, pair_row, pair_group, n_groups):
    f = make_objective(kind, d, rows_re, rows_im, pair_row, pair_group, n_groups)
    return np.array([f(x) for x in np.asarray(xs, dtype=float)])


def golden_sweeps(f, x, h, sweeps, iters, fx):
    counter = 0
    for _ in range(sweeps):
        for i in range(len(x)):
            best, bestx = fx, x[i]
            lo, hi = x[i] - h, x[i] + h
            c1 = hi - INV_PHI * (hi - lo)
            c2 = lo + INV_PHI * (hi - lo)
            x[i] = c1
            f1 = f(x)
            x[i] = c2
            f2 = f(x)
            counter += 2
            if f1 < best:
                best, bestx = f1, c1
            if f2 < best:
                best, bestx = f2, c2
            for _ in range(iters):
                if f1 < f2:
                    hi, c2, f2 = c2, c1, f1
                    c1 = hi - INV_PHI * (hi - lo)
                    x[i] = c1
                    f1 = f(x)
                    if f1 < best:
                        best, bestx = f1, c1
                else:
                    lo, c1, f1 = c1, c2, f2
                    c2 = lo + INV_PHI * (hi - lo)
                    x[i] = c2
                    f2 = f(x)
                    if f2 < best:
                        best, bestx = f2, c2
                counter += 1
            x[i] = bestx
            fx = best
        h /= 3.0
    return fx, counter


def _sort(sim, fs):
    order = np.argsort(fs, kind="stable")
    return sim[order], fs[order]


def nelder_mead(f, x, fx, step, ftol, xtol, maxfev, nfev):
    """Standard Nelder-Mead (reflect 1, expand 2, contract 1/2, shrink 1/2)."""
    n = len(x)
    sim = np.tile(x, (n + 1, 1))
    fs = np.empty(n + 1)
    fs[0] = fx
    for i in range(1, n + 1):
        sim[i, i - 1] += step
        fs[i] = f(sim[i])
        nfev += 1
    sim, fs = _sort(sim, fs)
    converged = False
    while nfev < maxfev:
        if fs[n] - fs[0] <= ftol and np.max(np.abs(sim[1:] - sim[0])) <= xtol:
            converged = True
            break
        cen = sim[:n].mean(axis=0)
        xr = 2.0 * cen - sim[n]
        fr = f(xr)
        nfev += 1
        if fr < fs[0]:
            xe = 3.0 * cen - 2.0 * sim[n]
            fe = f(xe)
            nfev += 1
            if fe < fr:
                sim[n], fs[n] = xe, fe
            else:
                sim[n], fs[n] = xr, fr
        elif fr < fs[n - 1]:
            sim[n], fs[n] = xr, fr
        else:
            if fr < fs[n]:
                xc = 0.5 * (cen + xr)
                fc = f(xc)
                accept = fc <= fr
            else:
                xc = 0.5 * (cen + sim[n])
                fc = f(xc)
                accept = fc < fs[n]
            nfev += 1
            if accept:
                sim[n], fs[n] = xc, fc
            else:
                for i in range(1, n + 1):
                    sim[i] = sim[0] + 0.5 * (sim[i] - sim[0])
                    fs[i] = f(sim[i])
                    nfev += 1
        sim, fs = _sort(sim, fs)
    return sim[0].copy(), float(fs[0]), nfev, converged


def refine(x0, kind, d, rows_re, rows_im, pair_row, pair_group, n_groups, h=0.5, sweeps=3,
           iters=30, step=0.1, ftol=1e-10, xtol=1e-8, maxfev=20000, restarts=2):
    """Golden-section coordinate sweeps followed by Nelder-Mead.

    Returns ``(x, f, nfev, converged)``.
    """
    f = make_objective(kind, d, rows_re, rows_im, pair_row, pair_group, n_groups)
    x = np.array(x0, dtype=float)
    fx = f(x)
    fx, nfev = golden_sweeps(f, x, h, sweeps, iters, fx)
    nfev += 1
    converged = False
    for _ in range(restarts + 1):
        before = fx
        x, fx, nfev, converged = nelder_mead(f, x, fx, step, ftol, xtol, maxfev, nfev)
        if not converged or before - fx <= ftol:
            break
        step *= 0.1
    return x, fx, nfev, converged
