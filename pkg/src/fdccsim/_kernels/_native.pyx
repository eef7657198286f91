# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels: dense LU with scaled partial pivoting and the
trapezoidal transient stepping loop. Same API and semantics as pykernels."""

from libc.math cimport cosh, fabs, hypot, sin, sqrt, tanh

import numpy as np

SINGULAR_EPS = 1e-300

cdef double _SING_EPS = 1e-300


cdef inline double _zabs(double complex z) noexcept:
    # hypot avoids under/overflow of re^2 + im^2
    return hypot(z.real, z.imag)


cdef int _factor_z(double complex[:, ::1] a, int[::1] piv) noexcept:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, k, p
    cdef double best, mag
    cdef double complex akk, lik, tmp
    cdef double[::1] scale = np.empty(n, dtype=np.float64)

    for i in range(n):
        best = 0.0
        for j in range(n):
            mag = _zabs(a[i, j])
            if mag > best:
                best = mag
        if best == 0.0:
            return <int> i
        scale[i] = best

    for k in range(n):
        p = k
        best = _zabs(a[k, k]) / scale[k]
        for i in range(k + 1, n):
            mag = _zabs(a[i, k]) / scale[i]
            if mag > best:
                best = mag
                p = i
        if best < _SING_EPS:
            return <int> k
        if p != k:
            for j in range(n):
                tmp = a[k, j]
                a[k, j] = a[p, j]
                a[p, j] = tmp
            scale[p] = scale[k]
        piv[k] = <int> p
        akk = a[k, k]
        for i in range(k + 1, n):
            lik = a[i, k] / akk
            a[i, k] = lik
            for j in range(k + 1, n):
                a[i, j] = a[i, j] - lik * a[k, j]
    return -1


cdef void _solve_z(double complex[:, ::1] lu, int[::1] piv, double complex[::1] b) noexcept:
    # Whole rows were swapped during the factor, so apply all swaps to b
    # before the triangular solves (LAPACK convention).
    cdef Py_ssize_t n = lu.shape[0]
    cdef Py_ssize_t i, k
    cdef double complex tmp, acc
    for k in range(n):
        if piv[k] != k:
            tmp = b[k]
            b[k] = b[piv[k]]
            b[piv[k]] = tmp
    for k in range(n - 1):
        for i in range(k + 1, n):
            b[i] = b[i] - lu[i, k] * b[k]
    for k in range(n - 1, -1, -1):
        acc = b[k]
        for i in range(k + 1, n):
            acc = acc - lu[k, i] * b[i]
        b[k] = acc / lu[k, k]


cdef int _factor_d(double[:, ::1] a, int[::1] piv) noexcept:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, k, p
    cdef double best, mag, akk, lik, tmp
    cdef double[::1] scale = np.empty(n, dtype=np.float64)

    for i in range(n):
        best = 0.0
        for j in range(n):
            mag = fabs(a[i, j])
            if mag > best:
                best = mag
        if best == 0.0:
            return <int> i
        scale[i] = best

    for k in range(n):
        p = k
        best = fabs(a[k, k]) / scale[k]
        for i in range(k + 1, n):
            mag = fabs(a[i, k]) / scale[i]
            if mag > best:
                best = mag
                p = i
        if best < _SING_EPS:
            return <int> k
        if p != k:
            for j in range(n):
                tmp = a[k, j]
                a[k, j] = a[p, j]
                a[p, j] = tmp
            scale[p] = scale[k]
        piv[k] = <int> p
        akk = a[k, k]
        for i in range(k + 1, n):
            lik = a[i, k] / akk
            a[i, k] = lik
            for j in range(k + 1, n):
                a[i, j] = a[i, j] - lik * a[k, j]
    return -1


cdef void _solve_d(double[:, ::1] lu, int[::1] piv, double[::1] b) noexcept:
    cdef Py_ssize_t n = lu.shape[0]
    cdef Py_ssize_t i, k
    cdef double tmp, acc
    for k in range(n):
        if piv[k] != k:
            tmp = b[k]
            b[k] = b[piv[k]]
            b[piv[k]] = tmp
    for k in range(n - 1):
        for i in range(k + 1, n):
            b[i] = b[i] - lu[i, k] * b[k]
    for k in range(n - 1, -1, -1):
        acc = b[k]
        for i in range(k + 1, n):
            acc = acc - lu[k, i] * b[i]
        b[k] = acc / lu[k, k]


def lu_factor_z(a, piv):
    return _factor_z(a, piv)


def lu_solve_z(lu, piv, b):
    _solve_z(lu, piv, b)


def lu_factor_d(a, piv):
    return _factor_d(a, piv)


def lu_solve_d(lu, piv, b):
    _solve_d(lu, piv, b)


def solve_z(a, b):
    """Solve a complex dense system; returns (x, status) with status -1 on success."""
    lu = np.array(a, dtype=np.complex128, order="C")
    piv = np.empty(lu.shape[0], dtype=np.intc)
    cdef int status = _factor_z(lu, piv)
    if status >= 0:
        return np.zeros(lu.shape[0], dtype=np.complex128), status
    x = np.array(b, dtype=np.complex128)
    _solve_z(lu, piv, x)
    return x, -1


def solve_d(a, b):
    lu = np.array(a, dtype=np.float64, order="C")
    piv = np.empty(lu.shape[0], dtype=np.intc)
    cdef int status = _factor_d(lu, piv)
    if status >= 0:
        return np.zeros(lu.shape[0], dtype=np.float64), status
    x = np.array(b, dtype=np.float64)
    _solve_d(lu, piv, x)
    return x, -1


cdef double _residual(double[:, ::1] a_base, double[::1] x, double[::1] b, double[::1] f,
                      Py_ssize_t nsat, int[::1] sat_row, int[::1] sat_xcol,
                      double[::1] sat_vsat, int[::1] sat_ptr, int[::1] sat_col,
                      double[::1] sat_coef) noexcept:
    cdef Py_ssize_t n = a_base.shape[0]
    cdef Py_ssize_t i, j, q
    cdef double acc, u, vx, vsat, norm
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += a_base[i, j] * x[j]
        f[i] = acc - b[i]
    for q in range(nsat):
        u = 0.0
        for j in range(sat_ptr[q], sat_ptr[q + 1]):
            u += sat_coef[j] * x[sat_col[j]]
        vx = x[sat_xcol[q]] if sat_xcol[q] >= 0 else 0.0
        vsat = sat_vsat[q]
        f[sat_row[q]] = vx - vsat * tanh(u / vsat) - b[sat_row[q]]
    norm = 0.0
    for i in range(n):
        norm += f[i] * f[i]
    return sqrt(norm)


def run_transient(double[:, ::1] a_base,
                  int[::1] cap_n1, int[::1] cap_n2, double[::1] cap_geq,
                  int[::1] src_row, double[::1] src_offset, double[::1] src_amp,
                  double[::1] src_omega, double[::1] src_phase,
                  int[::1] sat_row, int[::1] sat_xcol, double[::1] sat_vsat,
                  int[::1] sat_ptr, int[::1] sat_col, double[::1] sat_coef,
                  double h, long nsteps,
                  double newton_tol=1e-12, int newton_maxit=50, int damp_max=8):
    """Fixed-step trapezoidal transient run; see pykernels.run_transient."""
    cdef Py_ssize_t n = a_base.shape[0]
    cdef Py_ssize_t ncap = cap_geq.shape[0]
    cdef Py_ssize_t nsat = sat_row.shape[0]
    cdef Py_ssize_t nsrc = src_row.shape[0]

    traces_arr = np.zeros((nsteps + 1, n), dtype=np.float64)
    cdef double[:, ::1] traces = traces_arr
    cdef double[::1] x = np.zeros(n, dtype=np.float64)
    cdef double[::1] b = np.zeros(n, dtype=np.float64)
    cdef double[::1] f = np.empty(n, dtype=np.float64)
    cdef double[::1] d = np.empty(n, dtype=np.float64)
    cdef double[::1] xt = np.empty(n, dtype=np.float64)
    cdef double[::1] ihist = np.zeros(max(ncap, 1), dtype=np.float64)
    cdef double[:, ::1] lu = np.empty((n, n), dtype=np.float64)
    cdef int[::1] piv = np.empty(n, dtype=np.intc)

    cdef long step
    cdef Py_ssize_t i, j, m, q, r, it, trial
    cdef int status
    cdef double t, v1, v2, fnorm, ftnorm, dnorm, lam, u, sech, c
    cdef bint converged

    if nsat == 0:
        for i in range(n):
            for j in range(n):
                lu[i, j] = a_base[i, j]
        status = _factor_d(lu, piv)
        if status >= 0:
            return traces_arr, 1, 0, status

    for step in range(1, nsteps + 1):
        t = step * h
        for i in range(n):
            b[i] = 0.0
        for j in range(nsrc):
            b[src_row[j]] = src_offset[j] + src_amp[j] * sin(src_omega[j] * t + src_phase[j])
        for m in range(ncap):
            if cap_n1[m] >= 0:
                b[cap_n1[m]] -= ihist[m]
            if cap_n2[m] >= 0:
                b[cap_n2[m]] += ihist[m]

        if nsat == 0:
            for i in range(n):
                x[i] = b[i]
            _solve_d(lu, piv, x)
        else:
            fnorm = _residual(a_base, x, b, f, nsat, sat_row, sat_xcol, sat_vsat,
                              sat_ptr, sat_col, sat_coef)
            converged = False
            for it in range(newton_maxit):
                for i in range(n):
                    for j in range(n):
                        lu[i, j] = a_base[i, j]
                for q in range(nsat):
                    r = sat_row[q]
                    u = 0.0
                    for j in range(sat_ptr[q], sat_ptr[q + 1]):
                        u += sat_coef[j] * x[sat_col[j]]
                    c = cosh(u / sat_vsat[q])
                    sech = 1.0 / (c * c)
                    for j in range(n):
                        lu[r, j] = 0.0
                    if sat_xcol[q] >= 0:
                        lu[r, sat_xcol[q]] += 1.0
                    for j in range(sat_ptr[q], sat_ptr[q + 1]):
                        lu[r, sat_col[j]] -= sech * sat_coef[j]
                status = _factor_d(lu, piv)
                if status >= 0:
                    return traces_arr, 1, step, status
                for i in range(n):
                    d[i] = -f[i]
                _solve_d(lu, piv, d)
                dnorm = 0.0
                for i in range(n):
                    dnorm += d[i] * d[i]
                dnorm = sqrt(dnorm)
                if dnorm <= newton_tol:
                    for i in range(n):
                        x[i] = x[i] + d[i]
                    converged = True
                    break
                # Damping: halve the step while the residual does not decrease.
                lam = 1.0
                for trial in range(damp_max + 1):
                    for i in range(n):
                        xt[i] = x[i] + lam * d[i]
                    ftnorm = _residual(a_base, xt, b, f, nsat, sat_row, sat_xcol,
                                       sat_vsat, sat_ptr, sat_col, sat_coef)
                    if ftnorm < fnorm:
                        break
                    lam *= 0.5
                for i in range(n):
                    x[i] = xt[i]
                fnorm = ftnorm
            if not converged:
                return traces_arr, 2, step, newton_maxit

        for i in range(n):
            traces[step, i] = x[i]
        for m in range(ncap):
            v1 = x[cap_n1[m]] if cap_n1[m] >= 0 else 0.0
            v2 = x[cap_n2[m]] if cap_n2[m] >= 0 else 0.0
            ihist[m] = -2.0 * cap_geq[m] * (v1 - v2) - ihist[m]

    return traces_arr, 0, 0, 0
