"""Pure-Python/numpy implementation of the numeric kernels.

Mirrors ``_native`` exactly: dense LU with scaled partial pivoting for
complex and real systems, plus the trapezoidal transient stepping loop
with optional damped-Newton handling of tanh-saturated constraint rows.
Kernels report failures through status codes; callers translate them
into rich errors.
"""

from __future__ import annotations

import math

import numpy as np

# Pivot threshold after row scaling; only structural singularities trip it.
SINGULAR_EPS = 1e-300


def _lu_factor(a: np.ndarray, piv: np.ndarray) -> int:
    """In-place LU with scaled partial pivoting.

    Returns -1 on success, otherwise the index of the unknown whose pivot
    collapsed (an all-zero row reports that row immediately).
    """
    n = a.shape[0]
    scale = np.max(np.abs(a), axis=1)
    zero_rows = np.nonzero(scale == 0.0)[0]
    if zero_rows.size:
        return int(zero_rows[0])
    for k in range(n):
        mags = np.abs(a[k:, k]) / scale[k:]
        p = k + int(np.argmax(mags))
        if mags[p - k] < SINGULAR_EPS:
            return k
        if p != k:
            a[[k, p]] = a[[p, k]]
            scale[[k, p]] = scale[[p, k]]
        piv[k] = p
        if k + 1 < n:
            a[k + 1 :, k] /= a[k, k]
            a[k + 1 :, k + 1 :] -= np.outer(a[k + 1 :, k], a[k, k + 1 :])
    return -1


def _lu_solve(lu: np.ndarray, piv: np.ndarray, b: np.ndarray) -> None:
    # The factor swaps whole rows, so all swaps apply to b before the
    # triangular solves (LAPACK convention).
    n = lu.shape[0]
    for k in range(n):
        p = piv[k]
        if p != k:
            b[k], b[p] = b[p], b[k]
    for k in range(n - 1):
        b[k + 1 :] -= lu[k + 1 :, k] * b[k]
    for k in range(n - 1, -1, -1):
        if k + 1 < n:
            b[k] -= lu[k, k + 1 :] @ b[k + 1 :]
        b[k] /= lu[k, k]


def lu_factor_z(a: np.ndarray, piv: np.ndarray) -> int:
    return _lu_factor(a, piv)


def lu_solve_z(lu: np.ndarray, piv: np.ndarray, b: np.ndarray) -> None:
    _lu_solve(lu, piv, b)


def lu_factor_d(a: np.ndarray, piv: np.ndarray) -> int:
    return _lu_factor(a, piv)


def lu_solve_d(lu: np.ndarray, piv: np.ndarray, b: np.ndarray) -> None:
    _lu_solve(lu, piv, b)


def solve_z(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, int]:
    """Solve a complex dense system; returns (x, status) with status -1 on success."""
    lu = np.array(a, dtype=np.complex128, order="C")
    piv = np.empty(lu.shape[0], dtype=np.intc)
    status = _lu_factor(lu, piv)
    if status >= 0:
        return np.zeros_like(b, dtype=np.complex128), status
    x = np.array(b, dtype=np.complex128)
    _lu_solve(lu, piv, x)
    return x, -1


def solve_d(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, int]:
    lu = np.array(a, dtype=np.float64, order="C")
    piv = np.empty(lu.shape[0], dtype=np.intc)
    status = _lu_factor(lu, piv)
    if status >= 0:
        return np.zeros_like(b, dtype=np.float64), status
    x = np.array(b, dtype=np.float64)
    _lu_solve(lu, piv, x)
    return x, -1


def _residual(a_base, x, b, f, sat_row, sat_xcol, sat_vsat, sat_ptr, sat_col, sat_coef):
    """f = A_lin x - b with saturated rows replaced by their tanh form; returns ||f||_2."""
    f[:] = a_base @ x - b
    for q in range(len(sat_row)):
        lo, hi = sat_ptr[q], sat_ptr[q + 1]
        u = float(sat_coef[lo:hi] @ x[sat_col[lo:hi]])
        vx = x[sat_xcol[q]] if sat_xcol[q] >= 0 else 0.0
        vsat = sat_vsat[q]
        f[sat_row[q]] = vx - vsat * math.tanh(u / vsat) - b[sat_row[q]]
    return float(np.linalg.norm(f))


def run_transient(
    a_base,
    cap_n1,
    cap_n2,
    cap_geq,
    src_row,
    src_offset,
    src_amp,
    src_omega,
    src_phase,
    sat_row,
    sat_xcol,
    sat_vsat,
    sat_ptr,
    sat_col,
    sat_coef,
    h,
    nsteps,
    newton_tol=1e-12,
    newton_maxit=50,
    damp_max=8,
):
    """Fixed-step trapezoidal transient run.

    ``a_base`` holds the linear stamps (capacitors as their 2C/h companion
    conductances; saturated X rows in linearized form). State starts at
    zero. Returns ``(traces, status, aux1, aux2)`` where traces has shape
    (nsteps + 1, dim); status 0 = ok, 1 = singular (aux1 step, aux2 row),
    2 = Newton non-convergence (aux1 step, aux2 iterations).
    """
    n = a_base.shape[0]
    ncap = len(cap_geq)
    nsat = len(sat_row)
    traces = np.zeros((nsteps + 1, n))
    x = np.zeros(n)
    b = np.zeros(n)
    f = np.empty(n)
    ihist = np.zeros(ncap)

    if nsat == 0:
        lu = np.array(a_base, dtype=np.float64, order="C")
        piv = np.empty(n, dtype=np.intc)
        status = _lu_factor(lu, piv)
        if status >= 0:
            return traces, 1, 0, status

    for step in range(1, nsteps + 1):
        t = step * h
        b[:] = 0.0
        for j in range(len(src_row)):
            b[src_row[j]] = src_offset[j] + src_amp[j] * math.sin(src_omega[j] * t + src_phase[j])
        for m in range(ncap):
            if cap_n1[m] >= 0:
                b[cap_n1[m]] -= ihist[m]
            if cap_n2[m] >= 0:
                b[cap_n2[m]] += ihist[m]

        if nsat == 0:
            x = b.copy()
            _lu_solve(lu, piv, x)
        else:
            fnorm = _residual(a_base, x, b, f, sat_row, sat_xcol, sat_vsat, sat_ptr, sat_col, sat_coef)
            converged = False
            for _ in range(newton_maxit):
                jac = a_base.copy()
                for q in range(nsat):
                    r = sat_row[q]
                    lo, hi = sat_ptr[q], sat_ptr[q + 1]
                    u = float(sat_coef[lo:hi] @ x[sat_col[lo:hi]])
                    sech2 = 1.0 / math.cosh(u / sat_vsat[q]) ** 2
                    jac[r, :] = 0.0
                    if sat_xcol[q] >= 0:
                        jac[r, sat_xcol[q]] += 1.0
                    np.add.at(jac[r], sat_col[lo:hi], -sech2 * sat_coef[lo:hi])
                piv = np.empty(n, dtype=np.intc)
                status = _lu_factor(jac, piv)
                if status >= 0:
                    return traces, 1, step, status
                d = -f
                _lu_solve(jac, piv, d)
                if float(np.linalg.norm(d)) <= newton_tol:
                    x = x + d
                    converged = True
                    break
                # Damping: halve the step while the residual does not decrease.
                lam = 1.0
                for _ in range(damp_max + 1):
                    xt = x + lam * d
                    ftn = _residual(
                        a_base, xt, b, f, sat_row, sat_xcol, sat_vsat, sat_ptr, sat_col, sat_coef
                    )
                    if ftn < fnorm:
                        break
                    lam *= 0.5
                x = xt
                fnorm = ftn
            if not converged:
                return traces, 2, step, newton_maxit

        traces[step] = x
        for m in range(ncap):
            v1 = x[cap_n1[m]] if cap_n1[m] >= 0 else 0.0
            v2 = x[cap_n2[m]] if cap_n2[m] >= 0 else 0.0
            ihist[m] = -2.0 * cap_geq[m] * (v1 - v2) - ihist[m]

    return traces, 0, 0, 0
