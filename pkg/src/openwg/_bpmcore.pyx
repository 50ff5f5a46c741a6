# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Crank-Nicolson stepping kernel for the one-way field propagation.

The z-loop applies a constant complex tridiagonal system per step:

    (I - B) u_next = (I + B) u

The LHS factorization (Thomas forward elimination) is precomputed once;
each step costs one tridiagonal multiply plus one back substitution, all
in C.  Thin phase plates multiply the field elementwise at given steps.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def run_steps(
    cnp.complex128_t[::1] lhs_dl,
    cnp.complex128_t[::1] lhs_d,
    cnp.complex128_t[::1] lhs_du,
    cnp.complex128_t[::1] rhs_dl,
    cnp.complex128_t[::1] rhs_d,
    cnp.complex128_t[::1] rhs_du,
    cnp.complex128_t[::1] u0,
    long n_steps,
    long sample_every,
    cnp.int64_t[::1] plate_steps,
    cnp.complex128_t[::1] plate_factor,
    cnp.complex128_t[:, ::1] out,
):
    """Advance u0 by n_steps; write u after steps 0, sample_every, ... to out.

    plate_steps holds sorted step indices s: the plate factor is applied to
    the field after step s completes (i.e. at z = (s+1)*dz).  out must have
    1 + n_steps // sample_every rows.
    """
    cdef long nx = u0.shape[0]
    cdef long n_plates = plate_steps.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] u_arr = np.array(u0, copy=True)
    cdef cnp.complex128_t[::1] u = u_arr
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] work_arr = np.empty(nx, np.complex128)
    cdef cnp.complex128_t[::1] rhs = work_arr
    # precomputed Thomas forward-elimination coefficients
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] cp_arr = np.empty(nx, np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] inv_arr = np.empty(nx, np.complex128)
    cdef cnp.complex128_t[::1] cp = cp_arr
    cdef cnp.complex128_t[::1] inv_den = inv_arr
    cdef long i, step, row, ip
    cdef cnp.complex128_t den

    den = lhs_d[0]
    inv_den[0] = 1.0 / den
    cp[0] = lhs_du[0] * inv_den[0]
    for i in range(1, nx):
        den = lhs_d[i] - lhs_dl[i - 1] * cp[i - 1]
        inv_den[i] = 1.0 / den
        if i < nx - 1:
            cp[i] = lhs_du[i] * inv_den[i]

    row = 0
    out[0, :] = u
    ip = 0
    for step in range(n_steps):
        # rhs = (I + B) u
        rhs[0] = rhs_d[0] * u[0] + rhs_du[0] * u[1]
        for i in range(1, nx - 1):
            rhs[i] = rhs_dl[i - 1] * u[i - 1] + rhs_d[i] * u[i] \
                + rhs_du[i] * u[i + 1]
        rhs[nx - 1] = rhs_dl[nx - 2] * u[nx - 2] + rhs_d[nx - 1] * u[nx - 1]
        # forward sweep (reuse rhs as d'), then back substitution into u
        rhs[0] = rhs[0] * inv_den[0]
        for i in range(1, nx):
            rhs[i] = (rhs[i] - lhs_dl[i - 1] * rhs[i - 1]) * inv_den[i]
        u[nx - 1] = rhs[nx - 1]
        for i in range(nx - 2, -1, -1):
            u[i] = rhs[i] - cp[i] * u[i + 1]
        while ip < n_plates and plate_steps[ip] == step:
            for i in range(nx):
                u[i] = u[i] * plate_factor[i]
            ip += 1
        if (step + 1) % sample_every == 0:
            row += 1
            out[row, :] = u
    return np.asarray(out)
