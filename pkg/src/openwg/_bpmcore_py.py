"""Pure numpy/scipy twin of the compiled Crank-Nicolson stepping kernel.

Same contract as ``openwg._bpmcore.run_steps``; the tridiagonal solve goes
through scipy's banded LAPACK driver each step instead of a precomputed
Thomas factorization.
"""
import numpy as np
from scipy.linalg import solve_banded


def run_steps(lhs_dl, lhs_d, lhs_du, rhs_dl, rhs_d, rhs_du, u0,
              n_steps, sample_every, plate_steps, plate_factor, out):
    nx = u0.shape[0]
    ab = np.zeros((3, nx), dtype=np.complex128)
    ab[0, 1:] = lhs_du
    ab[1, :] = lhs_d
    ab[2, :-1] = lhs_dl
    u = np.array(u0, copy=True)
    rhs = np.empty_like(u)
    out[0, :] = u
    plate_steps = np.asarray(plate_steps)
    row = 0
    ip = 0
    for step in range(n_steps):
        rhs[:] = rhs_d * u
        rhs[:-1] += rhs_du * u[1:]
        rhs[1:] += rhs_dl * u[:-1]
        u = solve_banded((1, 1), ab, rhs)
        while ip < len(plate_steps) and plate_steps[ip] == step:
            u *= plate_factor
            ip += 1
        if (step + 1) % sample_every == 0:
            row += 1
            out[row, :] = u
    return np.asarray(out)
