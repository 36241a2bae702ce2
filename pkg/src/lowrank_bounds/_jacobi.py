"""Compiled one-sided Jacobi sweeps.

The kernel orthogonalizes the columns of a tall working matrix ``w`` in place
by plane rotations applied from the right, accumulating the rotations in ``v``.
"""

import math

import numba
import numpy as np


@numba.njit(cache=True)
def one_sided_jacobi(w, v, tol, max_sweeps, floor=0.0):
    """Run cyclic-by-row sweeps until every pair of columns is orthogonal.

    Parameters
    ----------
    w : ndarray, (m, n), m >= n, Fortran order
        Working copy of the matrix; overwritten with ``A V``.
    v : ndarray, (n, n), Fortran order
        Overwritten with the accumulated rotations (start from identity).
    tol : float
        Convergence threshold on ``|w_i . w_j| / (||w_i|| ||w_j||)``.
    max_sweeps : int
    floor : float
        Squared column norm at or below which a column counts as rounding
        noise; pairs involving such a column are not rotated.

    Returns
    -------
    sweeps : int
        Number of sweeps used, or -1 when the budget ran out.
    off : float
        Largest column-pair cosine seen in the last sweep.
    """
    m, n = w.shape
    off = 0.0
    for sweep in range(max_sweeps):
        off = 0.0
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for r in range(m):
                    alpha += w[r, i] * w[r, i]
                    beta += w[r, j] * w[r, j]
                    gamma += w[r, i] * w[r, j]
                if alpha <= floor or beta <= floor or gamma == 0.0:
                    continue
                cosine = abs(gamma) / math.sqrt(alpha) / math.sqrt(beta)
                if cosine > off:
                    off = cosine
                if cosine < tol:
                    continue
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                for r in range(m):
                    wi = w[r, i]
                    wj = w[r, j]
                    w[r, i] = c * wi - s * wj
                    w[r, j] = s * wi + c * wj
                for r in range(n):
                    vi = v[r, i]
                    vj = v[r, j]
                    v[r, i] = c * vi - s * vj
                    v[r, j] = s * vi + c * vj
                rotated = True
        if not rotated:
            return sweep + 1, off
    return -1, off


def warmup():
    """Trigger compilation on a tiny input."""
    w = np.array([[1.0, 2.0], [3.0, 4.0]])
    one_sided_jacobi(w, np.eye(2), 1e-14, 5, 0.0)
