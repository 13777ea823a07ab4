"""Pure-numpy pivot kernel, used when the compiled extension is unavailable.

Arithmetic is ordered exactly like the Cython kernel (multiply, then
subtract, no FMA) so both backends produce bitwise-identical tableaus.
"""

import numpy as np

BACKEND = "numpy"


def eliminate(M, r, q, scratch=None):
    """Gauss-Jordan elimination of column q around pivot row r, in place.

    M is the augmented tableau (basis-inverse image of the constraint
    matrix plus the rhs column and the reduced-cost row). After the call,
    column q equals the r-th unit vector.
    """
    piv = M[r, q]
    np.divide(M[r], piv, out=M[r])
    col = M[:, q].copy()
    col[r] = 0.0
    if scratch is None:
        scratch = np.empty_like(M)
    np.multiply(col[:, None], M[r][None, :], out=scratch)
    np.subtract(M, scratch, out=M)
    M[:, q] = 0.0
    M[r, q] = 1.0
