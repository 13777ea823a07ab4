# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pivot kernel for the dense-tableau simplex.

Single fused pass per pivot: normalize the pivot row, then subtract its
multiple from every other row, skipping rows whose multiplier is zero.
Compiled with -ffp-contract=off so results match the numpy fallback
bit for bit.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


def eliminate(cnp.ndarray[cnp.float64_t, ndim=2] M, Py_ssize_t r, Py_ssize_t q,
              scratch=None):
    """Gauss-Jordan elimination of column q around pivot row r, in place."""
    cdef double[:, ::1] T = M
    cdef Py_ssize_t nrows = T.shape[0]
    cdef Py_ssize_t ncols = T.shape[1]
    cdef Py_ssize_t i, j
    cdef double piv = T[r, q]
    cdef double f

    with nogil:
        for j in range(ncols):
            T[r, j] = T[r, j] / piv
        for i in range(nrows):
            if i == r:
                continue
            f = T[i, q]
            if f != 0.0:
                for j in range(ncols):
                    T[i, j] = T[i, j] - f * T[r, j]
            T[i, q] = 0.0
        T[r, q] = 1.0
