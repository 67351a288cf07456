# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loop of the Lanczos recurrence.

One call fuses the CSR matrix-vector product, the subtraction of the
previous Krylov vector, the diagonal projection alpha = Re <v|w>, and the
residual norm beta into two passes over the state vector. Summation order
is fixed (sequential), so results are bit-stable run to run.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

ctypedef fused idx_t:
    cnp.int32_t
    cnp.int64_t


def lanczos_iteration(idx_t[::1] indptr,
                      idx_t[::1] indices,
                      double complex[::1] data,
                      double complex[::1] v_curr,
                      double complex[::1] v_prev,
                      double beta_prev,
                      double complex[::1] w_out):
    """One Lanczos step: w = H v_curr - beta_prev v_prev - alpha v_curr.

    Writes w into ``w_out`` (unnormalized) and returns (alpha, beta) with
    beta = ||w||. The caller normalizes w into the next basis vector.
    """
    cdef Py_ssize_t n = v_curr.shape[0]
    cdef Py_ssize_t i, k, lo, hi
    cdef double complex acc
    cdef double alpha = 0.0
    cdef double beta_sq = 0.0
    cdef double wr, wi

    with nogil:
        for i in range(n):
            acc = 0
            lo = indptr[i]
            hi = indptr[i + 1]
            for k in range(lo, hi):
                acc = acc + data[k] * v_curr[indices[k]]
            if beta_prev != 0.0:
                acc = acc - beta_prev * v_prev[i]
            w_out[i] = acc
            # Re(conj(v) * w); the imaginary part vanishes for Hermitian H
            alpha += v_curr[i].real * acc.real + v_curr[i].imag * acc.imag
        for i in range(n):
            w_out[i] = w_out[i] - alpha * v_curr[i]
            wr = w_out[i].real
            wi = w_out[i].imag
            beta_sq += wr * wr + wi * wi

    return alpha, sqrt(beta_sq)


def csr_matvec(idx_t[::1] indptr,
               idx_t[::1] indices,
               double complex[::1] data,
               double complex[::1] x,
               double complex[::1] out):
    """out = A @ x for a CSR matrix, sequential row order."""
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t i, k
    cdef double complex acc

    with nogil:
        for i in range(n):
            acc = 0
            for k in range(indptr[i], indptr[i + 1]):
                acc = acc + data[k] * x[indices[k]]
            out[i] = acc
