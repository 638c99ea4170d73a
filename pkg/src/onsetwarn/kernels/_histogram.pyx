# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled gradient/hessian histogram accumulation for boosted-tree growth.

This is the hot inner loop of GBDT training: one call per tree node, scanning
every (row, column) pair of the node's binned sub-matrix. Accumulation order
is rows-ascending for every (column, bin) accumulator, which keeps the result
bit-identical to the numpy fallback in onsetwarn.kernels.fallback.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def build_histograms(const unsigned char[:, ::1] binned,
                     const cnp.int64_t[::1] rows,
                     const cnp.int64_t[::1] cols,
                     const double[::1] grad,
                     const double[::1] hess,
                     int n_bins):
    """Sum gradients, hessians and counts per (column, bin) over `rows`.

    binned: (n_samples, n_features) uint8 bin indices, C-contiguous.
    rows/cols: ascending index arrays selecting the node's sub-matrix.
    grad/hess: per-sample values, indexed by original row id.

    Returns (hist_g, hist_h, hist_n) with shape (len(cols), n_bins).
    """
    cdef Py_ssize_t n_rows = rows.shape[0]
    cdef Py_ssize_t n_cols = cols.shape[0]

    hist_g = np.zeros((n_cols, n_bins), dtype=np.float64)
    hist_h = np.zeros((n_cols, n_bins), dtype=np.float64)
    hist_n = np.zeros((n_cols, n_bins), dtype=np.int64)
    cdef double[:, ::1] hg = hist_g
    cdef double[:, ::1] hh = hist_h
    cdef cnp.int64_t[:, ::1] hn = hist_n

    cdef Py_ssize_t i, j, r, b
    cdef double g, h
    for i in range(n_rows):
        r = rows[i]
        g = grad[r]
        h = hess[r]
        for j in range(n_cols):
            b = binned[r, cols[j]]
            hg[j, b] += g
            hh[j, b] += h
            hn[j, b] += 1
    return hist_g, hist_h, hist_n
