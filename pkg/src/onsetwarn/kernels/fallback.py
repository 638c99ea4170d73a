"""Pure-numpy histogram accumulation, used when the compiled kernel is absent.

Bit-compatible with the Cython kernel: np.bincount adds weights in input
order, and the flattened (row-major) index array visits each (column, bin)
accumulator in ascending-row order, exactly like the compiled loop.
"""
from __future__ import annotations

import numpy as np


def build_histograms(binned, rows, cols, grad, hess, n_bins):
    """Sum gradients, hessians and counts per (column, bin) over `rows`.

    Same contract as onsetwarn.kernels._histogram.build_histograms.
    """
    n_cols = len(cols)
    sub = binned[np.ix_(rows, cols)].astype(np.int64)
    sub += np.arange(n_cols, dtype=np.int64) * n_bins
    flat = sub.ravel()
    size = n_cols * n_bins

    gw = np.repeat(grad[rows], n_cols)
    hw = np.repeat(hess[rows], n_cols)
    hist_g = np.bincount(flat, weights=gw, minlength=size).reshape(n_cols, n_bins)
    hist_h = np.bincount(flat, weights=hw, minlength=size).reshape(n_cols, n_bins)
    hist_n = np.bincount(flat, minlength=size).reshape(n_cols, n_bins)
    return hist_g, hist_h, hist_n.astype(np.int64)
