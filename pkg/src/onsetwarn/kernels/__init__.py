"""Histogram kernel backend selection.

Prefers the compiled Cython extension and falls back to the pure-numpy
implementation when the extension was not built. Both backends return
bit-identical results; `HIST_BACKEND` records which one is active.
"""

try:
    from onsetwarn.kernels._histogram import build_histograms

    HIST_BACKEND = "compiled"
except ImportError:  # extension not built
    from onsetwarn.kernels.fallback import build_histograms

    HIST_BACKEND = "fallback"

__all__ = ["build_histograms", "HIST_BACKEND"]
