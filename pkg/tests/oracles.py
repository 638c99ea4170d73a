"""Independent brute-force references used by unit and acceptance tests.

Each oracle implements the contract in the most literal way possible and
stays decoupled from the library code paths it checks.
"""
from __future__ import annotations

import numpy as np


def onsets_by_run_scan(m, gap, count_year_opening_event=True):
    """Literal run scanner: find zero-runs, then positive-run starts."""
    m = list(int(v) for v in m)
    n = len(m)
    e = [0] * n
    first_pos = None
    for t in range(n):
        if m[t] == 1:
            first_pos = t
            break
    for t in range(n):
        if m[t] != 1:
            continue
        if t > 0 and m[t - 1] == 1:
            continue  # not a run start
        zeros = 0
        k = t - 1
        while k >= 0 and m[k] == 0:
            zeros += 1
            k -= 1
        if t == first_pos and count_year_opening_event:
            e[t] = 1
        elif zeros >= gap:
            e[t] = 1
    return e


def horizon_by_double_loop(e, h_min, h_max):
    """y_t via explicit tau scan within [t+h_min, t+h_max]."""
    e = list(int(v) for v in e)
    n = len(e)
    y = [0] * n
    for t in range(n):
        for tau in range(t + h_min, t + h_max + 1):
            if 0 <= tau < n and e[tau] == 1:
                y[t] = 1
                break
    return y


def auroc_by_pair_count(scores, labels):
    """O(n^2) positive-beats-negative counting, ties worth one half."""
    scores = list(float(s) for s in scores)
    labels = list(int(v) for v in labels)
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def exhaustive_best_split(X, grad, hess, l2_reg, min_samples_leaf):
    """Scan every (feature, midpoint-threshold) pair for the best gain.

    Tie-break identical to the library: first feature index, then smallest
    threshold, strict improvement to replace. Returns (feature, threshold,
    gain) or None.
    """
    X = np.asarray(X, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    hess = np.asarray(hess, dtype=np.float64)
    n = X.shape[0]
    g_tot = grad.sum()
    h_tot = hess.sum()
    parent = g_tot**2 / (h_tot + l2_reg)
    best = None
    for j in range(X.shape[1]):
        u = np.unique(X[:, j])
        for a, b in zip(u[:-1], u[1:]):
            thr = (a + b) / 2.0
            mask = X[:, j] < thr
            n_left = int(mask.sum())
            if n_left < min_samples_leaf or n - n_left < min_samples_leaf:
                continue
            gl, hl = grad[mask].sum(), hess[mask].sum()
            gr, hr = g_tot - gl, h_tot - hl
            gain = 0.5 * (gl**2 / (hl + l2_reg) + gr**2 / (hr + l2_reg) - parent)
            if gain <= 0:
                continue
            if best is None or gain > best[2]:
                best = (j, float(thr), float(gain))
    return best


def numerical_gradients(model, X, y, loss_fn, h_scale=1e-5):
    """Central finite differences of loss_fn over every model parameter."""
    grads = {}
    for key, param in model.params.items():
        g = np.zeros_like(param)
        it = np.nditer(param, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = param[idx]
            h = h_scale * (1.0 + abs(orig))
            param[idx] = orig + h
            lo_plus = loss_fn(model, X, y)
            param[idx] = orig - h
            lo_minus = loss_fn(model, X, y)
            param[idx] = orig
            g[idx] = (lo_plus - lo_minus) / (2.0 * h)
            it.iternext()
        grads[key] = g
    return grads


def max_relative_gradient_error(analytic, numeric, floor=1e-6):
    """max over params of |a - n| / max(|a|, |n|, floor)."""
    worst = 0.0
    for key, a in analytic.items():
        n = numeric[key]
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float((np.abs(a - n) / denom).max()))
    return worst
