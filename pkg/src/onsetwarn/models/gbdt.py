"""Gradient-boosted decision trees on logistic loss, built from histograms.

Trees use axis-aligned splits found by scanning 256-bin gradient/hessian
histograms (quantile bin edges fitted once on the training set). Leaf values
are Newton steps -G/(H+l2); the ensemble applies shrinkage per tree on top
of a base log-odds score. Row and column subsampling are seeded and
deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from onsetwarn.errors import DegenerateLabelsError, ShapeMismatchError
from onsetwarn.kernels import build_histograms
from onsetwarn.models.losses import sigmoid, weighted_bce


@dataclass(frozen=True)
class GBDTConfig:
    n_rounds: int = 400
    learning_rate: float = 0.05
    max_depth: int = 4
    subsample: float = 0.9
    colsample: float = 0.9
    n_bins: int = 256
    min_samples_leaf: int = 5
    min_gain: float = 0.0
    l2_reg: float = 1.0
    pos_weight: float | None = None  # class weighting off by default
    seed: int = 0

    def __post_init__(self) -> None:
        if not (2 <= self.n_bins <= 256):
            raise ValueError("n_bins must be in [2, 256]")
        if not (0.0 < self.subsample <= 1.0 and 0.0 < self.colsample <= 1.0):
            raise ValueError("subsample/colsample must be in (0, 1]")


class Binner:
    """Per-feature quantile binning with midpoint thresholds.

    When a feature has at most n_bins distinct training values, every
    distinct value gets its own bin, so histogram splits coincide with
    exhaustive search over raw thresholds.
    """

    def __init__(self, n_bins: int = 256):
        self.n_bins = n_bins
        self.thresholds_: list[np.ndarray] = []

    def fit(self, X: np.ndarray) -> "Binner":
        self.thresholds_ = []
        for j in range(X.shape[1]):
            u = np.unique(X[:, j])
            if len(u) <= 1:
                thr = np.empty(0, dtype=np.float64)
            elif len(u) <= self.n_bins:
                thr = (u[:-1] + u[1:]) / 2.0
            else:
                thr = np.unique(np.quantile(u, np.arange(1, self.n_bins) / self.n_bins))
            self.thresholds_.append(thr)
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        binned = np.empty(X.shape, dtype=np.uint8)
        for j, thr in enumerate(self.thresholds_):
            binned[:, j] = np.searchsorted(thr, X[:, j], side="right")
        return np.ascontiguousarray(binned)

    def n_thresholds(self) -> np.ndarray:
        return np.array([len(t) for t in self.thresholds_], dtype=np.int64)


@dataclass
class Tree:
    """Flat-array regression tree; feature < 0 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        idx = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            feat = self.feature[idx]
            at_leaf = feat < 0
            if at_leaf.all():
                break
            go_left = X[rows, np.maximum(feat, 0)] < self.threshold[idx]
            nxt = np.where(go_left, self.left[idx], self.right[idx])
            idx = np.where(at_leaf, idx, nxt)
        return self.value[idx]

    @property
    def n_nodes(self) -> int:
        return len(self.feature)


@dataclass
class SplitDecision:
    feature: int
    threshold: float
    gain: float
    bin_index: int


def best_split(
    binned: np.ndarray,
    rows: np.ndarray,
    cols: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    n_thresholds: np.ndarray,
    cfg: GBDTConfig,
    thresholds: Sequence[np.ndarray],
) -> SplitDecision | None:
    """Highest-gain (feature, bin) over the node's histograms.

    Ties resolve to the lowest feature index, then the lowest threshold
    (first maximizer in scan order).
    """
    hg, hh, hn = build_histograms(binned, rows, cols, grad, hess, cfg.n_bins)
    GL = np.cumsum(hg, axis=1)
    HL = np.cumsum(hh, axis=1)
    NL = np.cumsum(hn, axis=1)
    G = GL[:, -1:]
    H = HL[:, -1:]
    n_tot = len(rows)
    lam = cfg.l2_reg

    GR = G - GL
    HR = H - HL
    with np.errstate(divide="ignore", invalid="ignore"):
        gains = 0.5 * (GL**2 / (HL + lam) + GR**2 / (HR + lam) - G**2 / (H + lam))
    bin_grid = np.arange(cfg.n_bins)
    valid = (
        (bin_grid[None, :] < n_thresholds[cols][:, None])
        & (NL >= cfg.min_samples_leaf)
        & ((n_tot - NL) >= cfg.min_samples_leaf)
    )
    gains = np.where(valid & np.isfinite(gains), gains, -np.inf)
    flat = int(np.argmax(gains))
    best_gain = gains.flat[flat]
    if not np.isfinite(best_gain) or best_gain <= cfg.min_gain:
        return None
    ci, b = divmod(flat, cfg.n_bins)
    col = int(cols[ci])
    return SplitDecision(
        feature=col,
        threshold=float(thresholds[col][b]),
        gain=float(best_gain),
        bin_index=b,
    )


def _grow_tree(
    X: np.ndarray,
    binned: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    rows: np.ndarray,
    cols: np.ndarray,
    binner: Binner,
    cfg: GBDTConfig,
) -> Tree:
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    n_thr = binner.n_thresholds()
    root = new_node()
    stack: list[tuple[int, np.ndarray, int]] = [(root, rows, 0)]
    while stack:
        nid, nrows, depth = stack.pop()
        g_sum = float(grad[nrows].sum())
        h_sum = float(hess[nrows].sum())
        split = None
        if depth < cfg.max_depth and len(nrows) >= 2 * cfg.min_samples_leaf:
            split = best_split(binned, nrows, cols, grad, hess, n_thr, cfg, binner.thresholds_)
        if split is not None:
            mask = X[nrows, split.feature] < split.threshold
            lrows, rrows = nrows[mask], nrows[~mask]
            # degenerate midpoint rounding can empty one side; fall back to leaf
            if len(lrows) == 0 or len(rrows) == 0:
                split = None
            else:
                lid, rid = new_node(), new_node()
                feature[nid] = split.feature
                threshold[nid] = split.threshold
                left[nid] = lid
                right[nid] = rid
                stack.append((rid, rrows, depth + 1))
                stack.append((lid, lrows, depth + 1))
        if split is None:
            value[nid] = -g_sum / (h_sum + cfg.l2_reg)
    return Tree(
        feature=np.array(feature, dtype=np.int32),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int32),
        right=np.array(right, dtype=np.int32),
        value=np.array(value, dtype=np.float64),
    )


@dataclass
class GBDTModel:
    """Boosted ensemble: score = sigmoid(base + lr * sum(tree values))."""

    config: GBDTConfig
    base_score: float
    learning_rate: float
    trees: list[Tree] = field(default_factory=list)

    def predict_margin(self, X: np.ndarray) -> np.ndarray:
        X = _as_matrix(X)
        margin = np.full(X.shape[0], self.base_score, dtype=np.float64)
        for tree in self.trees:
            margin += self.learning_rate * tree.predict(X)
        return margin

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(self.predict_margin(X))


def _as_matrix(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 3:  # (n, L, d) windows -> flattened rows
        X = X.reshape(X.shape[0], -1)
    if X.ndim != 2:
        raise ShapeMismatchError(f"expected 2-d or 3-d input, got shape {X.shape}")
    return X


def train_gbdt(
    X: np.ndarray,
    y: np.ndarray,
    cfg: GBDTConfig,
    X_val: np.ndarray | None = None,
    y_val: np.ndarray | None = None,
) -> tuple[GBDTModel, list[dict]]:
    """Boost cfg.n_rounds trees; returns the model and a per-round log.

    Per round: gradients/hessians from the current margins, seeded row and
    column subsampling, one histogram tree, shrinkage-weighted append.
    """
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] < 2:
        raise DegenerateLabelsError("need at least 2 training samples")
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabelsError(
            f"both classes required, got {n_pos} positives / {n_neg} negatives"
        )

    n, p = X.shape
    pbar = n_pos / n
    base = float(np.log(pbar / (1.0 - pbar)))
    model = GBDTModel(config=cfg, base_score=base, learning_rate=cfg.learning_rate)

    binner = Binner(cfg.n_bins).fit(X)
    binned = binner.transform(X)
    w = np.ones(n)
    if cfg.pos_weight is not None:
        w = np.where(y == 1, cfg.pos_weight, 1.0)

    rng = np.random.default_rng(cfg.seed)
    margin = np.full(n, base, dtype=np.float64)
    val_margin = None
    if X_val is not None:
        X_val = _as_matrix(X_val)
        val_margin = np.full(X_val.shape[0], base, dtype=np.float64)

    log: list[dict] = []
    all_rows = np.arange(n, dtype=np.int64)
    all_cols = np.arange(p, dtype=np.int64)
    for rnd in range(1, cfg.n_rounds + 1):
        prob = sigmoid(margin)
        grad = w * (prob - y)
        hess = w * prob * (1.0 - prob)

        rows = all_rows
        if cfg.subsample < 1.0:
            k = max(1, int(round(cfg.subsample * n)))
            rows = np.sort(rng.choice(n, size=k, replace=False)).astype(np.int64)
        cols = all_cols
        if cfg.colsample < 1.0:
            k = max(1, int(round(cfg.colsample * p)))
            cols = np.sort(rng.choice(p, size=k, replace=False)).astype(np.int64)

        tree = _grow_tree(X, binned, grad, hess, rows, cols, binner, cfg)
        model.trees.append(tree)
        margin += cfg.learning_rate * tree.predict(X)

        entry = {"round": rnd, "train_loss": weighted_bce(margin, y)}
        if val_margin is not None:
            val_margin += cfg.learning_rate * tree.predict(X_val)
            entry["val_loss"] = weighted_bce(val_margin, y_val)
        log.append(entry)
    return model, log
