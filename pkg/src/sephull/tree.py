"""Binary CART decision trees with weighted Gini splits.

Trees are stored flat: parallel arrays of (feature, threshold, left, right)
per node, with feature = -1 marking leaves. Routing sends ``x <= threshold``
left, so samples exactly at a threshold go left.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEAF = -1


@dataclass(frozen=True)
class TreeParams:
    """CART stopping parameters (defaults recorded in every results file)."""

    max_depth: int = 8
    min_leaf: int = 5

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_leaf < 1:
            raise ValueError(f"min_leaf must be >= 1, got {self.min_leaf}")


@dataclass(eq=False)
class DecisionTree:
    """Fitted binary classification tree over real feature rows.

    ``p_pos[i]`` holds the weighted positive-class probability of node i's
    training samples; leaves predict label 1 iff p_pos > 0.5 (probability
    ties go to class 0).
    """

    n_features: int
    feature: np.ndarray  # int, LEAF for leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    p_pos: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]


def _best_split(x: np.ndarray, y: np.ndarray, w: np.ndarray, min_leaf: int):
    """Minimum-weighted-Gini split over all features and cut points.

    Returns (feature, threshold, impurity) or None when no split leaves
    min_leaf samples on each side with distinct feature values.
    """
    n, k = x.shape
    if n < 2 * min_leaf:
        return None
    order = np.argsort(x, axis=0, kind="stable")
    xs = np.take_along_axis(x, order, axis=0)
    ws = w[order]
    wp = ws * y[order]
    cw = np.cumsum(ws, axis=0)
    cp = np.cumsum(wp, axis=0)
    total_w = cw[-1]
    total_p = cp[-1]
    wl = cw[:-1]
    pl = cp[:-1]
    wr = total_w - wl
    pr = total_p - pl
    with np.errstate(divide="ignore", invalid="ignore"):
        # weighted impurity  w_l * gini_l + w_r * gini_r, gini = 2 p (1 - p)
        imp = 2.0 * pl * (wl - pl) / wl + 2.0 * pr * (wr - pr) / wr
    invalid = ~(xs[:-1] < xs[1:])  # no cut between equal values
    imp[invalid] = np.inf
    imp[~np.isfinite(imp)] = np.inf
    counts = np.arange(1, n)
    bad_rows = (counts < min_leaf) | (n - counts < min_leaf)
    imp[bad_rows, :] = np.inf
    flat = np.argmin(imp)
    row, col = np.unravel_index(flat, imp.shape)
    if not np.isfinite(imp[row, col]):
        return None
    thr = 0.5 * (xs[row, col] + xs[row + 1, col])
    if not thr > xs[row, col]:  # midpoint rounded down onto the left value
        thr = xs[row, col]
    return int(col), float(thr), float(imp[row, col])


def fit_tree(x: np.ndarray, y: np.ndarray, w: np.ndarray, params: TreeParams) -> DecisionTree:
    """Greedy CART fit minimizing weighted Gini impurity."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    w = np.asarray(w, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("training data must be a nonempty 2-D feature matrix")
    if y.shape != (x.shape[0],) or w.shape != (x.shape[0],):
        raise ValueError("labels and weights must match the number of feature rows")

    feature, threshold, left, right, p_pos = [], [], [], [], []

    def leaf_prob(idx):
        tw = w[idx].sum()
        return float((w[idx] * y[idx]).sum() / tw) if tw > 0 else 0.0

    def add_node():
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        p_pos.append(0.0)
        return len(feature) - 1

    def build(idx, depth):
        node = add_node()
        p = leaf_prob(idx)
        p_pos[node] = p
        if depth >= params.max_depth or p in (0.0, 1.0):
            return node
        split = _best_split(x[idx], y[idx], w[idx], params.min_leaf)
        if split is None:
            return node
        col, thr, _ = split
        go_left = x[idx, col] <= thr
        feature[node] = col
        threshold[node] = thr
        left[node] = build(idx[go_left], depth + 1)
        right[node] = build(idx[~go_left], depth + 1)
        return node

    build(np.arange(x.shape[0]), 0)
    return DecisionTree(
        n_features=x.shape[1],
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        p_pos=np.asarray(p_pos),
    )


def predict_proba(tree: DecisionTree, x: np.ndarray) -> np.ndarray:
    """Positive-class probability for every row of x."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != tree.n_features:
        raise ValueError(f"expected rows of length {tree.n_features}, got shape {x.shape}")
    node = np.zeros(x.shape[0], dtype=np.int32)
    while True:
        feat = tree.feature[node]
        active = feat != LEAF
        if not active.any():
            break
        rows = np.nonzero(active)[0]
        f = feat[rows]
        go_left = x[rows, f] <= tree.threshold[node[rows]]
        node[rows] = np.where(go_left, tree.left[node[rows]], tree.right[node[rows]])
    return tree.p_pos[node]


def predict_label(tree: DecisionTree, x: np.ndarray) -> np.ndarray:
    """Hard labels for every row of x (probability ties -> class 0)."""
    return (predict_proba(tree, x) > 0.5).astype(np.int64)


def tree_predict(tree: DecisionTree, row: np.ndarray) -> tuple[int, float]:
    """(label, positive-class probability) for a single feature row."""
    p = predict_proba(tree, np.asarray(row, dtype=float).reshape(1, -1))[0]
    return int(p > 0.5), float(p)
