"""Decision tree classifier with information-gain splits.

Splits maximize entropy reduction over boundaries between consecutive
distinct values; ties resolve to the lowest feature index, then the
lowest threshold, by visiting candidates in that order and only
accepting strictly better gain.  Nodes holding fewer samples than
``min_samples_split`` become leaves.

The stored threshold is the largest value routed left, not the midpoint
of the straddling pair: that keeps every traversal comparison a pure
order test, so strictly monotone per-feature transforms of the data
cannot flip any decision, seen or unseen.
"""

from __future__ import annotations

import numpy as np


def _entropy_rows(counts: np.ndarray, totals: np.ndarray) -> np.ndarray:
    """Shannon entropy (bits) per row of weighted class counts."""
    with np.errstate(divide="ignore", invalid="ignore"):
        p = counts / totals[:, None]
        terms = np.where(p > 0.0, p * np.log2(p, where=p > 0.0), 0.0)
    return -terms.sum(axis=1)


def _entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    if total <= 0.0:
        return 0.0
    return float(_entropy_rows(counts[None, :], np.asarray([total]))[0])


class TreeNodes:
    """Flat array representation of a fitted tree."""

    __slots__ = ("feature", "threshold", "left", "right", "proba")

    def __init__(self, feature, threshold, left, right, proba):
        self.feature = np.asarray(feature, dtype=np.int32)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int32)
        self.right = np.asarray(right, dtype=np.int32)
        self.proba = np.asarray(proba, dtype=np.float64)

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    @property
    def n_internal(self) -> int:
        return int((self.feature >= 0).sum())


class DecisionTree:
    """CART-style classifier over pre-encoded class codes 0..K-1."""

    def __init__(
        self,
        n_classes: int,
        min_samples_split: int = 20,
        max_depth: int | None = None,
        max_features: int | None = None,
    ):
        self.n_classes = int(n_classes)
        self.min_samples_split = int(min_samples_split)
        self.max_depth = max_depth
        self.max_features = max_features
        self.nodes: TreeNodes | None = None

    def fit(
        self,
        X: np.ndarray,
        y_codes: np.ndarray,
        sample_weight: np.ndarray | None = None,
        rng: np.random.Generator | None = None,
    ) -> "DecisionTree":
        X = np.asarray(X, dtype=np.float64)
        y_codes = np.asarray(y_codes, dtype=np.int64)
        w = (
            np.ones(X.shape[0], dtype=np.float64)
            if sample_weight is None
            else np.asarray(sample_weight, dtype=np.float64)
        )
        feature: list[int] = []
        threshold: list[float] = []
        left: list[int] = []
        right: list[int] = []
        proba: list[np.ndarray] = []

        def leaf_proba(idx: np.ndarray) -> np.ndarray:
            counts = np.bincount(y_codes[idx], weights=w[idx], minlength=self.n_classes)
            total = counts.sum()
            if total <= 0.0:
                return np.full(self.n_classes, 1.0 / self.n_classes)
            return counts / total

        # Iterative build; work items are (node slot, row indices, depth).
        stack = [(0, np.arange(X.shape[0]), 0)]
        feature.append(0)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        proba.append(np.zeros(self.n_classes))
        while stack:
            slot, idx, depth = stack.pop()
            proba[slot] = leaf_proba(idx)
            counts = np.bincount(y_codes[idx], weights=w[idx], minlength=self.n_classes)
            pure = (counts > 0.0).sum() <= 1
            depth_stop = self.max_depth is not None and depth >= self.max_depth
            if idx.size < self.min_samples_split or pure or depth_stop:
                feature[slot] = -1
                continue
            split = self._best_split(X, y_codes, w, idx, counts, rng)
            if split is None:
                feature[slot] = -1
                continue
            f, thr = split
            go_left = X[idx, f] <= thr
            for child_idx in (idx[go_left], idx[~go_left]):
                feature.append(0)
                threshold.append(0.0)
                left.append(-1)
                right.append(-1)
                proba.append(np.zeros(self.n_classes))
                stack.append((len(feature) - 1, child_idx, depth + 1))
            feature[slot] = f
            threshold[slot] = thr
            right[slot] = len(feature) - 1
            left[slot] = len(feature) - 2
        self.nodes = TreeNodes(feature, threshold, left, right, np.vstack(proba))
        return self

    def _best_split(self, X, y_codes, w, idx, parent_counts, rng):
        n_features = X.shape[1]
        if self.max_features is not None and self.max_features < n_features:
            chosen = rng.choice(n_features, size=self.max_features, replace=False)
            candidates = np.sort(chosen)
        else:
            candidates = np.arange(n_features)
        parent_entropy = _entropy(parent_counts)
        total_w = parent_counts.sum()
        best_gain = 0.0
        best: tuple[int, float] | None = None
        yo_idx = y_codes[idx]
        wo_idx = w[idx]
        for f in candidates:
            xs_all = X[idx, f]
            order = np.argsort(xs_all, kind="stable")
            xs = xs_all[order]
            if xs[0] == xs[-1]:
                continue
            wo = wo_idx[order]
            yo = yo_idx[order]
            boundaries = np.flatnonzero(xs[1:] > xs[:-1])
            hot = np.zeros((xs.size, self.n_classes))
            hot[np.arange(xs.size), yo] = wo
            cum_counts = np.cumsum(hot, axis=0)
            cum_w = np.cumsum(wo)
            lc = cum_counts[boundaries]
            lw = cum_w[boundaries]
            rc = cum_counts[-1] - lc
            rw = cum_w[-1] - lw
            # Zero-weight sides contribute zero weighted entropy; without
            # the cleanup their 0/0 rows poison argmax with NaNs.
            with np.errstate(invalid="ignore"):
                gains = parent_entropy - (
                    lw * _entropy_rows(lc, lw) + rw * _entropy_rows(rc, rw)
                ) / total_w
            gains = np.nan_to_num(gains, nan=0.0)
            j = int(np.argmax(gains))
            if gains[j] > best_gain:
                b = boundaries[j]
                best_gain = float(gains[j])
                best = (int(f), float(xs[b]))
        return best

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        nodes = self.nodes
        position = np.zeros(X.shape[0], dtype=np.int64)
        active = np.flatnonzero(nodes.feature[position] >= 0)
        while active.size:
            at = position[active]
            go_left = X[active, nodes.feature[at]] <= nodes.threshold[at]
            position[active] = np.where(go_left, nodes.left[at], nodes.right[at])
            active = active[nodes.feature[position[active]] >= 0]
        return nodes.proba[position]

    @property
    def n_internal_nodes(self) -> int:
        return self.nodes.n_internal
