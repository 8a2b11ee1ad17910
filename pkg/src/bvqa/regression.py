"""Gradient-boosted regression trees and cube-score ensembling.

Squared-error boosting, written here rather than imported: the contracts
(exact greedy splits, deterministic tie-breaking, truncation at the best
validation round, bit-reproducible refits) pin behavior that off-the-shelf
histogram boosters do not guarantee.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError

_LEAF = -1


@dataclass
class TrainConfig:
    max_depth: int = 5
    subsample: float = 0.6
    max_trees: int = 2000
    learning_rate: float = 0.05
    early_stop_patience: int = 50
    min_samples_leaf: int = 5
    seed: int = 0

    def validate(self) -> None:
        if self.max_depth < 1:
            raise ConfigError(f"max_depth must be >= 1, got {self.max_depth}")
        if not 0.0 < self.subsample <= 1.0:
            raise ConfigError(f"subsample must be in (0, 1], got {self.subsample}")
        if self.max_trees < 1:
            raise ConfigError(f"max_trees must be >= 1, got {self.max_trees}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.early_stop_patience < 1:
            raise ConfigError("early_stop_patience must be >= 1")
        if self.min_samples_leaf < 1:
            raise ConfigError("min_samples_leaf must be >= 1")


@dataclass
class RegressionTree:
    """Flat-array binary tree; feature == -1 marks a leaf."""

    feature: np.ndarray  # int32
    threshold: np.ndarray  # float64
    left: np.ndarray  # int32
    right: np.ndarray  # int32
    value: np.ndarray  # float64 (leaf prediction)

    @property
    def num_nodes(self) -> int:
        return self.feature.shape[0]

    def predict(self, x: np.ndarray) -> np.ndarray:
        node = np.zeros(x.shape[0], dtype=np.int32)
        active = self.feature[node] != _LEAF
        while np.any(active):
            idx = np.nonzero(active)[0]
            at = node[idx]
            go_left = x[idx, self.feature[at]] <= self.threshold[at]
            node[idx] = np.where(go_left, self.left[at], self.right[at])
            active = self.feature[node] != _LEAF
        return self.value[node]


def _best_split(x: np.ndarray, residual: np.ndarray, min_leaf: int):
    """Exact greedy search over all features and midpoint thresholds.

    Returns (feature, threshold, child_sse) or None.  Ties keep the lowest
    threshold within a feature and the lowest feature index across features
    (argmin takes the first minimum), which makes refits bit-reproducible.
    """
    n = x.shape[0]
    order = np.argsort(x, axis=0, kind="stable")
    xs = np.take_along_axis(x, order, axis=0)
    ys = residual[order]

    csum = np.cumsum(ys, axis=0)
    csq = np.cumsum(ys * ys, axis=0)
    total_sum, total_sq = csum[-1], csq[-1]

    # split after position i (1-based size of the left side)
    sizes = np.arange(1, n, dtype=np.float64)[:, None]
    left_sum, left_sq = csum[:-1], csq[:-1]
    sse_left = left_sq - left_sum * left_sum / sizes
    sse_right = (total_sq - left_sq) - (total_sum - left_sum) ** 2 / (n - sizes)
    score = sse_left + sse_right

    valid = xs[1:] > xs[:-1]
    valid[:min_leaf - 1] = False
    if min_leaf > 1:
        valid[n - min_leaf:] = False
    score = np.where(valid, score, np.inf)
    if not np.any(np.isfinite(score)):
        return None

    col_best = score.min(axis=0)
    feat = int(np.argmin(col_best))  # first minimum: lowest feature index
    pos = int(np.argmin(score[:, feat]))  # then lowest threshold within it
    threshold = (xs[pos, feat] + xs[pos + 1, feat]) / 2.0
    return feat, float(threshold), float(score[pos, feat])


def _fit_tree(x, residual, max_depth, min_leaf):
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(_LEAF)
        threshold.append(0.0)
        left.append(_LEAF)
        right.append(_LEAF)
        value.append(0.0)
        return len(feature) - 1

    def build(idx, depth):
        node = new_node()
        res = residual[idx]
        mean = res.mean()
        value[node] = float(mean)
        if depth >= max_depth or idx.shape[0] < 2 * min_leaf:
            return node
        parent_sse = float(((res - mean) ** 2).sum())
        if parent_sse <= 1e-12:
            return node
        found = _best_split(x[idx], res, min_leaf)
        if found is None:
            return node
        feat, thr, child_sse = found
        if parent_sse - child_sse <= 1e-12:
            return node
        mask = x[idx, feat] <= thr
        feature[node] = feat
        threshold[node] = thr
        left[node] = build(idx[mask], depth + 1)
        right[node] = build(idx[~mask], depth + 1)
        return node

    build(np.arange(x.shape[0]), 0)
    return RegressionTree(
        feature=np.array(feature, dtype=np.int32),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int32),
        right=np.array(right, dtype=np.int32),
        value=np.array(value, dtype=np.float64),
    )


@dataclass
class GbdtModel:
    trees: list[RegressionTree]
    learning_rate: float
    base_score: float
    feature_dim: int
    val_rmse_history: list[float] = field(default_factory=list, repr=False)

    @property
    def num_trees(self) -> int:
        return len(self.trees)

    def predict(self, features) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.feature_dim:
            raise ShapeError(
                f"features shape {x.shape} incompatible with dim {self.feature_dim}")
        out = np.full(x.shape[0], self.base_score)
        for tree in self.trees:
            out += self.learning_rate * tree.predict(x)
        return out[0] if squeeze else out


def _rmse(a, b):
    return float(np.sqrt(np.mean((a - b) ** 2)))


def train_gbdt(features, labels, val_features, val_labels,
               config: TrainConfig | None = None) -> GbdtModel:
    """Boost depth-limited trees on residuals with early stopping.

    The returned model is truncated at the round with minimal validation
    RMSE (earliest on ties); with constant labels that round is 0, so the
    model is just the base score.
    """
    config = config or TrainConfig()
    config.validate()
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64).ravel()
    xv = np.asarray(val_features, dtype=np.float64)
    yv = np.asarray(val_labels, dtype=np.float64).ravel()
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ShapeError(f"bad training shapes {x.shape} vs {y.shape}")
    if x.shape[0] < 2:
        raise ConfigError("need at least 2 training samples")
    if xv.size == 0 or yv.size == 0:
        raise ConfigError("validation set must be non-empty")
    if xv.ndim != 2 or xv.shape[1] != x.shape[1] or xv.shape[0] != yv.shape[0]:
        raise ShapeError(f"bad validation shapes {xv.shape} vs {yv.shape}")

    n = x.shape[0]
    rng = np.random.default_rng(config.seed)
    base = float(y.mean())
    pred = np.full(n, base)
    vpred = np.full(xv.shape[0], base)

    best_rmse = _rmse(vpred, yv)
    history = [best_rmse]
    best_round, since_best = 0, 0
    trees: list[RegressionTree] = []

    for _ in range(config.max_trees):
        residual = y - pred
        if config.subsample < 1.0:
            k = max(1, int(round(n * config.subsample)))
            rows = np.sort(rng.permutation(n)[:k])
        else:
            rows = np.arange(n)
        tree = _fit_tree(x[rows], residual[rows],
                         config.max_depth, config.min_samples_leaf)
        trees.append(tree)
        pred += config.learning_rate * tree.predict(x)
        vpred += config.learning_rate * tree.predict(xv)
        vr = _rmse(vpred, yv)
        history.append(vr)
        if vr < best_rmse:
            best_rmse, best_round, since_best = vr, len(trees), 0
        else:
            since_best += 1
            if since_best >= config.early_stop_patience:
                break

    return GbdtModel(
        trees=trees[:best_round],
        learning_rate=config.learning_rate,
        base_score=base,
        feature_dim=x.shape[1],
        val_rmse_history=history,
    )


@dataclass(frozen=True)
class ScoreReport:
    cube_scores: tuple[tuple[float, ...], ...]  # grouped by sub-video
    sub_video_scores: tuple[float, ...]
    video_score: float


def ensemble_scores(cube_scores_by_sub_video) -> ScoreReport:
    """Median of cube scores within each sub-video, then mean across them."""
    groups = [tuple(float(s) for s in group) for group in cube_scores_by_sub_video]
    if not groups or any(len(g) == 0 for g in groups):
        raise ConfigError("every sub-video needs at least one cube score")
    medians = tuple(float(np.median(g)) for g in groups)
    return ScoreReport(
        cube_scores=tuple(groups),
        sub_video_scores=medians,
        video_score=float(np.mean(medians)),
    )
