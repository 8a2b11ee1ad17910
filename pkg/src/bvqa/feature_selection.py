"""Supervised relevance scoring of feature dimensions by split loss.

Each dimension is scored independently: candidate thresholds are equally
spaced interior points of the column's range, each threshold partitions the
samples in two, and the score is the minimal weighted MSE with region means
as representatives.  Low loss means the single dimension already separates
the labels well.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError

KINDS = ("spatial", "spatio_color", "temporal", "spatio_temporal")


@dataclass(frozen=True)
class RftResult:
    kind: str
    losses: np.ndarray  # (dim,)
    ranking: np.ndarray  # (dim,) column indices, ascending loss, stable ties


def _interior_thresholds(lo, hi, n_partitions):
    return np.linspace(lo, hi, n_partitions + 2)[1:-1]


def _column_losses(cols: np.ndarray, y: np.ndarray, n_partitions: int) -> np.ndarray:
    """Minimal split loss for each column of `cols` (n, c)."""
    n = y.shape[0]
    total1 = y.sum()
    total2 = (y * y).sum()
    variance = max((total2 - total1 * total1 / n) / n, 0.0)

    lo, hi = cols.min(axis=0), cols.max(axis=0)
    losses = np.full(cols.shape[1], variance)
    live = hi > lo  # constant columns keep the label variance
    if not np.any(live):
        return losses
    cols = cols[:, live]
    steps = (np.arange(1, n_partitions + 1) / (n_partitions + 1))[:, None]
    thresholds = lo[live] + steps * (hi[live] - lo[live])  # (p, c)

    mask = cols[None, :, :] <= thresholds[:, None, :]  # (p, n, c)
    n_left = mask.sum(axis=1)
    s1 = np.einsum("pnc,n->pc", mask, y)
    s2 = np.einsum("pnc,n->pc", mask, y * y)

    with np.errstate(divide="ignore", invalid="ignore"):
        n_right = n - n_left
        sse_left = s2 - s1 * s1 / n_left
        sse_right = (total2 - s2) - (total1 - s1) ** 2 / n_right
        wmse = (sse_left + sse_right) / n
    # a partition with an empty side is skipped
    wmse = np.where((n_left > 0) & (n_left < n), wmse, np.inf)
    best = np.clip(wmse.min(axis=0), 0.0, None)
    # the no-split fallback caps the loss at the label variance
    losses[live] = np.minimum(best, variance)
    return losses


def rft_loss(column, labels, n_partitions: int = 16) -> float:
    """Minimal weighted split MSE of one feature column against the labels."""
    col = np.asarray(column, dtype=np.float64).ravel()
    y = np.asarray(labels, dtype=np.float64).ravel()
    if col.shape[0] != y.shape[0]:
        raise ShapeError(f"column has {col.shape[0]} samples, labels {y.shape[0]}")
    if col.shape[0] < 2:
        raise ConfigError("relevance scoring needs at least 2 samples")
    if n_partitions < 1:
        raise ConfigError(f"n_partitions must be >= 1, got {n_partitions}")
    return float(_column_losses(col[:, None], y, n_partitions)[0])


def run_rft(matrix, labels, kind: str = "", n_partitions: int = 16,
            chunk: int = 256) -> RftResult:
    """Score every column of a feature matrix and rank ascending by loss.

    Ties rank the lower column index first (stable sort), so rankings are
    reproducible across runs and platforms.
    """
    x = np.asarray(matrix, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64).ravel()
    if x.ndim != 2:
        raise ShapeError(f"feature matrix must be 2-D, got {x.shape}")
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"matrix has {x.shape[0]} rows, labels {y.shape[0]}")
    if x.shape[0] < 2:
        raise ConfigError("relevance scoring needs at least 2 samples")
    if n_partitions < 1:
        raise ConfigError(f"n_partitions must be >= 1, got {n_partitions}")

    losses = np.empty(x.shape[1])
    for start in range(0, x.shape[1], chunk):
        stop = min(start + chunk, x.shape[1])
        losses[start:stop] = _column_losses(x[:, start:stop], y, n_partitions)
    ranking = np.argsort(losses, kind="stable")
    return RftResult(kind=kind, losses=losses, ranking=ranking)


@dataclass(frozen=True)
class FeatureSelector:
    """Per-kind selected column indices, in relevance order."""

    selected: dict[str, np.ndarray]

    @property
    def total(self) -> int:
        return sum(len(v) for v in self.selected.values())

    def counts(self) -> dict[str, int]:
        return {k: len(v) for k, v in self.selected.items()}

    def gather(self, vectors: dict[str, np.ndarray]) -> np.ndarray:
        """Concatenate the selected dimensions of each kind, fixed kind order."""
        parts = []
        for kind in KINDS:
            idx = self.selected[kind]
            v = np.asarray(vectors[kind], dtype=np.float64)
            if v.ndim == 1:
                parts.append(v[idx])
            else:
                parts.append(v[:, idx])
        return np.concatenate(parts, axis=-1)


def select_features(results: dict[str, RftResult], counts: dict[str, int]) -> FeatureSelector:
    """Keep the `counts[kind]` most relevant dimensions of each kind."""
    selected = {}
    for kind in KINDS:
        if kind not in results:
            raise ConfigError(f"missing relevance result for kind {kind!r}")
        if kind not in counts:
            raise ConfigError(f"missing selection count for kind {kind!r}")
        count = int(counts[kind])
        dim = results[kind].ranking.shape[0]
        if count < 0 or count > dim:
            raise ConfigError(
                f"selection count {count} for {kind!r} outside [0, {dim}]")
        selected[kind] = results[kind].ranking[:count].copy()
    return FeatureSelector(selected=selected)
