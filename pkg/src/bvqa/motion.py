"""Full-search block motion estimation and per-field motion statistics.

Vectors follow the content: a block whose best match sits at displacement
(dx, dy) in the previous frame gets vector (dx, dy), i.e. texture moving
right/down yields positive components.  Candidates are scanned in raster
order (dy, then dx, both ascending); ties on SAD are broken by the smaller
|dx|+|dy|, then by scan order, so results are platform-independent.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass

import numpy as np

from .errors import ShapeError


@dataclass(frozen=True)
class MotionField:
    frame_index: int  # index of the current frame within the cube (>= 1)
    block_size: int
    x_mv: np.ndarray  # (rows, cols) of block vectors, pixels
    y_mv: np.ndarray

    @property
    def num_blocks(self) -> int:
        return int(self.x_mv.size)


@dataclass(frozen=True)
class TemporalStats14:
    """The 14 per-field motion statistics, in fixed feature order."""

    mean_x: float
    mean_y: float
    std_x: float
    std_y: float
    sig_ratio_x: float
    sig_ratio_y: float
    max_x: float
    max_y: float
    min_x: float
    min_y: float
    mean_mag: float
    std_mag: float
    sig_ratio_mag: float
    max_mag: float

    def to_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=np.float64)


STATS_PER_FIELD = 14


def estimate_motion(cube, block_size: int = 16, search_range: int = 8) -> list[MotionField]:
    """Exhaustive SAD block matching of each frame against its predecessor.

    Only displacements whose reference block lies fully inside the frame are
    candidates; (0, 0) is always valid, so every block gets a vector.
    """
    luma = np.asarray(getattr(cube, "luma", cube))
    if luma.ndim != 3:
        raise ShapeError(f"expected (frames, rows, cols) luma, got {luma.shape}")
    n_frames, height, width = luma.shape
    if n_frames < 2:
        raise ShapeError("motion estimation needs at least 2 frames")
    if height % block_size or width % block_size:
        raise ShapeError(
            f"frame {height}x{width} not divisible into {block_size}px blocks")
    if search_range < 0:
        raise ShapeError(f"search range must be >= 0, got {search_range}")

    frames = luma.astype(np.int16, copy=False)
    cur, prev = frames[1:], frames[:-1]
    pairs = n_frames - 1
    rows, cols = height // block_size, width // block_size

    best_sad = np.full((pairs, rows, cols), np.iinfo(np.int64).max, dtype=np.int64)
    best_taxi = np.full((pairs, rows, cols), np.iinfo(np.int32).max, dtype=np.int32)
    best_dx = np.zeros((pairs, rows, cols), dtype=np.int16)
    best_dy = np.zeros((pairs, rows, cols), dtype=np.int16)

    for dy in range(-search_range, search_range + 1):
        # block row i is a candidate iff rows [i*b - dy, i*b - dy + b) fit
        i0 = max(0, -(-dy // block_size))
        i1 = min(rows, (height - block_size + dy) // block_size + 1)
        if i0 >= i1:
            continue
        for dx in range(-search_range, search_range + 1):
            j0 = max(0, -(-dx // block_size))
            j1 = min(cols, (width - block_size + dx) // block_size + 1)
            if j0 >= j1:
                continue
            ys, ye = i0 * block_size, i1 * block_size
            xs, xe = j0 * block_size, j1 * block_size
            diff = np.abs(cur[:, ys:ye, xs:xe].astype(np.int32)
                          - prev[:, ys - dy:ye - dy, xs - dx:xe - dx])
            sad = diff.reshape(pairs, i1 - i0, block_size,
                               j1 - j0, block_size).sum(axis=(2, 4), dtype=np.int64)
            taxi = abs(dx) + abs(dy)
            region = (slice(None), slice(i0, i1), slice(j0, j1))
            cur_best, cur_taxi = best_sad[region], best_taxi[region]
            take = (sad < cur_best) | ((sad == cur_best) & (taxi < cur_taxi))
            best_sad[region] = np.where(take, sad, cur_best)
            best_taxi[region] = np.where(take, taxi, cur_taxi)
            best_dx[region] = np.where(take, np.int16(dx), best_dx[region])
            best_dy[region] = np.where(take, np.int16(dy), best_dy[region])

    return [
        MotionField(frame_index=t + 1, block_size=block_size,
                    x_mv=best_dx[t].copy(), y_mv=best_dy[t].copy())
        for t in range(pairs)
    ]


def temporal_stats(field: MotionField, sig_threshold: float = 1.0) -> TemporalStats14:
    """Reduce one motion field to the 14 fixed statistics.

    "Significant" ratios count vectors whose per-axis magnitude (or vector
    magnitude) strictly exceeds ``sig_threshold``.  Std is the population
    standard deviation.
    """
    x = field.x_mv.astype(np.float64).ravel()
    y = field.y_mv.astype(np.float64).ravel()
    if x.size == 0:
        raise ShapeError("motion field has no blocks")
    mag = np.hypot(x, y)
    return TemporalStats14(
        mean_x=float(x.mean()),
        mean_y=float(y.mean()),
        std_x=float(x.std()),
        std_y=float(y.std()),
        sig_ratio_x=float((np.abs(x) > sig_threshold).mean()),
        sig_ratio_y=float((np.abs(y) > sig_threshold).mean()),
        max_x=float(x.max()),
        max_y=float(y.max()),
        min_x=float(x.min()),
        min_y=float(y.min()),
        mean_mag=float(mag.mean()),
        std_mag=float(mag.std()),
        sig_ratio_mag=float((mag > sig_threshold).mean()),
        max_mag=float(mag.max()),
    )


def raw_temporal_vector(fields, sub_video_len: int,
                        sig_threshold: float = 1.0) -> np.ndarray:
    """Concatenate per-frame statistics into one vector of 14 * sub_video_len.

    Frame 0 has no predecessor and contributes a zero block.
    """
    if len(fields) != sub_video_len - 1:
        raise ShapeError(
            f"expected {sub_video_len - 1} motion fields, got {len(fields)}")
    parts = [np.zeros(STATS_PER_FIELD)]
    parts.extend(temporal_stats(f, sig_threshold).to_array() for f in fields)
    return np.concatenate(parts)
