"""Hierarchical cropping: clip -> sub-videos -> sub-images / cubes / sub-cubes.

All pseudo-random origins come from a caller-supplied seed so a (video, seed)
pair always yields the same geometry.  Frames smaller than the crop size are
reflect-padded on the bottom/right; nothing is ever resized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, TooShortError
from .media_io import Frame, VideoClip


@dataclass(frozen=True)
class SubVideo:
    parent_id: str
    start_frame: int
    frames: tuple[Frame, ...]

    @property
    def num_frames(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class SubImage:
    """One square crop of a sub-video's representative (first) frame."""

    luma: np.ndarray
    chroma_b: np.ndarray
    chroma_r: np.ndarray
    origin: tuple[int, int]
    source_frame: int


@dataclass(frozen=True)
class Cube:
    """Co-located luma crop through every frame of a sub-video."""

    luma: np.ndarray  # (T, size, size)
    origin: tuple[int, int]
    mos_label: float | None = None


@dataclass(frozen=True)
class SubCube:
    luma: np.ndarray  # (t, h, w)
    origin: tuple[int, int, int]  # (row, col, frame)


def split_sub_videos(clip: VideoClip, sub_len: int = 30) -> list[SubVideo]:
    """Chop a clip into consecutive non-overlapping sub-videos from frame 0;
    a trailing remainder shorter than ``sub_len`` is dropped."""
    if sub_len < 2:
        raise ShapeError(f"sub-video length must be >= 2, got {sub_len}")
    count = clip.num_frames // sub_len
    if count == 0:
        raise TooShortError(
            f"clip has {clip.num_frames} frames; needs at least {sub_len}")
    return [
        SubVideo(parent_id=clip.source, start_frame=k * sub_len,
                 frames=clip.frames[k * sub_len:(k + 1) * sub_len])
        for k in range(count)
    ]


def _pad_to(plane: np.ndarray, size: int) -> np.ndarray:
    pad_r = max(0, size - plane.shape[0])
    pad_c = max(0, size - plane.shape[1])
    if pad_r == 0 and pad_c == 0:
        return plane
    return np.pad(plane, ((0, pad_r), (0, pad_c)), mode="reflect")


def _draw_origins(rng, count, max_row, max_col):
    # Uniform over the valid origin grid; exact duplicates are redrawn unless
    # the grid is too small to supply `count` distinct positions (a 320x320
    # frame has a single valid origin, so all crops coincide there).
    n_valid = (max_row + 1) * (max_col + 1)
    if n_valid <= count:
        return [tuple(rng.integers(0, [max_row + 1, max_col + 1]))
                for _ in range(count)]
    origins, seen = [], set()
    while len(origins) < count:
        origin = tuple(rng.integers(0, [max_row + 1, max_col + 1]))
        if origin not in seen:
            seen.add(origin)
            origins.append(origin)
    return origins


def crop_sub_images(sub_video: SubVideo, count: int = 6, size: int = 320,
                    seed=0) -> list[SubImage]:
    """Crop ``count`` square sub-images from the sub-video's first frame."""
    if count < 1:
        raise ShapeError(f"sub-image count must be >= 1, got {count}")
    frame = sub_video.frames[0]
    luma = _pad_to(frame.luma, size)
    cb = _pad_to(frame.chroma_b, size)
    cr = _pad_to(frame.chroma_r, size)
    max_row, max_col = luma.shape[0] - size, luma.shape[1] - size
    rng = np.random.default_rng(seed)
    return [
        SubImage(
            luma=luma[r:r + size, c:c + size],
            chroma_b=cb[r:r + size, c:c + size],
            chroma_r=cr[r:r + size, c:c + size],
            origin=(int(r), int(c)),
            source_frame=sub_video.start_frame,
        )
        for r, c in _draw_origins(rng, count, max_row, max_col)
    ]


def crop_cubes(sub_video: SubVideo, origins, size: int = 320,
               mos_label: float | None = None) -> list[Cube]:
    """Stack the luma crop at each origin through all frames of the sub-video."""
    planes = [_pad_to(f.luma, size) for f in sub_video.frames]
    cubes = []
    for r, c in origins:
        if r < 0 or c < 0 or r + size > planes[0].shape[0] or c + size > planes[0].shape[1]:
            raise ShapeError(f"cube origin {(r, c)} outside padded frame")
        cube = np.stack([p[r:r + size, c:c + size] for p in planes])
        cubes.append(Cube(luma=cube, origin=(int(r), int(c)), mos_label=mos_label))
    return cubes


def crop_sub_cube(cube: Cube, seed=0, dims: tuple[int, int, int] = (96, 96, 15)) -> SubCube:
    """Crop one (h, w, t) sub-cube from a cube at a seeded origin."""
    h, w, t = dims
    n_frames, rows, cols = cube.luma.shape
    if rows < h or cols < w or n_frames < t:
        raise ShapeError(
            f"cube {cube.luma.shape} smaller than sub-cube dims {(t, h, w)}")
    rng = np.random.default_rng(seed)
    r, c, f = (int(v) for v in rng.integers(0, [rows - h + 1, cols - w + 1,
                                                n_frames - t + 1]))
    return SubCube(luma=cube.luma[f:f + t, r:r + h, c:c + w], origin=(r, c, f))
