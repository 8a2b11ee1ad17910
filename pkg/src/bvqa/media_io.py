"""Uncompressed video ingestion, dataset manifests, and synthetic clips.

Only YUV4MPEG2 (.y4m) and headerless planar 4:2:0 YUV are decoded, so no
codec stack is pulled in; compressed sources must be converted up front.
Chroma is upsampled to full resolution at decode time (2x2 sample
duplication) so every downstream crop indexes a single plane geometry.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import InputError, ManifestError, ParseError, TruncatedError

_SIGNATURE = b"YUV4MPEG2"
_FRAME_MARKER = b"FRAME"
# 4:2:0 variants differ only in chroma siting, which sample duplication ignores.
_COLORSPACE_420 = {"420", "420jpeg", "420paldv"}
_COLORSPACE_444 = {"444"}


@dataclass(frozen=True)
class Frame:
    """One decoded frame; all three planes stored at full resolution."""

    luma: np.ndarray
    chroma_b: np.ndarray
    chroma_r: np.ndarray


@dataclass(frozen=True)
class VideoClip:
    width: int
    height: int
    frame_rate: Fraction
    frames: tuple[Frame, ...]
    source: str = ""

    @property
    def num_frames(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    mos: float
    split: str = "unassigned"


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]

    def with_split(self, split: str) -> tuple[ManifestEntry, ...]:
        return tuple(e for e in self.entries if e.split == split)


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a deterministic distorted clip."""

    base_pattern: str = "drift"
    noise_sigma: float = 0.0
    blur_radius: float = 0.0
    seed: int = 0
    width: int = 352
    height: int = 352
    num_frames: int = 60
    frame_rate: Fraction = Fraction(30, 1)


def _as_stream(source):
    if isinstance(source, (bytes, bytearray)):
        import io

        return io.BytesIO(source)
    if hasattr(source, "read"):
        return source
    raise InputError(f"cannot read video from {type(source).__name__}")


def _upsample_chroma(plane: np.ndarray) -> np.ndarray:
    # 2x2 duplication; each output 2x2 block averages back to the source sample.
    return np.repeat(np.repeat(plane, 2, axis=0), 2, axis=1)


def _parse_header(line: bytes):
    if not line.startswith(_SIGNATURE):
        raise ParseError("missing YUV4MPEG2 signature")
    width = height = None
    rate = None
    colorspace = "420"
    for tag in line[len(_SIGNATURE):].split():
        key, val = tag[:1], tag[1:].decode("ascii", "replace")
        if key == b"W":
            width = int(val)
        elif key == b"H":
            height = int(val)
        elif key == b"F":
            num, _, den = val.partition(":")
            rate = Fraction(int(num), int(den or "1"))
        elif key == b"C":
            colorspace = val
        # I (interlace), A (aspect), X (extension) tags carry nothing we use.
    if width is None or height is None or rate is None:
        raise ParseError("header lacks W, H, or F tag")
    if width <= 0 or height <= 0:
        raise ParseError(f"bad frame geometry {width}x{height}")
    if colorspace in _COLORSPACE_420:
        if width % 2 or height % 2:
            raise ParseError("4:2:0 requires even luma dimensions")
        subsampled = True
    elif colorspace in _COLORSPACE_444:
        subsampled = False
    else:
        raise ParseError(f"unsupported colorspace C{colorspace}")
    return width, height, rate, subsampled


def parse_y4m(source, source_name: str = "") -> VideoClip:
    """Decode a YUV4MPEG2 stream (bytes or binary file object) into a clip."""
    stream = _as_stream(source)
    header = stream.readline()
    if not header:
        raise ParseError("empty stream")
    width, height, rate, subsampled = _parse_header(header.rstrip(b"\n"))
    if subsampled:
        cw, ch = width // 2, height // 2
    else:
        cw, ch = width, height
    ysize, csize = width * height, cw * ch

    frames = []
    while True:
        marker = stream.readline()
        if marker == b"":
            break
        if not marker.startswith(_FRAME_MARKER):
            raise ParseError(f"expected FRAME marker at frame {len(frames)}")
        payload = stream.read(ysize + 2 * csize)
        if len(payload) != ysize + 2 * csize:
            raise TruncatedError(
                f"frame {len(frames)} truncated ({len(payload)} of "
                f"{ysize + 2 * csize} bytes)",
                frame_index=len(frames),
            )
        buf = np.frombuffer(payload, dtype=np.uint8)
        luma = buf[:ysize].reshape(height, width)
        cb = buf[ysize:ysize + csize].reshape(ch, cw)
        cr = buf[ysize + csize:].reshape(ch, cw)
        if subsampled:
            cb, cr = _upsample_chroma(cb), _upsample_chroma(cr)
        frames.append(Frame(luma=luma, chroma_b=cb, chroma_r=cr))
    if not frames:
        raise ParseError("stream contains no frames")
    return VideoClip(width, height, rate, tuple(frames), source=source_name)


def parse_yuv420(source, width: int, height: int,
                 frame_rate: Fraction = Fraction(30, 1),
                 source_name: str = "") -> VideoClip:
    """Decode headerless planar 4:2:0 YUV given sidecar geometry."""
    if width % 2 or height % 2:
        raise ParseError("4:2:0 requires even luma dimensions")
    stream = _as_stream(source)
    ysize, csize = width * height, (width // 2) * (height // 2)
    frames = []
    while True:
        payload = stream.read(ysize + 2 * csize)
        if payload == b"":
            break
        if len(payload) != ysize + 2 * csize:
            raise TruncatedError(
                f"frame {len(frames)} truncated", frame_index=len(frames))
        buf = np.frombuffer(payload, dtype=np.uint8)
        frames.append(Frame(
            luma=buf[:ysize].reshape(height, width),
            chroma_b=_upsample_chroma(
                buf[ysize:ysize + csize].reshape(height // 2, width // 2)),
            chroma_r=_upsample_chroma(
                buf[ysize + csize:].reshape(height // 2, width // 2)),
        ))
    if not frames:
        raise ParseError("stream contains no frames")
    return VideoClip(width, height, frame_rate, tuple(frames), source=source_name)


def write_y4m(clip: VideoClip, dest, colorspace: str = "420") -> None:
    """Write a clip as YUV4MPEG2; 4:2:0 chroma takes the top-left sample
    of each 2x2 block, the exact inverse of decode-time duplication."""
    if colorspace in _COLORSPACE_420:
        if clip.width % 2 or clip.height % 2:
            raise InputError("4:2:0 output requires even dimensions")
        subsample = True
    elif colorspace in _COLORSPACE_444:
        subsample = False
    else:
        raise InputError(f"unsupported colorspace C{colorspace}")

    own = False
    if isinstance(dest, (str, Path)):
        stream, own = open(dest, "wb"), True
    else:
        stream = dest
    try:
        rate = clip.frame_rate
        stream.write(
            f"YUV4MPEG2 W{clip.width} H{clip.height} "
            f"F{rate.numerator}:{rate.denominator} C{colorspace}\n".encode())
        for frame in clip.frames:
            stream.write(b"FRAME\n")
            stream.write(np.ascontiguousarray(frame.luma, dtype=np.uint8).tobytes())
            for plane in (frame.chroma_b, frame.chroma_r):
                out = plane[0::2, 0::2] if subsample else plane
                stream.write(np.ascontiguousarray(out, dtype=np.uint8).tobytes())
    finally:
        if own:
            stream.close()


def load_video(path, yuv_geometry=None) -> VideoClip:
    """Open a video file by extension: .y4m, or .yuv with (width, height[, fps])."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"video file not found: {path}")
    with open(path, "rb") as fh:
        if path.suffix.lower() == ".yuv":
            if yuv_geometry is None:
                raise InputError("headerless YUV needs explicit geometry")
            width, height = yuv_geometry[0], yuv_geometry[1]
            rate = Fraction(yuv_geometry[2]) if len(yuv_geometry) > 2 else Fraction(30, 1)
            return parse_yuv420(fh, width, height, rate, source_name=str(path))
        return parse_y4m(fh, source_name=str(path))


def load_manifest(path) -> DatasetManifest:
    """Read a dataset manifest CSV with header ``path,mos[,split]``."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"manifest not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestError("manifest is empty") from None
        header = [h.strip().lower() for h in header]
        if header not in (["path", "mos"], ["path", "mos", "split"]):
            raise ManifestError(f"unexpected manifest header {header}")
        has_split = len(header) == 3

        entries = []
        seen = set()
        for row_num, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise ManifestError(
                    f"row {row_num}: expected {len(header)} fields, got {len(row)}",
                    row=row_num)
            clip_path = row[0].strip()
            if not clip_path:
                raise ManifestError(f"row {row_num}: empty path", row=row_num)
            if clip_path in seen:
                raise ManifestError(
                    f"row {row_num}: duplicate path {clip_path!r}", row=row_num)
            seen.add(clip_path)
            try:
                mos = float(row[1])
            except ValueError:
                raise ManifestError(
                    f"row {row_num}: non-numeric MOS {row[1]!r}",
                    row=row_num) from None
            if not math.isfinite(mos):
                raise ManifestError(
                    f"row {row_num}: non-finite MOS {row[1]!r}", row=row_num)
            split = "unassigned"
            if has_split:
                split = row[2].strip().lower() or "unassigned"
                if split not in ("train", "val", "test", "unassigned"):
                    raise ManifestError(
                        f"row {row_num}: unknown split {row[2]!r}", row=row_num)
            entries.append(ManifestEntry(clip_path, mos, split))
    return DatasetManifest(tuple(entries))


def pseudo_mos(noise_sigma: float, blur_radius: float) -> float:
    """Deterministic stand-in label for a synthesized clip."""
    return 100.0 * math.exp(-0.05 * noise_sigma - 0.3 * blur_radius)


# Integer per-frame drift keeps the planted motion exactly recoverable by a
# full-search matcher; velocities stay inside the default +/-8 search range.
_PATTERNS = {
    "drift": ((2, 1), 3.0),
    "waves": ((1, 2), 6.0),
    "blobs": ((2, 2), 10.0),
}


def _texture(rng, height, width, smooth):
    base = rng.uniform(0.0, 1.0, size=(height, width))
    # wrap mode keeps the texture tileable so cyclic rolling has no seams
    base = ndimage.gaussian_filter(base, sigma=smooth, mode="wrap")
    lo, hi = base.min(), base.max()
    if hi - lo < 1e-12:
        return np.full((height, width), 128.0)
    return 16.0 + 224.0 * (base - lo) / (hi - lo)


def synthesize_clip(spec: SynthSpec) -> tuple[VideoClip, float]:
    """Render a moving-texture clip with additive noise and Gaussian blur.

    Returns the clip together with its pseudo-MOS label.  Identical specs
    produce bitwise-identical clips.
    """
    if spec.base_pattern not in _PATTERNS:
        raise InputError(
            f"unknown base pattern {spec.base_pattern!r}; "
            f"choose from {sorted(_PATTERNS)}")
    if spec.noise_sigma < 0 or spec.blur_radius < 0:
        raise InputError("noise_sigma and blur_radius must be non-negative")
    if spec.width % 2 or spec.height % 2:
        raise InputError("synthesized clips use 4:2:0-compatible even dimensions")

    (vx, vy), smooth = _PATTERNS[spec.base_pattern]
    rng = np.random.default_rng(np.random.SeedSequence([0x5EED, spec.seed]))
    luma0 = _texture(rng, spec.height, spec.width, smooth)
    if spec.base_pattern == "waves":
        yy, xx = np.mgrid[0:spec.height, 0:spec.width]
        luma0 = 0.6 * luma0 + 0.4 * (
            128.0 + 60.0 * np.sin(2 * np.pi * (xx / 24.0 + yy / 40.0)))
    cb0 = _texture(rng, spec.height, spec.width, 2 * smooth) * 0.25 + 96.0
    cr0 = _texture(rng, spec.height, spec.width, 2 * smooth) * 0.25 + 96.0

    frames = []
    for t in range(spec.num_frames):
        planes = []
        for base, sigma_scale in ((luma0, 1.0), (cb0, 0.5), (cr0, 0.5)):
            plane = np.roll(base, shift=(vy * t, vx * t), axis=(0, 1))
            if spec.blur_radius > 0:
                plane = ndimage.gaussian_filter(
                    plane, sigma=spec.blur_radius, mode="reflect")
            if spec.noise_sigma > 0:
                plane = plane + rng.normal(
                    0.0, spec.noise_sigma * sigma_scale, size=plane.shape)
            planes.append(np.clip(np.rint(plane), 0, 255).astype(np.uint8))
        frames.append(Frame(luma=planes[0], chroma_b=planes[1], chroma_r=planes[2]))

    clip = VideoClip(spec.width, spec.height, spec.frame_rate, tuple(frames),
                     source=f"synth:{spec.base_pattern}:{spec.seed}")
    return clip, pseudo_mos(spec.noise_sigma, spec.blur_radius)
