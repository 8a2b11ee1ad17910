"""Four unsupervised representation generators operating on cropped units.

Each cube contributes four vectors:

* spatial        -- from the cube's representative sub-image luma
* spatio_color   -- from the same sub-image with both chroma planes
* temporal       -- from block motion statistics over the whole cube
* spatio_temporal -- from the cube's 96x96x15 luma sub-cube

Fitting is unsupervised (no labels touch this module) and happens on
training-split crops only.  Channel outputs are aggregated into flat vectors
as: low-frequency Saab outputs pass through (spatial) or get per-channel
PCA + std (color/temporal variants), mid-frequency channels keep their first
N PCA coefficients, high-frequency channels keep a per-channel std.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cropping import Cube, SubCube, SubImage
from .errors import FitError, InputError, ShapeError, StateError
from .motion import estimate_motion, raw_temporal_vector
from .transforms import (
    ChannelTensor,
    PcaBasis,
    SaabKernel,
    StreamingPca,
    abs_max_pool,
    apply_pca,
    apply_saab,
    block_dct_8x8,
    channel_std,
    fit_saab,
    sliding_patches,
)

KINDS = ("spatial", "spatio_color", "temporal", "spatio_temporal")


@dataclass(frozen=True)
class RepresentationVector:
    kind: str
    values: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class FitOptions:
    """Knobs shared by all representation fits."""

    pca_per_channel_n: int = 8
    fit_min_samples: int = 1000
    fit_max_patches: int = 100000


class _PatchQuota:
    """Evenly-strided per-source patch subsampling up to a global cap."""

    def __init__(self, cap: int, n_sources: int):
        self.quota = max(1, -(-cap // max(1, n_sources)))
        self.parts: list[np.ndarray] = []

    def add(self, patches: np.ndarray) -> None:
        n = patches.shape[0]
        if n > self.quota:
            step = -(-n // self.quota)
            patches = patches[::step]
        self.parts.append(np.ascontiguousarray(patches))

    def matrix(self) -> np.ndarray:
        return np.vstack(self.parts)


def _crop_divisible(values: np.ndarray, window: tuple[int, int]) -> np.ndarray:
    """Trim trailing rows/cols so the spatial extent divides the pool window."""
    h = values.shape[0] - values.shape[0] % window[0]
    w = values.shape[1] - values.shape[1] % window[1]
    return values[:h, :w]


def _luma_of(sub_image) -> np.ndarray:
    if isinstance(sub_image, SubImage):
        return np.asarray(sub_image.luma, dtype=np.float64)
    arr = np.asarray(sub_image, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-D luma plane, got {arr.shape}")
    return arr


def _ycc_of(sub_image) -> np.ndarray:
    if isinstance(sub_image, SubImage):
        return np.stack([sub_image.luma, sub_image.chroma_b, sub_image.chroma_r],
                        axis=-1).astype(np.float64)
    arr = np.asarray(sub_image, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[-1] != 3:
        raise InputError(
            "spatio-color input needs luma plus both chroma planes "
            f"(H, W, 3); got shape {arr.shape}")
    return arr


def _require_fitted(pipeline, cls) -> None:
    if pipeline is None or not isinstance(pipeline, cls) or not getattr(
            pipeline, "fitted", False):
        raise StateError(f"{cls.__name__} must be fitted before generating")


def _channel_vectors(maps: np.ndarray) -> np.ndarray:
    """(..., C) tensor -> (C, prod(...)) matrix of flattened channel maps."""
    flat = maps.reshape(-1, maps.shape[-1])
    return np.ascontiguousarray(flat.T)


# ---------------------------------------------------------------------------
# Spatial representation

@dataclass
class SpatialPipeline:
    """320x320 luma -> 8x8 DCT -> two Saab hops -> band-wise aggregation.

    Chain geometry: DCT grid (40, 40, 64); hop 1 on the DC map with 4x4
    patches at stride 2 -> (19, 19, 16); channels split 3 low / 13 mid; the
    63 DCT AC channels are the high band.  Pooling per band: 1x1 (absolute
    value), 2x2 after trimming 19 -> 18, and 4x4.  Hop 2 runs 3x3 patches at
    stride 2 per low channel.  Output: low flattened + first-N PCA per mid
    channel + std per high channel.
    """

    hop1: SaabKernel
    hop2: list[SaabKernel]
    mid_pca: list[PcaBasis]
    pca_n: int
    input_size: int
    dim: int
    fitted: bool = True

    LOW_CHANNELS = 3

    @staticmethod
    def _dct_split(luma: np.ndarray):
        coeffs = block_dct_8x8(luma).values
        return coeffs[..., :1], coeffs[..., 1:]

    def _hop1_bands(self, dc_map: np.ndarray):
        out = apply_saab(self.hop1, dc_map).values
        low = np.abs(out[..., :self.LOW_CHANNELS])  # 1x1 abs-max pool
        mid = abs_max_pool(
            _crop_divisible(out[..., self.LOW_CHANNELS:], (2, 2)), (2, 2)).values
        return low, mid

    def _hop2_maps(self, low: np.ndarray) -> np.ndarray:
        outs = [apply_saab(k, low[..., c:c + 1]).values
                for c, k in enumerate(self.hop2)]
        return np.concatenate(outs, axis=-1)

    @classmethod
    def fit(cls, sub_images, options: FitOptions = FitOptions()) -> "SpatialPipeline":
        lumas = [_luma_of(s) for s in sub_images]
        if len(lumas) < options.fit_min_samples:
            raise FitError(
                f"spatial fit needs >= {options.fit_min_samples} sub-images, "
                f"got {len(lumas)}")
        size = lumas[0].shape[0]
        if any(p.shape != (size, size) for p in lumas):
            raise ShapeError("sub-images must share one square geometry")

        collect = _PatchQuota(options.fit_max_patches, len(lumas))
        for luma in lumas:
            dc, _ = cls._dct_split(luma)
            _, patches = sliding_patches(dc, (4, 4), (2, 2))
            collect.add(patches)
        hop1 = fit_saab(collect.matrix(), num_ac=15,
                        patch_shape=(4, 4), stride=(2, 2))

        shell = cls(hop1=hop1, hop2=[], mid_pca=[], pca_n=0,
                    input_size=size, dim=0)
        low_collect = [_PatchQuota(options.fit_max_patches, len(lumas))
                       for _ in range(cls.LOW_CHANNELS)]
        for luma in lumas:
            dc, _ = cls._dct_split(luma)
            low, _ = shell._hop1_bands(dc)
            for c in range(cls.LOW_CHANNELS):
                _, patches = sliding_patches(low[..., c:c + 1], (3, 3), (2, 2))
                low_collect[c].add(patches)
        hop2 = [fit_saab(q.matrix(), num_ac=8, patch_shape=(3, 3), stride=(2, 2))
                for q in low_collect]
        shell.hop2 = hop2

        mid_dim = None
        accumulators: list[StreamingPca] = []
        for luma in lumas:
            dc, _ = cls._dct_split(luma)
            _, mid = shell._hop1_bands(dc)
            rows = _channel_vectors(mid)
            if mid_dim is None:
                mid_dim = rows.shape[1]
                accumulators = [StreamingPca(mid_dim) for _ in range(rows.shape[0])]
            for acc, row in zip(accumulators, rows):
                acc.add(row)
        pca_n = min(options.pca_per_channel_n, mid_dim)
        mid_pca = [acc.finalize(pca_n) for acc in accumulators]

        hop2_channels = sum(k.num_channels for k in hop2)
        hop1_grid = (size // 8 - 4) // 2 + 1
        hop2_grid = (hop1_grid - 3) // 2 + 1
        dim = (hop2_grid * hop2_grid * hop2_channels
               + len(mid_pca) * pca_n
               + 63)
        return cls(hop1=hop1, hop2=hop2, mid_pca=mid_pca, pca_n=pca_n,
                   input_size=size, dim=dim)

    def generate(self, sub_image) -> RepresentationVector:
        luma = _luma_of(sub_image)
        if luma.shape != (self.input_size, self.input_size):
            raise ShapeError(
                f"sub-image {luma.shape} != fitted size {self.input_size}")
        dc, ac = self._dct_split(luma)
        low, mid = self._hop1_bands(dc)
        low_out = self._hop2_maps(low)
        high = abs_max_pool(ChannelTensor(ac), (4, 4)).values

        mid_rows = _channel_vectors(mid)
        mid_coeffs = np.concatenate(
            [apply_pca(b, row) for b, row in zip(self.mid_pca, mid_rows)])
        vec = np.concatenate([low_out.ravel(), mid_coeffs, channel_std(high)])
        if vec.shape[0] != self.dim:
            raise ShapeError(f"generated {vec.shape[0]} dims, expected {self.dim}")
        return RepresentationVector(kind="spatial", values=vec)


# ---------------------------------------------------------------------------
# Spatio-color representation

@dataclass
class SpatioColorPipeline:
    """(320, 320, 3) YCbCr -> 2x2 pool -> 3-D Saab over color -> hop 2.

    Hop 1 consumes 4x4x3 cuboids (space x color) at stride (4, 4, 3), giving
    a (40, 40, 48) grid; channels DC+AC1+AC2 form the low band, the other 45
    the high band (abs 2x2 max pooled).  Hop 2 runs 4x4 patches per low
    channel.  Aggregation: first-N PCA coefficients then std, per channel,
    low group first.
    """

    hop1: SaabKernel
    hop2: list[SaabKernel]
    low_pca: list[PcaBasis]
    high_pca: list[PcaBasis]
    pca_n_low: int
    pca_n_high: int
    input_size: int
    dim: int
    fitted: bool = True

    LOW_CHANNELS = 3

    @staticmethod
    def _pooled(ycc: np.ndarray) -> np.ndarray:
        return abs_max_pool(ycc, (2, 2)).values[..., None]  # (160,160,3,1)

    def _hop1_bands(self, pooled: np.ndarray):
        out = apply_saab(self.hop1, pooled).values[:, :, 0, :]  # color consumed
        low = out[..., :self.LOW_CHANNELS]
        high = abs_max_pool(out[..., self.LOW_CHANNELS:], (2, 2)).values
        return low, high

    def _hop2_maps(self, low: np.ndarray) -> np.ndarray:
        outs = [apply_saab(k, low[..., c:c + 1]).values
                for c, k in enumerate(self.hop2)]
        return np.concatenate(outs, axis=-1)

    @classmethod
    def fit(cls, sub_images, options: FitOptions = FitOptions()) -> "SpatioColorPipeline":
        yccs = [_ycc_of(s) for s in sub_images]
        if len(yccs) < options.fit_min_samples:
            raise FitError(
                f"spatio-color fit needs >= {options.fit_min_samples} "
                f"sub-images, got {len(yccs)}")
        size = yccs[0].shape[0]
        if any(v.shape != (size, size, 3) for v in yccs):
            raise ShapeError("sub-images must share one square geometry")

        collect = _PatchQuota(options.fit_max_patches, len(yccs))
        for ycc in yccs:
            _, patches = sliding_patches(cls._pooled(ycc), (4, 4, 3), (4, 4, 3))
            collect.add(patches)
        hop1 = fit_saab(collect.matrix(), num_ac=47,
                        patch_shape=(4, 4, 3), stride=(4, 4, 3))

        shell = cls(hop1=hop1, hop2=[], low_pca=[], high_pca=[],
                    pca_n_low=0, pca_n_high=0, input_size=size, dim=0)
        low_collect = [_PatchQuota(options.fit_max_patches, len(yccs))
                       for _ in range(cls.LOW_CHANNELS)]
        for ycc in yccs:
            low, _ = shell._hop1_bands(cls._pooled(ycc))
            for c in range(cls.LOW_CHANNELS):
                _, patches = sliding_patches(low[..., c:c + 1], (4, 4), (4, 4))
                low_collect[c].add(patches)
        hop2 = [fit_saab(q.matrix(), num_ac=15, patch_shape=(4, 4), stride=(4, 4))
                for q in low_collect]
        shell.hop2 = hop2

        low_acc = high_acc = None
        for ycc in yccs:
            low, high = shell._hop1_bands(cls._pooled(ycc))
            low_rows = _channel_vectors(shell._hop2_maps(low))
            high_rows = _channel_vectors(high)
            if low_acc is None:
                low_acc = [StreamingPca(low_rows.shape[1])
                           for _ in range(low_rows.shape[0])]
                high_acc = [StreamingPca(high_rows.shape[1])
                            for _ in range(high_rows.shape[0])]
            for acc, row in zip(low_acc, low_rows):
                acc.add(row)
            for acc, row in zip(high_acc, high_rows):
                acc.add(row)
        pca_n_low = min(options.pca_per_channel_n, low_acc[0].dim)
        pca_n_high = min(options.pca_per_channel_n, high_acc[0].dim)
        low_pca = [acc.finalize(pca_n_low) for acc in low_acc]
        high_pca = [acc.finalize(pca_n_high) for acc in high_acc]

        n_low, n_high = len(low_pca), len(high_pca)
        dim = n_low * (pca_n_low + 1) + n_high * (pca_n_high + 1)
        return cls(hop1=hop1, hop2=hop2, low_pca=low_pca, high_pca=high_pca,
                   pca_n_low=pca_n_low, pca_n_high=pca_n_high,
                   input_size=size, dim=dim)

    def generate(self, sub_image) -> RepresentationVector:
        ycc = _ycc_of(sub_image)
        if ycc.shape != (self.input_size, self.input_size, 3):
            raise ShapeError(
                f"sub-image {ycc.shape} != fitted size {self.input_size}")
        low, high = self._hop1_bands(self._pooled(ycc))
        low_maps = self._hop2_maps(low)

        parts = []
        for maps, bases in ((low_maps, self.low_pca), (high, self.high_pca)):
            rows = _channel_vectors(maps)
            parts.append(np.concatenate(
                [apply_pca(b, row) for b, row in zip(bases, rows)]))
            parts.append(channel_std(maps))
        vec = np.concatenate(parts)
        if vec.shape[0] != self.dim:
            raise ShapeError(f"generated {vec.shape[0]} dims, expected {self.dim}")
        return RepresentationVector(kind="spatio_color", values=vec)


# ---------------------------------------------------------------------------
# Temporal representation

@dataclass
class TemporalPipeline:
    """Per-frame motion-vector statistics, optionally with spectral PCA.

    The raw vector concatenates 14 statistics per frame slot (frame 0 is a
    zero block), giving 14 * sub_video_len dimensions.  When enabled, the
    first `spectral_n` PCA coefficients of the raw vector are appended.
    """

    sub_video_len: int
    block_size: int
    search_range: int
    sig_threshold: float
    spectral: PcaBasis | None
    dim: int
    fitted: bool = True

    @property
    def raw_dim(self) -> int:
        return 14 * self.sub_video_len

    @classmethod
    def fit(cls, raw_vectors, sub_video_len: int = 30, block_size: int = 16,
            search_range: int = 8, sig_threshold: float = 1.0,
            spectral_enabled: bool = False, spectral_n: int = 64) -> "TemporalPipeline":
        raw_dim = 14 * sub_video_len
        spectral = None
        dim = raw_dim
        if spectral_enabled:
            rows = np.asarray(list(raw_vectors), dtype=np.float64)
            if rows.ndim != 2 or rows.shape[1] != raw_dim:
                raise ShapeError(
                    f"raw temporal vectors must be (n, {raw_dim}), got {rows.shape}")
            if rows.shape[0] < 2:
                raise FitError("spectral PCA needs at least 2 temporal vectors")
            k = min(spectral_n, raw_dim)
            acc = StreamingPca(raw_dim)
            acc.add(rows)
            spectral = acc.finalize(k)
            dim = raw_dim + k
        return cls(sub_video_len=sub_video_len, block_size=block_size,
                   search_range=search_range, sig_threshold=sig_threshold,
                   spectral=spectral, dim=dim)

    def raw_from_cube(self, cube) -> np.ndarray:
        luma = np.asarray(getattr(cube, "luma", cube))
        if luma.ndim != 3 or luma.shape[0] != self.sub_video_len:
            raise ShapeError(
                f"cube must span {self.sub_video_len} frames, got {luma.shape}")
        fields = estimate_motion(luma, self.block_size, self.search_range)
        return raw_temporal_vector(fields, self.sub_video_len, self.sig_threshold)

    def generate(self, source) -> RepresentationVector:
        if isinstance(source, (Cube, np.ndarray)) and getattr(source, "ndim", 3) == 3:
            raw = self.raw_from_cube(source)
        elif isinstance(source, np.ndarray) and source.ndim == 1:
            raw = source.astype(np.float64)
        else:  # a list of motion fields
            raw = raw_temporal_vector(source, self.sub_video_len, self.sig_threshold)
        if raw.shape[0] != self.raw_dim:
            raise ShapeError(
                f"raw temporal vector has {raw.shape[0]} dims, "
                f"expected {self.raw_dim}")
        vec = raw
        if self.spectral is not None:
            vec = np.concatenate([raw, apply_pca(self.spectral, raw)])
        return RepresentationVector(kind="temporal", values=vec)


# ---------------------------------------------------------------------------
# Spatio-temporal representation

@dataclass
class SpatioTemporalPipeline:
    """(96, 96, 15) luma sub-cube -> two 3-D Saab hops -> PCA + std.

    Hop 1 consumes 8x8x3 cuboids at stride (8, 8, 3) -> (12, 12, 5, 192);
    channels DC+AC1..AC3 form the low band, the other 188 the high band
    (abs 2x2 max pooled in space only).  Hop 2 runs 2x2x5 cuboids per low
    channel, collapsing time.  Aggregation mirrors the spatio-color plan.
    """

    hop1: SaabKernel
    hop2: list[SaabKernel]
    low_pca: list[PcaBasis]
    high_pca: list[PcaBasis]
    pca_n_low: int
    pca_n_high: int
    input_dims: tuple[int, int, int]  # (t, h, w)
    dim: int
    fitted: bool = True

    LOW_CHANNELS = 4

    @staticmethod
    def _volume(sub_cube) -> np.ndarray:
        luma = np.asarray(getattr(sub_cube, "luma", sub_cube), dtype=np.float64)
        if luma.ndim != 3:
            raise ShapeError(f"sub-cube must be (t, h, w), got {luma.shape}")
        return np.transpose(luma, (1, 2, 0))[..., None]  # (h, w, t, 1)

    def _hop1_bands(self, volume: np.ndarray):
        out = apply_saab(self.hop1, volume).values  # (12,12,5,192)
        low = out[..., :self.LOW_CHANNELS]
        high = abs_max_pool(out[..., self.LOW_CHANNELS:], (2, 2)).values
        return low, high

    def _hop2_maps(self, low: np.ndarray) -> np.ndarray:
        outs = [apply_saab(k, low[..., c:c + 1]).values
                for c, k in enumerate(self.hop2)]
        return np.concatenate(outs, axis=-1)  # (6, 6, 1, 80)

    @classmethod
    def fit(cls, sub_cubes, options: FitOptions = FitOptions()) -> "SpatioTemporalPipeline":
        volumes = [cls._volume(s) for s in sub_cubes]
        if len(volumes) < options.fit_min_samples:
            raise FitError(
                f"spatio-temporal fit needs >= {options.fit_min_samples} "
                f"sub-cubes, got {len(volumes)}")
        dims = volumes[0].shape
        if any(v.shape != dims for v in volumes):
            raise ShapeError("sub-cubes must share one geometry")

        collect = _PatchQuota(options.fit_max_patches, len(volumes))
        for vol in volumes:
            _, patches = sliding_patches(vol, (8, 8, 3), (8, 8, 3))
            collect.add(patches)
        hop1 = fit_saab(collect.matrix(), num_ac=191,
                        patch_shape=(8, 8, 3), stride=(8, 8, 3))

        shell = cls(hop1=hop1, hop2=[], low_pca=[], high_pca=[],
                    pca_n_low=0, pca_n_high=0,
                    input_dims=(dims[2], dims[0], dims[1]), dim=0)
        low_collect = [_PatchQuota(options.fit_max_patches, len(volumes))
                       for _ in range(cls.LOW_CHANNELS)]
        for vol in volumes:
            low, _ = shell._hop1_bands(vol)
            for c in range(cls.LOW_CHANNELS):
                _, patches = sliding_patches(low[..., c:c + 1], (2, 2, 5), (2, 2, 5))
                low_collect[c].add(patches)
        hop2 = [fit_saab(q.matrix(), num_ac=19,
                         patch_shape=(2, 2, 5), stride=(2, 2, 5))
                for q in low_collect]
        shell.hop2 = hop2

        low_acc = high_acc = None
        for vol in volumes:
            low, high = shell._hop1_bands(vol)
            low_rows = _channel_vectors(shell._hop2_maps(low))
            high_rows = _channel_vectors(high)
            if low_acc is None:
                low_acc = [StreamingPca(low_rows.shape[1])
                           for _ in range(low_rows.shape[0])]
                high_acc = [StreamingPca(high_rows.shape[1])
                            for _ in range(high_rows.shape[0])]
            for acc, row in zip(low_acc, low_rows):
                acc.add(row)
            for acc, row in zip(high_acc, high_rows):
                acc.add(row)
        pca_n_low = min(options.pca_per_channel_n, low_acc[0].dim)
        pca_n_high = min(options.pca_per_channel_n, high_acc[0].dim)
        low_pca = [acc.finalize(pca_n_low) for acc in low_acc]
        high_pca = [acc.finalize(pca_n_high) for acc in high_acc]

        dim = (len(low_pca) * (pca_n_low + 1)
               + len(high_pca) * (pca_n_high + 1))
        return cls(hop1=hop1, hop2=hop2, low_pca=low_pca, high_pca=high_pca,
                   pca_n_low=pca_n_low, pca_n_high=pca_n_high,
                   input_dims=(dims[2], dims[0], dims[1]), dim=dim)

    def generate(self, sub_cube) -> RepresentationVector:
        volume = self._volume(sub_cube)
        t, h, w = self.input_dims
        if volume.shape != (h, w, t, 1):
            raise ShapeError(
                f"sub-cube {volume.shape[:3]} != fitted dims {(h, w, t)}")
        low, high = self._hop1_bands(volume)
        low_maps = self._hop2_maps(low)

        parts = []
        for maps, bases in ((low_maps, self.low_pca), (high, self.high_pca)):
            rows = _channel_vectors(maps)
            parts.append(np.concatenate(
                [apply_pca(b, row) for b, row in zip(bases, rows)]))
            parts.append(channel_std(maps))
        vec = np.concatenate(parts)
        if vec.shape[0] != self.dim:
            raise ShapeError(f"generated {vec.shape[0]} dims, expected {self.dim}")
        return RepresentationVector(kind="spatio_temporal", values=vec)


# ---------------------------------------------------------------------------
# Module-level fit/generate entry points

def fit_spatial(sub_images, options: FitOptions = FitOptions()) -> SpatialPipeline:
    return SpatialPipeline.fit(sub_images, options)


def gen_spatial(pipeline: SpatialPipeline, sub_image) -> RepresentationVector:
    _require_fitted(pipeline, SpatialPipeline)
    return pipeline.generate(sub_image)


def fit_spatio_color(sub_images, options: FitOptions = FitOptions()) -> SpatioColorPipeline:
    return SpatioColorPipeline.fit(sub_images, options)


def gen_spatio_color(pipeline: SpatioColorPipeline, sub_image) -> RepresentationVector:
    _require_fitted(pipeline, SpatioColorPipeline)
    return pipeline.generate(sub_image)


def gen_temporal(pipeline: TemporalPipeline, source) -> RepresentationVector:
    _require_fitted(pipeline, TemporalPipeline)
    return pipeline.generate(source)


def fit_spatio_temporal(sub_cubes, options: FitOptions = FitOptions()) -> SpatioTemporalPipeline:
    return SpatioTemporalPipeline.fit(sub_cubes, options)


def gen_spatio_temporal(pipeline: SpatioTemporalPipeline, sub_cube) -> RepresentationVector:
    _require_fitted(pipeline, SpatioTemporalPipeline)
    return pipeline.generate(sub_cube)


def fitted_arrays(pipeline) -> list[np.ndarray]:
    """Every fitted parameter array owned by a pipeline (for audits/tests)."""
    arrays = []
    for kernel in [getattr(pipeline, "hop1", None)] + list(getattr(pipeline, "hop2", [])):
        if kernel is not None:
            arrays.extend([kernel.ac_basis, kernel.ac_variance])
    for name in ("mid_pca", "low_pca", "high_pca"):
        for basis in getattr(pipeline, name, []) or []:
            arrays.extend([basis.mean, basis.components, basis.explained_variance])
    spectral = getattr(pipeline, "spectral", None)
    if spectral is not None:
        arrays.extend([spectral.mean, spectral.components,
                       spectral.explained_variance])
    return arrays
