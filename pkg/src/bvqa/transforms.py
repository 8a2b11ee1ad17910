"""Data-driven and fixed transforms: block DCT, Saab, PCA, pooling.

All transforms run in float64.  The Saab transform splits each patch into a
DC part (the patch mean) and an AC part living in the subspace orthogonal to
the constant vector; AC kernels are principal components fitted inside that
subspace, so orthogonality to DC holds by construction rather than by luck.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import FitError, ShapeError


@dataclass
class ChannelTensor:
    """Grid of transform responses; channels on the last axis."""

    values: np.ndarray
    frequency_band: str | None = None

    @property
    def shape(self):
        return self.values.shape

    @property
    def num_channels(self) -> int:
        return self.values.shape[-1]


def tensor_values(obj) -> np.ndarray:
    """Accept either a ChannelTensor or a bare array."""
    if isinstance(obj, ChannelTensor):
        return obj.values
    return np.asarray(obj)


# ---------------------------------------------------------------------------
# Block DCT

def _dct_matrix(n: int = 8) -> np.ndarray:
    k = np.arange(n)[:, None]
    x = np.arange(n)[None, :]
    mat = np.sqrt(2.0 / n) * np.cos(np.pi * (2 * x + 1) * k / (2 * n))
    mat[0] = np.sqrt(1.0 / n)
    return mat


def _zigzag_order(n: int = 8) -> np.ndarray:
    # Walk anti-diagonals, alternating direction, starting at the DC corner.
    coords = []
    for s in range(2 * n - 1):
        diag = [(i, s - i) for i in range(max(0, s - n + 1), min(s, n - 1) + 1)]
        coords.extend(diag if s % 2 else diag[::-1])
    return np.array([i * n + j for i, j in coords])


_DCT8 = _dct_matrix(8)
_ZIGZAG = _zigzag_order(8)
_UNZIGZAG = np.argsort(_ZIGZAG)


def block_dct_8x8(plane) -> ChannelTensor:
    """Orthonormal 8x8 block DCT; channel c is the zig-zag coefficient c."""
    a = np.asarray(tensor_values(plane), dtype=np.float64)
    if a.ndim == 3 and a.shape[-1] == 1:
        a = a[..., 0]
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-D plane, got shape {a.shape}")
    height, width = a.shape
    if height % 8 or width % 8:
        raise ShapeError(f"plane {height}x{width} not divisible into 8x8 blocks")
    blocks = a.reshape(height // 8, 8, width // 8, 8).transpose(0, 2, 1, 3)
    coeff = _DCT8 @ blocks @ _DCT8.T
    flat = coeff.reshape(height // 8, width // 8, 64)
    return ChannelTensor(values=flat[..., _ZIGZAG])


def inverse_block_dct_8x8(tensor) -> np.ndarray:
    """Exact inverse of :func:`block_dct_8x8` (used by round-trip checks)."""
    v = np.asarray(tensor_values(tensor), dtype=np.float64)
    if v.ndim != 3 or v.shape[-1] != 64:
        raise ShapeError(f"expected (bh, bw, 64) coefficients, got {v.shape}")
    bh, bw = v.shape[:2]
    blocks = v[..., _UNZIGZAG].reshape(bh, bw, 8, 8)
    pixels = _DCT8.T @ blocks @ _DCT8
    return pixels.transpose(0, 2, 1, 3).reshape(bh * 8, bw * 8)


# ---------------------------------------------------------------------------
# Patch extraction shared by Saab fit and apply

def sliding_patches(values: np.ndarray, window, stride):
    """Flatten sliding windows into rows.

    Returns (grid_shape, patches) where patches has one row per window
    placement and columns in C-order over (window dims..., channel).
    """
    v = np.asarray(values, dtype=np.float64)
    nwin = len(window)
    if v.ndim != nwin + 1:
        raise ShapeError(
            f"tensor rank {v.ndim} does not match window rank {nwin}+channels")
    for ax in range(nwin):
        if v.shape[ax] < window[ax]:
            raise ShapeError(
                f"axis {ax} extent {v.shape[ax]} smaller than window {window[ax]}")
        if stride[ax] < 1:
            raise ShapeError(f"stride must be positive, got {stride}")
    axes = tuple(range(nwin))
    win = np.lib.stride_tricks.sliding_window_view(v, window, axis=axes)
    # win shape: (grid..., C, window...) -> subsample grid by stride
    sl = tuple(slice(None, None, s) for s in stride) + (Ellipsis,)
    win = win[sl]
    grid_shape = win.shape[:nwin]
    channels = win.shape[nwin]
    # reorder so each row flattens as (window..., channel)
    win = np.moveaxis(win, nwin, -1)
    patches = win.reshape(int(np.prod(grid_shape)), int(np.prod(window)) * channels)
    return grid_shape, patches


# ---------------------------------------------------------------------------
# Saab transform

@dataclass
class SaabKernel:
    """Fitted Saab stage: DC = patch mean, AC = learned orthonormal rows."""

    patch_shape: tuple[int, ...]
    stride: tuple[int, ...]
    in_channels: int
    num_ac: int
    ac_basis: np.ndarray  # (num_ac, patch_len)
    ac_variance: np.ndarray  # (num_ac,), descending

    @property
    def patch_len(self) -> int:
        return int(np.prod(self.patch_shape)) * self.in_channels

    @property
    def num_channels(self) -> int:
        return 1 + self.num_ac


@lru_cache(maxsize=16)
def _mean_free_basis(dim: int) -> np.ndarray:
    """Orthonormal basis (dim x dim-1) of the subspace orthogonal to 1."""
    m = np.empty((dim, dim))
    m[:, 0] = 1.0 / np.sqrt(dim)
    m[:, 1:] = np.eye(dim)[:, :dim - 1]
    q, _ = np.linalg.qr(m)
    return q[:, 1:]


def _fix_signs(rows: np.ndarray) -> np.ndarray:
    if rows.size == 0:
        return rows
    idx = np.argmax(np.abs(rows), axis=1)
    signs = np.sign(rows[np.arange(rows.shape[0]), idx])
    signs[signs == 0] = 1.0
    return rows * signs[:, None]


def _top_components(cov: np.ndarray, k: int):
    eigval, eigvec = np.linalg.eigh(cov)
    order = np.argsort(eigval, kind="stable")[::-1][:k]
    return np.maximum(eigval[order], 0.0), eigvec[:, order]


def fit_saab(patches, num_ac: int, patch_shape=None, stride=None,
             in_channels: int = 1) -> SaabKernel:
    """Fit Saab AC kernels from flattened patches.

    The patch mean (DC) is removed first; principal components are then
    computed inside the mean-free subspace via a two-pass covariance and a
    dense eigendecomposition.  Row signs are fixed so each kernel's
    largest-magnitude entry is positive.
    """
    x = np.asarray(patches, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"patches must be 2-D (n, patch_len), got {x.shape}")
    n, dim = x.shape
    if num_ac < 1:
        raise FitError(f"num_ac must be >= 1, got {num_ac}")
    if num_ac > dim - 1:
        raise FitError(
            f"num_ac {num_ac} exceeds AC subspace dimension {dim - 1} "
            "(the constant direction is reserved for DC)")
    if n < num_ac + 1:
        raise FitError(f"need at least {num_ac + 1} patches, got {n}")

    centered = x - x.mean(axis=1, keepdims=True)
    basis = _mean_free_basis(dim)
    proj = centered @ basis
    mean = proj.mean(axis=0)
    diff = proj - mean
    cov = diff.T @ diff / (n - 1)
    variance, components = _top_components(cov, num_ac)
    rows = _fix_signs((basis @ components).T)

    if patch_shape is None:
        patch_shape = (dim // in_channels,)
    patch_shape = tuple(int(p) for p in patch_shape)
    if int(np.prod(patch_shape)) * in_channels != dim:
        raise ShapeError(
            f"patch_shape {patch_shape} x {in_channels} channels != width {dim}")
    if stride is None:
        stride = patch_shape
    return SaabKernel(
        patch_shape=patch_shape,
        stride=tuple(int(s) for s in stride),
        in_channels=in_channels,
        num_ac=num_ac,
        ac_basis=rows,
        ac_variance=variance,
    )


def apply_saab(kernel: SaabKernel, tensor, stride=None) -> ChannelTensor:
    """Slide the kernel over a tensor; output channel 0 is DC, rest are AC."""
    v = np.asarray(tensor_values(tensor), dtype=np.float64)
    nwin = len(kernel.patch_shape)
    if v.ndim == nwin:  # implicit single channel
        v = v[..., None]
    if v.ndim != nwin + 1:
        raise ShapeError(
            f"tensor shape {v.shape} incompatible with {nwin}-D patches")
    if v.shape[-1] != kernel.in_channels:
        raise ShapeError(
            f"tensor has {v.shape[-1]} channels, kernel expects {kernel.in_channels}")
    stride = kernel.stride if stride is None else tuple(int(s) for s in stride)
    grid_shape, patches = sliding_patches(v, kernel.patch_shape, stride)
    dc = patches.mean(axis=1)
    ac = patches @ kernel.ac_basis.T
    out = np.concatenate([dc[:, None], ac], axis=1)
    return ChannelTensor(values=out.reshape(grid_shape + (kernel.num_channels,)))


# ---------------------------------------------------------------------------
# PCA

@dataclass
class PcaBasis:
    mean: np.ndarray  # (dim,)
    components: np.ndarray  # (k, dim), orthonormal rows
    explained_variance: np.ndarray  # (k,), descending

    @property
    def k(self) -> int:
        return self.components.shape[0]


def fit_pca(vectors, k: int) -> PcaBasis:
    """Top-k principal components of a vector sample (two-pass covariance)."""
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"vectors must be 2-D (n, dim), got {x.shape}")
    n, dim = x.shape
    if k < 1 or k > dim:
        raise ShapeError(f"k must be in [1, {dim}], got {k}")
    if n < 2:
        raise FitError(f"need at least 2 vectors to fit PCA, got {n}")
    mean = x.mean(axis=0)
    diff = x - mean
    cov = diff.T @ diff / (n - 1)
    variance, components = _top_components(cov, k)
    return PcaBasis(mean=mean, components=_fix_signs(components.T),
                    explained_variance=variance)


def apply_pca(basis: PcaBasis, vector) -> np.ndarray:
    """Project one vector (or a batch of rows) onto the fitted components."""
    v = np.asarray(vector, dtype=np.float64)
    if v.shape[-1] != basis.mean.shape[0]:
        raise ShapeError(
            f"vector length {v.shape[-1]} != basis dimension {basis.mean.shape[0]}")
    return (v - basis.mean) @ basis.components.T


class StreamingPca:
    """Accumulate first/second moments batch-wise, then extract components.

    Used where materializing every training vector per channel would not fit
    in memory; equivalent to fit_pca up to the one-pass moment arithmetic.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self.count = 0
        self._sum = np.zeros(dim)
        self._outer = np.zeros((dim, dim))

    def add(self, rows: np.ndarray) -> None:
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim == 1:
            rows = rows[None, :]
        if rows.shape[1] != self.dim:
            raise ShapeError(f"rows have dim {rows.shape[1]}, expected {self.dim}")
        self.count += rows.shape[0]
        self._sum += rows.sum(axis=0)
        self._outer += rows.T @ rows

    def finalize(self, k: int) -> PcaBasis:
        if self.count < 2:
            raise FitError(f"need at least 2 vectors, got {self.count}")
        if k < 1 or k > self.dim:
            raise ShapeError(f"k must be in [1, {self.dim}], got {k}")
        mean = self._sum / self.count
        cov = (self._outer - self.count * np.outer(mean, mean)) / (self.count - 1)
        cov = (cov + cov.T) / 2.0  # restore exact symmetry lost to rounding
        variance, components = _top_components(cov, k)
        return PcaBasis(mean=mean, components=_fix_signs(components.T),
                        explained_variance=variance)


# ---------------------------------------------------------------------------
# Pooling and per-channel statistics

def abs_max_pool(tensor, window: tuple[int, int]) -> ChannelTensor:
    """Non-overlapping max of absolute values over the two spatial axes."""
    src = tensor_values(tensor).astype(np.float64, copy=False)
    wh, ww = window
    if wh < 1 or ww < 1:
        raise ShapeError(f"pool window must be positive, got {window}")
    height, width = src.shape[0], src.shape[1]
    if height % wh or width % ww:
        raise ShapeError(
            f"spatial dims {height}x{width} not divisible by window {wh}x{ww}")
    rest = src.shape[2:]
    r = np.abs(src).reshape((height // wh, wh, width // ww, ww) + rest)
    out = r.max(axis=(1, 3))
    band = tensor.frequency_band if isinstance(tensor, ChannelTensor) else None
    return ChannelTensor(values=out, frequency_band=band)


def channel_std(tensor) -> np.ndarray:
    """Population standard deviation per channel over all other axes."""
    v = np.asarray(tensor_values(tensor), dtype=np.float64)
    if v.ndim < 2:
        raise ShapeError("channel_std needs a trailing channel axis")
    return v.reshape(-1, v.shape[-1]).std(axis=0)
