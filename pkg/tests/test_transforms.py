"""Block DCT, Saab kernels, PCA, pooling, and channel statistics."""

import numpy as np
import pytest

from bvqa.errors import FitError, ShapeError
from bvqa.transforms import (
    ChannelTensor,
    StreamingPca,
    abs_max_pool,
    apply_pca,
    apply_saab,
    block_dct_8x8,
    channel_std,
    fit_pca,
    fit_saab,
    inverse_block_dct_8x8,
    sliding_patches,
)


def test_dct_constant_block():
    out = block_dct_8x8(np.full((8, 8), 128.0))
    assert out.shape == (1, 1, 64)
    assert out.values[0, 0, 0] == pytest.approx(1024.0)
    assert np.max(np.abs(out.values[0, 0, 1:])) < 1e-9


def test_dct_energy_preserved():
    plane = np.zeros((8, 8))
    plane[3, 5] = 8.0
    out = block_dct_8x8(plane)
    assert np.sum(out.values ** 2) == pytest.approx(64.0, abs=1e-9)


def test_dct_round_trip_and_parseval():
    rng = np.random.default_rng(0)
    plane = rng.uniform(0, 255, (24, 40))
    coeff = block_dct_8x8(plane)
    assert coeff.shape == (3, 5, 64)
    back = inverse_block_dct_8x8(coeff)
    assert np.max(np.abs(back - plane)) < 1e-6

    blocks = plane.reshape(3, 8, 5, 8).transpose(0, 2, 1, 3)
    pixel_energy = (blocks ** 2).sum(axis=(2, 3))
    coeff_energy = (coeff.values ** 2).sum(axis=2)
    assert np.max(np.abs(coeff_energy / pixel_energy - 1.0)) < 1e-6


def test_dct_rejects_indivisible_plane():
    with pytest.raises(ShapeError):
        block_dct_8x8(np.zeros((12, 10)))


def test_saab_constant_patches_have_zero_variance():
    kernel = fit_saab(np.full((50, 16), 3.0), num_ac=4, patch_shape=(4, 4),
                      stride=(4, 4))
    assert np.max(kernel.ac_variance) < 1e-12
    out = apply_saab(kernel, np.full((8, 8), 3.0))
    assert out.values[..., 0] == pytest.approx(3.0)
    assert np.max(np.abs(out.values[..., 1:])) < 1e-9


def test_saab_rank_two_patches():
    rng = np.random.default_rng(1)
    u = rng.normal(size=12)
    u -= u.mean()
    v = rng.normal(size=12)
    v -= v.mean()
    v -= v @ u / (u @ u) * u
    patches = (rng.normal(size=(200, 1)) * u
               + rng.normal(size=(200, 1)) * v
               + rng.normal(size=(200, 1)))  # arbitrary DC offsets
    kernel = fit_saab(patches, num_ac=5)
    assert np.all(kernel.ac_variance[:2] > 0.1)
    assert np.max(kernel.ac_variance[2:]) < 1e-12 * kernel.ac_variance[0]


def test_saab_matches_direct_eigendecomposition():
    """Oracle: eigh of the full-dimension covariance of mean-removed patches.

    Removing each patch's mean puts the rows in the subspace orthogonal to
    the constant vector, so the full covariance has the same leading
    eigenpairs the kernel finds inside that subspace.
    """
    rng = np.random.default_rng(2)
    patches = rng.normal(size=(1000, 48)) @ rng.normal(size=(48, 48))
    kernel = fit_saab(patches, num_ac=10, patch_shape=(48,))

    centered = patches - patches.mean(axis=1, keepdims=True)
    diff = centered - centered.mean(axis=0)
    cov = diff.T @ diff / (diff.shape[0] - 1)
    eigval, eigvec = np.linalg.eigh(cov)
    order = np.argsort(eigval)[::-1][:10]
    assert np.allclose(kernel.ac_variance, eigval[order], rtol=1e-9)
    for i, col in enumerate(order):
        dot = abs(kernel.ac_basis[i] @ eigvec[:, col])
        assert dot == pytest.approx(1.0, abs=1e-9)


def test_saab_basis_orthonormal_and_mean_free():
    rng = np.random.default_rng(3)
    kernel = fit_saab(rng.normal(size=(300, 27)), num_ac=26, patch_shape=(27,))
    gram = kernel.ac_basis @ kernel.ac_basis.T
    assert np.max(np.abs(gram - np.eye(26))) < 1e-9
    assert np.max(np.abs(kernel.ac_basis.sum(axis=1))) < 1e-9
    # sign convention: largest-magnitude entry of every row is positive
    peak = kernel.ac_basis[np.arange(26),
                           np.argmax(np.abs(kernel.ac_basis), axis=1)]
    assert np.all(peak > 0)


def test_saab_full_rank_reconstruction():
    rng = np.random.default_rng(4)
    patches = rng.uniform(0, 255, (64, 16))
    kernel = fit_saab(patches, num_ac=15, patch_shape=(4, 4), stride=(4, 4))
    tensor = patches.reshape(8, 8, 4, 4).transpose(0, 2, 1, 3).reshape(32, 32)
    out = apply_saab(kernel, tensor).values.reshape(-1, 16)
    rebuilt = out[:, :1] + out[:, 1:] @ kernel.ac_basis
    grid, flat = sliding_patches(tensor[..., None], (4, 4), (4, 4))
    assert grid == (8, 8)
    assert np.max(np.abs(rebuilt - flat)) < 1e-6


def test_saab_ac_outputs_decorrelated():
    rng = np.random.default_rng(5)
    patches = rng.normal(size=(500, 12)) * np.linspace(1, 4, 12)
    kernel = fit_saab(patches, num_ac=8)
    ac = patches @ kernel.ac_basis.T
    cov = np.cov(ac, rowvar=False)
    off = cov - np.diag(np.diag(cov))
    assert np.max(np.abs(off)) < 1e-6 * np.max(np.diag(cov))
    assert np.allclose(np.diag(cov), kernel.ac_variance, rtol=1e-9)


def test_saab_grid_geometry():
    rng = np.random.default_rng(6)
    flat = rng.normal(size=(600, 16))
    kernel = fit_saab(flat, num_ac=15, patch_shape=(4, 4), stride=(2, 2))
    out = apply_saab(kernel, rng.normal(size=(40, 40)))
    assert out.values.shape == (19, 19, 16)

    grid, vol_patches = sliding_patches(rng.normal(size=(96, 96, 15))[..., None],
                                        (8, 8, 3), (8, 8, 3))
    assert grid == (12, 12, 5)
    assert vol_patches.shape == (720, 192)
    vol_kernel = fit_saab(vol_patches, num_ac=191, patch_shape=(8, 8, 3),
                          stride=(8, 8, 3))
    vol_out = apply_saab(vol_kernel, rng.normal(size=(96, 96, 15)))
    assert vol_out.values.shape == (12, 12, 5, 192)


def test_saab_fit_limits():
    rng = np.random.default_rng(7)
    with pytest.raises(FitError):
        fit_saab(rng.normal(size=(100, 16)), num_ac=16)  # only 15 AC dims
    with pytest.raises(FitError):
        fit_saab(rng.normal(size=(5, 16)), num_ac=8)  # too few patches
    with pytest.raises(ShapeError):
        fit_saab(rng.normal(size=(100, 16)), num_ac=4, patch_shape=(3, 3))


def test_pca_basics():
    rng = np.random.default_rng(8)
    x = rng.normal(size=(120, 6))
    basis = fit_pca(x, k=6)
    assert np.max(np.abs(apply_pca(basis, basis.mean))) < 1e-12
    coeff = apply_pca(basis, x)
    rebuilt = basis.mean + coeff @ basis.components
    assert np.max(np.abs(rebuilt - x)) < 1e-9

    t = rng.normal(size=(80, 1))
    direction = np.array([3.0, 4.0]) / 5.0
    line = t * direction + np.array([1.0, -2.0])
    line_basis = fit_pca(line, k=1)
    assert line_basis.explained_variance[0] == pytest.approx(
        np.var(t, ddof=1), rel=1e-9)
    assert abs(line_basis.components[0] @ direction) == pytest.approx(1.0)

    with pytest.raises(ShapeError):
        fit_pca(x, k=7)
    with pytest.raises(FitError):
        fit_pca(x[:1], k=2)


def test_streaming_pca_matches_batch_fit():
    rng = np.random.default_rng(9)
    x = rng.normal(size=(400, 10)) * np.linspace(0.5, 3, 10) + rng.normal(size=10)
    batch = fit_pca(x, k=10)
    stream = StreamingPca(dim=10)
    for start in range(0, 400, 64):
        stream.add(x[start:start + 64])
    merged = stream.finalize(k=10)
    assert np.allclose(merged.mean, batch.mean, atol=1e-9)
    assert np.allclose(merged.explained_variance, batch.explained_variance,
                       rtol=1e-8)
    assert np.allclose(merged.components, batch.components, atol=1e-7)

    with pytest.raises(FitError):
        StreamingPca(dim=3).finalize(k=1)


def test_abs_max_pool():
    single = abs_max_pool(np.array([[-5.0, 1.0], [2.0, 3.0]])[..., None], (2, 2))
    assert single.values.reshape(()) == 5.0

    rng = np.random.default_rng(10)
    tensor = ChannelTensor(values=rng.normal(size=(40, 40, 45)),
                           frequency_band="high")
    pooled = abs_max_pool(tensor, (2, 2))
    assert pooled.values.shape == (20, 20, 45)
    assert pooled.frequency_band == "high"
    assert pooled.values[0, 0, 0] == np.max(np.abs(tensor.values[:2, :2, 0]))

    with pytest.raises(ShapeError):
        abs_max_pool(np.zeros((5, 4, 3)), (2, 2))


def test_channel_std():
    assert np.all(channel_std(np.full((7, 7, 3), 9.0)) == 0.0)
    two_level = np.zeros((4, 2))
    two_level[::2] = 2.0  # half zeros, half twos -> population std 1
    assert np.allclose(channel_std(two_level), 1.0)

    rng = np.random.default_rng(11)
    tensor = rng.normal(size=(9, 9, 13))
    flat = tensor.reshape(-1, 13)
    oracle = np.sqrt(((flat - flat.mean(axis=0)) ** 2).mean(axis=0))
    assert np.allclose(channel_std(tensor), oracle, atol=1e-9)
