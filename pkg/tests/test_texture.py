import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import brute_similarity
from spatial_mc.checker import CheckError, Checker
from spatial_mc.formula import Atom, Scmp, ScmpParams
from spatial_mc.grid import VoxelGrid, make_model
from spatial_mc.texture import (Histogram, TextureError, cross_correlation, region_histogram,
                                scmp_mask, similarity_field, window_histogram)


def grid1d(*values):
    return VoxelGrid((len(values),), attributes={"v": values})


def test_region_histogram_half_open_bins():
    h = region_histogram(grid1d(0, 0.5, 1), "v", np.ones(3, bool), 2, 0, 1)
    assert h.counts == (1, 2)


def test_region_histogram_binning_per_rule():
    # [0, 0.5) -> bin 0, [0.5, 1] -> bin 1
    g = grid1d(0, 0.49, 0.5, 1.0)
    assert region_histogram(g, "v", np.ones(4, bool), 2, 0, 1).counts == (2, 2)


def test_single_point_region():
    h = region_histogram(grid1d(0.3, 0.9), "v", np.array([False, True]), 4, 0, 1)
    assert h.counts == (0, 0, 0, 1)


def test_out_of_range_clamped():
    h = region_histogram(grid1d(2.0, -5.0), "v", np.ones(2, bool), 4, 0, 1)
    assert h.counts == (1, 0, 0, 1)


def test_empty_region_rejected():
    with pytest.raises(TextureError):
        region_histogram(grid1d(1, 2), "v", np.zeros(2, bool), 4, 0, 1)


def test_window_sizes():
    g = VoxelGrid((6, 6), attributes={"v": np.arange(36.0)})
    assert window_histogram(g, "v", (3, 3), 1, 4, 0, 36).total == 9
    assert window_histogram(g, "v", (0, 0), 1, 4, 0, 36).total == 4
    assert window_histogram(g, "v", (2, 3), 2, 4, 0, 36).total == 25


def test_window_constant_image():
    g = VoxelGrid((5, 5), attributes={"v": np.full(25, 7.0)})
    h = window_histogram(g, "v", (2, 2), 1, 5, 0, 10)
    assert h.counts == (0, 0, 0, 9, 0)


def test_window_radius_must_be_positive():
    with pytest.raises(TextureError):
        window_histogram(grid1d(1, 2), "v", (0,), 0, 2, 0, 1)


def H(*counts, vmin=0.0, vmax=1.0):
    return Histogram(len(counts), vmin, vmax, tuple(counts))


def test_correlation_examples():
    assert cross_correlation(H(1, 4, 2, 0), H(1, 4, 2, 0)) == 1.0
    assert cross_correlation(H(2, 8, 4, 0), H(1, 4, 2, 0)) == 1.0
    assert cross_correlation(H(1, 0), H(0, 1)) == pytest.approx(-1.0)
    assert cross_correlation(H(3, 3, 3), H(1, 5, 0)) == 0.0
    assert cross_correlation(H(3, 3, 3), H(2, 2, 2)) == 1.0


def test_correlation_incompatible():
    with pytest.raises(TextureError):
        cross_correlation(H(1, 2), H(1, 2, 3))
    with pytest.raises(TextureError):
        cross_correlation(H(1, 2), H(1, 2, vmax=2.0))


counts = st.lists(st.integers(0, 20), min_size=4, max_size=4).filter(lambda c: sum(c) > 0)


@settings(max_examples=200, deadline=None)
@given(counts, counts)
def test_correlation_symmetric_and_bounded(ca, cb):
    a, b = H(*ca), H(*cb)
    r = cross_correlation(a, b)
    assert -1.0 <= r <= 1.0
    assert r == cross_correlation(b, a)


def test_similarity_field_matches_oracle(rng):
    values = rng.integers(0, 10, (9, 7)).astype(float)
    g = VoxelGrid(values.shape, attributes={"v": values})
    ref_mask = np.zeros(values.shape, bool)
    ref_mask[2:5, 1:4] = True
    ref = region_histogram(g, "v", ref_mask, 5, 0, 10)
    np.testing.assert_allclose(similarity_field(values, ref, 2),
                               brute_similarity(values, list(ref.counts), 2, 5, 0, 10), atol=1e-12)


def test_similarity_field_3d_matches_oracle(rng):
    values = rng.normal(size=(5, 6, 4))
    g = VoxelGrid(values.shape, attributes={"v": values})
    ref = region_histogram(g, "v", values > 0.5, 6, -2, 2)
    np.testing.assert_allclose(similarity_field(values, ref, 1),
                               brute_similarity(values, list(ref.counts), 1, 6, -2, 2), atol=1e-12)


def scmp(threshold, radius, nbins, vmin, vmax, attr, sa):
    return Scmp(ScmpParams(threshold, radius, nbins, vmin, vmax, attr), sa)


def test_scmp_constant_image_threshold_one():
    m = make_model(np.full((6, 6), 3.0))
    sa = Atom("intensity", "=", 3)
    assert Checker(m).check(scmp(1.0, 1, 8, 0, 10, "intensity", sa)).all()


def test_scmp_threshold_minus_one(rng):
    m = make_model(rng.random((8, 8)))
    assert Checker(m).check(scmp(-1.0, 2, 4, 0, 1, "intensity", Atom("intensity", ">", 0.5))).all()


def two_texture():
    values = np.full((16, 16), 0.5)
    xs, ys = np.indices((8, 16))
    values[:8] = (xs + ys) % 2  # checkerboard of 0 and 1 in the left half
    return values


def test_scmp_two_textures():
    values = two_texture()
    left = np.zeros(values.shape, bool)
    left[:8] = True
    g = VoxelGrid(values.shape, attributes={"v": values})
    ref = region_histogram(g, "v", left, 4, 0, 1)
    expected = brute_similarity(values, list(ref.counts), 2, 4, 0, 1) >= 0.9
    # left interior (windows fully inside the left half) is in, right interior is out
    assert expected[2:6, 2:14].all()
    assert not expected[10:, :].any()
    got = scmp_mask(g, "v", left, 0.9, 2, 4, 0, 1)
    assert np.array_equal(got, expected)


def test_scmp_empty_reference_names_subformula():
    m = make_model(np.zeros((4, 4)))
    with pytest.raises(CheckError, match="intensity > 5"):
        Checker(m).check(scmp(0.5, 1, 4, 0, 1, "intensity", Atom("intensity", ">", 5)))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31), st.floats(-1, 1), st.floats(-1, 1))
def test_scmp_monotone_in_threshold(seed, t1, t2):
    t1, t2 = sorted((t1, t2))
    r = np.random.default_rng(seed)
    values = r.integers(0, 6, (10, 10)).astype(float)
    g = VoxelGrid(values.shape, attributes={"v": values})
    ref = values < 3
    ref[0, 0] = True
    lo = scmp_mask(g, "v", ref, t1, 1, 6, 0, 6)
    hi = scmp_mask(g, "v", ref, t2, 1, 6, 0, 6)
    assert np.all(hi <= lo)


def test_window_histogram_permutation_invariant(rng):
    values = rng.integers(0, 8, (7, 7)).astype(float)
    shuffled = values.copy()
    block = shuffled[1:6, 1:6].ravel()
    rng.shuffle(block)
    shuffled[1:6, 1:6] = block.reshape(5, 5)
    g1 = VoxelGrid(values.shape, attributes={"v": values})
    g2 = VoxelGrid(values.shape, attributes={"v": shuffled})
    assert window_histogram(g1, "v", (3, 3), 2, 8, 0, 8) == window_histogram(g2, "v", (3, 3), 2, 8, 0, 8)
    region = np.zeros((7, 7), bool)
    region[1:6, 1:6] = True
    assert region_histogram(g1, "v", region, 8, 0, 8) == region_histogram(g2, "v", region, 8, 0, 8)


def test_scmp_rotation_stable(rng):
    radius = 2
    values = rng.integers(0, 5, (20, 20)).astype(float)
    ref = np.zeros(values.shape, bool)
    ref[3:9, 4:12] = True
    g = VoxelGrid(values.shape, attributes={"v": values})
    gr = VoxelGrid(values.shape, attributes={"v": np.rot90(values)})
    mask = scmp_mask(g, "v", ref, 0.3, radius, 5, 0, 5)
    mask_rot = scmp_mask(gr, "v", np.rot90(ref), 0.3, radius, 5, 0, 5)
    inner = (slice(radius, -radius), slice(radius, -radius))
    assert np.array_equal(np.rot90(mask)[inner], mask_rot[inner])
    assert mask.any() and not mask.all()
