import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import disk_mask, random_mask
from sdfguard.shape_encoding import connected_components, encode_contour, encode_edge, encode_skeleton
from sdfguard.shape_encoding.encoders import canny_thresholds, normalized_gradient


def test_edge_constant_image():
    assert not encode_edge(np.full((8, 8, 1), 0.4)).any()


def test_edge_vertical_step_is_one_pixel_wide():
    img = np.zeros((12, 12, 1))
    img[:, 6:] = 1.0
    edges = encode_edge(img)
    cols = np.nonzero(edges.any(axis=0))[0]
    assert len(cols) == 1
    assert edges[:, cols[0]].all()


def test_edges_exceed_low_threshold():
    rng = np.random.default_rng(0)
    img = np.clip(disk_mask(24, 24, 12, 12, 7)[:, :, None] * 0.6 + rng.uniform(0, 0.2, (24, 24, 1)), 0, 1)
    edges = encode_edge(img)
    _, _, mag = normalized_gradient(img)
    low, _ = canny_thresholds(mag)
    assert edges.any()
    assert np.all(mag[edges == 1] > low)


def test_contour_of_square():
    mask = np.zeros((7, 7), dtype=np.uint8)
    mask[2:5, 2:5] = 1
    contour = encode_contour(mask)
    assert contour.sum() == 8 and contour[3, 3] == 0


def test_contour_interior_and_border():
    mask = np.ones((9, 9), dtype=np.uint8)
    contour = encode_contour(mask)
    assert not contour[1:-1, 1:-1].any()
    assert contour[0].all()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_contour_and_skeleton_subsets(seed):
    mask = random_mask(np.random.default_rng(seed), 12, 12)
    assert np.all(encode_contour(mask) <= mask)
    skeleton = encode_skeleton(mask)
    assert np.all(skeleton <= mask)
    np.testing.assert_array_equal(encode_skeleton(mask), skeleton)


def test_skeleton_line_unchanged():
    mask = np.zeros((5, 9), dtype=np.uint8)
    mask[2, 1:8] = 1
    np.testing.assert_array_equal(encode_skeleton(mask), mask)


def test_skeleton_of_disk_stays_connected():
    mask = disk_mask(25, 25, 12, 12, 9)
    skeleton = encode_skeleton(mask)
    assert 0 < skeleton.sum() < mask.sum() / 4
    assert connected_components(skeleton.astype(np.uint8)).component_count == 1
