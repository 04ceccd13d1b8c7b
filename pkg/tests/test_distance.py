import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import brute_cross_distance, brute_edt, random_mask
from sdfguard.shape_encoding import compute_sdf, euclidean_distance_transform


def test_single_zero_corner():
    mask = np.ones((3, 3), dtype=np.uint8)
    mask[0, 0] = 0
    i, j = np.indices((3, 3))
    np.testing.assert_allclose(euclidean_distance_transform(mask), np.sqrt(i ** 2 + j ** 2), atol=1e-15)


def test_all_zero_mask():
    assert not euclidean_distance_transform(np.zeros((4, 5), dtype=np.uint8)).any()


def test_no_zero_pixel_is_an_error():
    with pytest.raises(ValueError):
        euclidean_distance_transform(np.ones((3, 3), dtype=np.uint8))


def test_random_masks_match_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(20):
        mask = random_mask(rng, rng.integers(1, 20), rng.integers(1, 20))
        if mask.all():
            continue
        assert np.max(np.abs(euclidean_distance_transform(mask) - brute_edt(mask))) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12)), elements=st.integers(0, 1)))
def test_edt_lipschitz(mask):
    if mask.all():
        return
    d = euclidean_distance_transform(mask)
    assert np.all(np.abs(np.diff(d, axis=0)) <= 1 + 1e-12)
    assert np.all(np.abs(np.diff(d, axis=1)) <= 1 + 1e-12)
    assert np.all(np.abs(d[1:, 1:] - d[:-1, :-1]) <= np.sqrt(2) + 1e-12)
    assert np.all(np.abs(d[1:, :-1] - d[:-1, 1:]) <= np.sqrt(2) + 1e-12)


def test_sdf_hand_example():
    np.testing.assert_array_equal(compute_sdf(np.array([[0, 1, 0]])), [[-1.0, 1.0, -1.0]])


def test_sdf_single_class_is_an_error():
    for value in (0, 1):
        with pytest.raises(ValueError):
            compute_sdf(np.full((3, 3), value, dtype=np.uint8))


@settings(max_examples=60, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 10), st.integers(2, 10)), elements=st.integers(0, 1)))
def test_sdf_sign_and_magnitude(mask):
    if mask.all() or not mask.any():
        return
    sdf = compute_sdf(mask)
    assert np.array_equal(sdf > 0, mask == 1)
    assert np.array_equal(sdf < 0, mask == 0)
    assert np.max(np.abs(np.abs(sdf) - brute_cross_distance(mask))) <= 1e-9
