import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sdfguard.tensor_core import as_image, as_mask, frobenius_norm, linf_distance, to_grayscale

finite = st.floats(-10, 10, allow_nan=False)


def test_frobenius_zero_and_ones():
    assert frobenius_norm(np.zeros((4, 4, 1))) == 0.0
    assert frobenius_norm(np.ones((2, 2, 1))) == 2.0


def test_frobenius_matches_loop_sum():
    img = np.random.default_rng(0).uniform(size=(8, 8, 3))
    total = 0.0
    for i in range(8):
        for j in range(8):
            for c in range(3):
                total += img[i, j, c] ** 2
    assert abs(frobenius_norm(img) - np.sqrt(total)) <= 1e-12


@given(arrays(np.float64, (5, 4, 3), elements=finite), finite)
def test_frobenius_homogeneous(img, c):
    assert np.isclose(frobenius_norm(c * img), abs(c) * frobenius_norm(img), rtol=1e-12, atol=1e-12)


def test_grayscale_identity_for_one_channel():
    field = np.random.default_rng(1).uniform(size=(6, 5, 1))
    np.testing.assert_array_equal(to_grayscale(field), field[:, :, 0])


def test_grayscale_weights():
    assert np.isclose(to_grayscale(np.full((1, 1, 3), 0.37))[0, 0], 0.37, atol=1e-15)
    assert to_grayscale(np.array([[[1.0, 0.0, 0.0]]]))[0, 0] == pytest.approx(0.299, abs=1e-15)


@given(arrays(np.float64, (4, 4, 3), elements=st.floats(0, 1)))
def test_grayscale_is_convex_combination(img):
    g = to_grayscale(img)
    assert np.all(g >= img.min(axis=2) - 1e-12)
    assert np.all(g <= img.max(axis=2) + 1e-12)


def test_grayscale_rejects_two_channels():
    with pytest.raises(ValueError):
        to_grayscale(np.zeros((3, 3, 2)))


def test_linf_basics():
    rng = np.random.default_rng(2)
    a = rng.uniform(size=(7, 3, 1))
    assert linf_distance(a, a) == 0.0
    assert linf_distance(a, a + 0.25) == pytest.approx(0.25, abs=1e-15)
    b = rng.uniform(size=a.shape)
    worst = 0.0
    for idx in np.ndindex(a.shape):
        worst = max(worst, abs(a[idx] - b[idx]))
    assert linf_distance(a, b) == worst
    with pytest.raises(ValueError):
        linf_distance(a, b[:2])


@settings(max_examples=50)
@given(st.integers(0, 2**31 - 1))
def test_linf_metric_axioms(seed):
    rng = np.random.default_rng(seed)
    a, b, c = rng.normal(size=(3, 4, 4, 1))
    assert linf_distance(a, b) == linf_distance(b, a)
    assert linf_distance(a, c) <= linf_distance(a, b) + linf_distance(b, c) + 1e-15


def test_validation():
    assert as_image(np.zeros((3, 2))).shape == (3, 2, 1)
    with pytest.raises(ValueError):
        as_image(np.array([[[np.nan]]]))
    with pytest.raises(ValueError):
        as_mask(np.array([[0, 2]]))
    assert as_mask(np.array([[True, False]])).dtype == np.uint8
