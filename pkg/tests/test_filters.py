import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import conv2d_same, exhaustive_otsu
from sdfguard.shape_encoding import DegenerateHistogramError, binarize, gaussian_blur, otsu_threshold
from sdfguard.shape_encoding.filters import gaussian_kernel


def test_kernel_radius_and_mass():
    k = gaussian_kernel(1.2)
    assert len(k) == 2 * int(np.ceil(3 * 1.2)) + 1
    assert abs(k.sum() - 1.0) <= 1e-15


def test_blur_constant_field():
    out = gaussian_blur(np.full((9, 11), 0.3), 1.5)
    assert np.max(np.abs(out - 0.3)) <= 1e-12


def test_blur_impulse_center_weight():
    field = np.zeros((31, 31))
    field[15, 15] = 1.0
    k = gaussian_kernel(2.0)
    assert gaussian_blur(field, 2.0)[15, 15] == pytest.approx(np.outer(k, k)[len(k) // 2, len(k) // 2],
                                                              abs=1e-15)


@pytest.mark.parametrize("sigma", [0.5, 1.0, 1.7])
def test_blur_matches_2d_convolution(sigma):
    field = np.random.default_rng(0).uniform(size=(16, 16))
    k = gaussian_kernel(sigma)
    expected = conv2d_same(field, np.outer(k, k))
    assert np.max(np.abs(gaussian_blur(field, sigma) - expected)) <= 1e-10


def test_otsu_bimodal_fixture():
    field = np.full((8, 8), 0.2)
    field[:, 4:] = 0.8
    t = otsu_threshold(field)
    assert 0.2 < t < 0.8
    assert binarize(field, t).sum() == 32
    assert t == exhaustive_otsu(field)


def test_otsu_matches_exhaustive_search():
    rng = np.random.default_rng(1)
    for _ in range(30):
        field = rng.beta(rng.uniform(0.3, 3), rng.uniform(0.3, 3), size=(12, 12))
        assert otsu_threshold(field) == exhaustive_otsu(field)


def test_otsu_tie_takes_lowest_bin():
    # two values with empty bins between them: every split in the gap ties
    field = np.array([[0.1, 0.9]])
    k_low = int(0.1 * 256)
    assert otsu_threshold(field) == (k_low + 0.5) / 256


def test_otsu_constant_is_degenerate():
    with pytest.raises(DegenerateHistogramError):
        otsu_threshold(np.full((4, 4), 0.5))


def test_otsu_rejects_out_of_range():
    with pytest.raises(ValueError):
        otsu_threshold(np.array([[0.0, 1.5]]))


def test_binarize_extremes_and_scan():
    field = np.random.default_rng(2).uniform(size=(6, 6))
    assert binarize(field, field.min() - 1).all()
    assert not binarize(field, field.max()).any()
    t = 0.4
    expected = [[1 if v > t else 0 for v in row] for row in field]
    np.testing.assert_array_equal(binarize(field, t), expected)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (6, 7), elements=st.floats(0, 1)))
def test_otsu_property(field):
    expected = exhaustive_otsu(field)
    if expected is None:
        with pytest.raises(DegenerateHistogramError):
            otsu_threshold(field)
    else:
        assert otsu_threshold(field) == expected
