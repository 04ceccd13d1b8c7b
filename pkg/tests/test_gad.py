import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import central_difference, conv3x3_loops
from sdfguard.gad import (
    VARIANTS,
    DegenerateNormalizationError,
    GadConfig,
    apply_gad,
    apply_gad_vjp,
    gad_net,
    sample_gad,
)
from sdfguard.tensor_core import frobenius_norm


def _params(seed, channels, variant, h=8, w=12):
    return sample_gad(seed, channels, variant, height=h, width=w)


def test_sampling_is_seeded():
    a, b = _params(3, 3, "convolution"), _params(3, 3, "convolution")
    assert np.array_equal(a.layer1, b.layer1) and np.array_equal(a.layer2, b.layer2) and a.alpha == b.alpha
    c = _params(4, 3, "convolution")
    assert not np.array_equal(a.layer1, c.layer1)
    assert a.layer1.shape == (3, 3, 3, 2) and a.layer2.shape == (3, 3, 2, 3)
    assert 0.0 <= a.alpha <= 1.0


def test_weight_statistics():
    draws = np.concatenate([
        np.concatenate([p.layer1.ravel(), p.layer2.ravel()])
        for p in (sample_gad(s, 3, "convolution") for s in range(1000))
    ])
    n = draws.size
    assert n >= 100_000
    assert abs(draws.mean()) < 3 / np.sqrt(n)
    assert abs(draws.std() - 1.0) < 3 * np.sqrt(2 / n)


def test_zero_image_fixed_point():
    p = _params(0, 3, "convolution")
    assert not gad_net(np.zeros((8, 12, 3)), p).any()
    for variant in VARIANTS:
        assert not apply_gad(np.zeros((8, 12, 3)), _params(1, 3, variant)).any()


def test_convolution_matches_loop_oracle():
    rng = np.random.default_rng(0)
    img = rng.uniform(size=(6, 7, 3))
    p = _params(5, 3, "convolution")
    hidden = conv3x3_loops(img, p.layer1, "edge")
    hidden = np.where(hidden > 0, hidden, 0.01 * hidden)
    expected = conv3x3_loops(hidden, p.layer2, "edge")
    assert np.max(np.abs(gad_net(img, p) - expected)) <= 1e-10


@pytest.mark.parametrize("variant", VARIANTS)
def test_shape_contract(variant):
    img = np.random.default_rng(1).uniform(size=(8, 12, 3))
    assert gad_net(img, _params(2, 3, variant)).shape == img.shape
    assert apply_gad(img, _params(2, 3, variant)).shape == img.shape


def test_alpha_zero_is_identity():
    img = np.random.default_rng(2).uniform(size=(8, 12, 1))
    for variant in VARIANTS:
        p = _params(0, 1, variant)
        p = type(p)(p.variant, p.layer1, p.layer2, 0.0, p.leaky_slope, p.seed)
        np.testing.assert_array_equal(apply_gad(img, p), img)


@pytest.mark.parametrize("variant", VARIANTS)
def test_norm_preserved(variant):
    rng = np.random.default_rng(3)
    for seed in range(25):
        img = rng.uniform(size=(8, 12, 3))
        out = apply_gad(img, _params(seed, 3, variant))
        assert abs(frobenius_norm(out) - frobenius_norm(img)) <= 1e-9 * frobenius_norm(img)


def test_batch_matches_single():
    rng = np.random.default_rng(4)
    imgs = rng.uniform(size=(3, 8, 12, 1))
    p = _params(9, 1, "convolution")
    batch = apply_gad(imgs, p)
    for i in range(3):
        np.testing.assert_allclose(batch[i], apply_gad(imgs[i], p), rtol=1e-13, atol=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 100.0), st.integers(0, 1000))
def test_positive_homogeneity(c, seed):
    img = np.random.default_rng(seed).uniform(size=(6, 6, 1))
    p = _params(seed, 1, "convolution", 6, 6)
    np.testing.assert_allclose(gad_net(c * img, p), c * gad_net(img, p), rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(apply_gad(c * img, p), c * apply_gad(img, p), rtol=1e-10, atol=1e-12)


def test_degenerate_normalization():
    img = np.ones((4, 4, 1))
    p = sample_gad(0, 1, "linear", height=4, width=4)
    # a net that exactly cancels the identity term at alpha = 0.5
    p = type(p)("linear", -np.eye(4), np.eye(4), 0.5, 0.01, 0)
    with pytest.raises(DegenerateNormalizationError):
        apply_gad(img, p)


@pytest.mark.parametrize("variant", VARIANTS)
def test_vjp_matches_finite_differences(variant):
    rng = np.random.default_rng(5)
    img = rng.uniform(0.1, 1.0, size=(5, 6, 2))
    p = sample_gad(11, 2, variant, height=5, width=6)
    g = rng.normal(size=img.shape)
    analytic = apply_gad_vjp(img, p, g)
    numeric = central_difference(lambda x: float(np.sum(g * apply_gad(x, p))), img)
    rel = np.abs(analytic - numeric) / np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
    assert np.max(rel) <= 1e-4


def test_config_validation():
    with pytest.raises(ValueError):
        GadConfig(variant="mlp")
    with pytest.raises(ValueError):
        sample_gad(0, 1, "linear")
    with pytest.raises(ValueError):
        gad_net(np.zeros((8, 12, 1)), _params(0, 3, "convolution"))
