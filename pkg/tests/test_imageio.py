import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sdfguard.imageio import (
    PnmError,
    field_to_pnm,
    load_pnm,
    read_field_csv,
    read_pnm,
    save_pnm,
    write_field_csv,
    write_pnm,
)


def test_read_pgm_endpoints():
    img = read_pnm(b"P5\n2 1\n255\n" + bytes([0, 255]))
    assert img.shape == (1, 2, 1)
    np.testing.assert_array_equal(img[0, :, 0], [0.0, 1.0])


def test_read_ppm_pixel():
    img = read_pnm(b"P6\n1 1\n255\n" + bytes([255, 0, 0]))
    np.testing.assert_array_equal(img, [[[1.0, 0.0, 0.0]]])


def test_write_mirrors_read():
    assert write_pnm(np.array([[[0.0], [1.0]]])) == b"P5\n2 1\n255\n" + bytes([0, 255])
    assert write_pnm(np.array([[[1.0, 0.0, 0.0]]])) == b"P6\n1 1\n255\n" + bytes([255, 0, 0])


@given(st.integers(1, 9), st.integers(1, 9), st.sampled_from([1, 3]), st.integers(0, 2**32 - 1))
def test_bytes_round_trip(h, w, c, seed):
    raw = np.random.default_rng(seed).integers(0, 256, size=h * w * c, dtype=np.uint8).tobytes()
    magic = b"P5" if c == 1 else b"P6"
    data = magic + f"\n{w} {h}\n255\n".encode() + raw
    assert write_pnm(read_pnm(data)) == data


def test_write_quantizes_to_nearest_level():
    img = np.random.default_rng(3).uniform(size=(5, 4, 3))
    back = read_pnm(write_pnm(img))
    assert np.max(np.abs(back - img)) <= 0.5 / 255 + 1e-12


def test_header_comments_are_skipped():
    img = read_pnm(b"P5 # a comment\n# another\n2 # width then height\n1\n255\n" + bytes([10, 20]))
    np.testing.assert_array_equal(img[0, :, 0] * 255, [10, 20])


@pytest.mark.parametrize("data", [
    b"P2\n1 1\n255\n0",
    b"P5\n2 2\n255\n" + bytes(3),
    b"P5\n1 1\n65535\n" + bytes(2),
    b"P5\nx 1\n255\n" + bytes(1),
    b"P5\n1",
])
def test_malformed_inputs(data):
    with pytest.raises(PnmError):
        read_pnm(data)


def test_write_rejects_out_of_range():
    with pytest.raises(ValueError):
        write_pnm(np.full((1, 1, 1), 1.2))


def test_file_helpers(tmp_path):
    img = np.array([[[0.0], [1.0]]])
    save_pnm(tmp_path / "a.pgm", img)
    np.testing.assert_array_equal(load_pnm(tmp_path / "a.pgm"), img)


def test_field_csv_shapes():
    assert write_field_csv(np.array([[0.5]])) == "0.5\n"
    text = write_field_csv(np.eye(2))
    lines = text.strip().split("\n")
    assert len(lines) == 2 and all(len(line.split(",")) == 2 for line in lines)


def test_field_csv_round_trip():
    field = np.random.default_rng(4).normal(size=(7, 5)) * 1e3
    back = read_field_csv(write_field_csv(field))
    assert np.max(np.abs(back - field)) <= 1e-9


def test_field_csv_locale_free():
    text = write_field_csv(np.array([[12345.678, -0.001]]))
    assert text == "12345.678,-0.001\n"


def test_field_to_pnm():
    np.testing.assert_array_equal(field_to_pnm(np.full((3, 3), 7.0)), np.full((3, 3, 1), 0.5))
    vis = field_to_pnm(np.array([[-2.0, 0.0, 2.0]]))
    np.testing.assert_allclose(vis[0, :, 0], [0.0, 0.5, 1.0])
    rnd = field_to_pnm(np.random.default_rng(5).normal(size=(6, 6)))
    assert rnd.min() == 0.0 and rnd.max() == 1.0
