import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from localbin import (
    BinaryImage,
    GrayImage,
    MalformedHeaderError,
    TruncatedDataError,
    UnsupportedMaxvalError,
    read_pgm,
    write_pbm,
    write_pgm,
)


def test_p5_two_by_two():
    img = read_pgm(b"P5 2 2 255\n" + bytes([0, 255, 128, 64]))
    assert img.shape == (2, 2)
    assert img.pixels.tolist() == [[0, 255], [128, 64]]


def test_p5_single_pixel():
    img = read_pgm(b"P5 1 1 255\n" + bytes([7]))
    assert img.pixels.tolist() == [[7]]


def test_truncated_data():
    with pytest.raises(TruncatedDataError):
        read_pgm(b"P5 3 3 255\n" + bytes(8))


def test_maxval_too_large():
    with pytest.raises(UnsupportedMaxvalError):
        read_pgm(b"P5 1 1 65535\n" + bytes(2))


@pytest.mark.parametrize("data", [b"P6 1 1 255\n\x00", b"P5 x 1 255\n\x00", b"P5 1", b"P5 0 1 255\n", b"P"])
def test_malformed_header(data):
    with pytest.raises(MalformedHeaderError):
        read_pgm(data)


def test_errors_are_distinct():
    assert len({MalformedHeaderError, TruncatedDataError, UnsupportedMaxvalError}) == 3
    assert not issubclass(TruncatedDataError, MalformedHeaderError)


def test_header_comments():
    data = b"P5\n# made by hand\n2 # width\n1\n# maxval next\n255\n" + bytes([3, 4])
    assert read_pgm(data).pixels.tolist() == [[3, 4]]


def test_ascii_pgm():
    data = b"P2\n# comment\n3 2\n15\n0 1 2\n3 4 15\n"
    assert read_pgm(data).pixels.tolist() == [[0, 1, 2], [3, 4, 15]]


def test_ascii_sample_above_maxval():
    with pytest.raises(MalformedHeaderError):
        read_pgm(b"P2 1 1 10\n11\n")


def test_p5_data_may_start_with_whitespace_byte():
    img = read_pgm(b"P5 2 1 255\n" + bytes([10, 32]))
    assert img.pixels.tolist() == [[10, 32]]


def test_pbm_single_foreground():
    assert write_pbm(BinaryImage(np.array([[0]]))) == b"P4\n1 1\n" + bytes([0b10000000])


def test_pbm_all_background_row():
    assert write_pbm(BinaryImage(np.ones((1, 8), np.uint8))) == b"P4\n8 1\n" + bytes([0])


def test_pbm_diagonal():
    data = write_pbm(BinaryImage(np.array([[0, 1], [1, 0]])))
    assert data == b"P4\n2 2\n" + bytes([0x80, 0x40])


def test_pbm_row_padding():
    labels = np.ones((2, 9), np.uint8)
    labels[:, 8] = 0
    data = write_pbm(BinaryImage(labels))
    assert data.endswith(bytes([0x00, 0x80, 0x00, 0x80]))


def test_images_are_immutable():
    img = GrayImage(np.zeros((2, 2), np.uint8))
    with pytest.raises(ValueError):
        img.pixels[0, 0] = 1


@pytest.mark.parametrize("bad", [np.zeros((0, 3)), np.zeros(4), np.array([[256]]), np.array([[-1]])])
def test_gray_image_validation(bad):
    with pytest.raises(ValueError):
        GrayImage(bad)


@settings(max_examples=60, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 20), st.integers(1, 20))))
def test_pgm_round_trip(pixels):
    img = GrayImage(pixels)
    decoded = read_pgm(write_pgm(img))
    assert decoded == img
    assert decoded.pixels.dtype == np.uint8
