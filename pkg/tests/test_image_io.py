import numpy as np
import pytest

from core import ImagePlane
from errors import ImageIOError, InvalidArgumentError
from image_io import decode_pnm, encode_pnm, read_image, write_image


def test_sixteen_bit_graymap(tmp_path, rng):
    image = ImagePlane(rng.uniform(size=(2, 3)))
    path = tmp_path / "pattern.pgm"
    write_image(path, image)
    assert path.read_bytes().startswith(b"P5\n3 2\n65535\n")
    np.testing.assert_allclose(read_image(path).values, image.values, atol=0.5 / 65535)


def test_eight_bit_pixmap(tmp_path, rng):
    image = ImagePlane(rng.uniform(size=(4, 5, 3)))
    path = tmp_path / "colour.ppm"
    write_image(path, image, bits=8)
    blob = path.read_bytes()
    assert blob.startswith(b"P6\n5 4\n255\n")
    assert len(blob) == len(b"P6\n5 4\n255\n") + 4 * 5 * 3
    loaded = read_image(path)
    assert loaded.channels == 3
    np.testing.assert_allclose(loaded.values, image.values, atol=0.5 / 255)


def test_values_are_clamped_when_written():
    blob = encode_pnm(ImagePlane(np.array([[-0.5, 1.5]])), bits=8)
    assert blob.endswith(bytes([0, 255]))


def test_header_comments_are_skipped():
    image = decode_pnm(b"P5\n# written by hand\n2 1\n255\n" + bytes([0, 255]))
    np.testing.assert_array_equal(image.values, [[0.0, 1.0]])


@pytest.mark.parametrize("blob", [
    b"P5\n2 2\n255\n\x00",
    b"P2\n2 1\n255\n0 255\n",
    b"P5\n2",
    b"P5\n0 1\n255\n",
])
def test_malformed_files(tmp_path, blob):
    path = tmp_path / "bad.pgm"
    path.write_bytes(blob)
    with pytest.raises(ImageIOError):
        read_image(path)


def test_missing_file(tmp_path):
    with pytest.raises(ImageIOError):
        read_image(tmp_path / "absent.pgm")


def test_bit_depth_is_checked(tmp_path):
    with pytest.raises(InvalidArgumentError):
        write_image(tmp_path / "x.pgm", ImagePlane(np.zeros((2, 2))), bits=12)


def test_other_formats_go_through_pygame(tmp_path):
    values = np.linspace(0.0, 1.0, 12).reshape(3, 4)
    path = tmp_path / "ramp.bmp"
    write_image(path, ImagePlane(values))
    loaded = read_image(path)
    assert loaded.channels == 1
    np.testing.assert_allclose(loaded.values, values, atol=0.5 / 255 + 1e-12)
