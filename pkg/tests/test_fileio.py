import numpy as np
import pytest

from q7nn import fileio
from q7nn.fileio import FileFormatError
from q7nn.kernels import activation_lut_apply, build_lut
from q7nn.tensor import QTensor

from conftest import rand_q7


def test_input_image_roundtrip(tmp_path, rng):
    t = QTensor(5, 7, 3, 8, 4, rand_q7(rng, 105))
    path = tmp_path / "img.bin"
    fileio.save_input_image(path, t)
    back = fileio.load_input_image(path)
    assert back.shape == t.shape
    assert back.frac_bits == t.frac_bits
    assert np.array_equal(back.data, t.data)
    # header is 4 little-endian int16 fields
    raw = open(path, "rb").read()
    assert len(raw) == 8 + 105
    assert list(np.frombuffer(raw[:8], dtype="<i2")) == [5, 7, 3, 4]


def test_input_image_size_mismatch(tmp_path, rng):
    t = QTensor(2, 2, 2, 8, 0, rand_q7(rng, 8))
    path = tmp_path / "img.bin"
    fileio.save_input_image(path, t)
    raw = open(path, "rb").read()
    open(path, "wb").write(raw[:-1])
    with pytest.raises(FileFormatError):
        fileio.load_input_image(path)


def test_lut_blob_roundtrip_all_modes(tmp_path, rng):
    for func in ("sigmoid", "tanh"):
        for mode in ("unified", "two_region"):
            for width in (8, 16):
                tab = build_lut(func, mode, 3, 128, width)
                path = tmp_path / f"{func}_{mode}_{width}.bin"
                fileio.save_lut_blob(path, tab)
                back = fileio.load_lut_blob(path)
                assert (back.func, back.mode, back.range_pow, back.entries,
                        back.elem_width) == (func, mode, 3, 128, width)
                assert all(np.array_equal(a, b)
                           for a, b in zip(tab.tables, back.tables))
                lim = 1 << (width - 1)
                buf = rng.integers(-lim, lim, 40).astype(
                    np.int8 if width == 8 else np.int16)
                assert np.array_equal(
                    activation_lut_apply(buf.copy(), tab),
                    activation_lut_apply(buf.copy(), back))


def test_lut_blob_truncated_header(tmp_path):
    path = tmp_path / "t.bin"
    open(path, "wb").write(b"\x00" * 7)
    with pytest.raises(FileFormatError):
        fileio.load_lut_blob(path)
