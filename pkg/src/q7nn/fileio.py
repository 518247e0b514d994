"""Binary file formats for inputs and activation tables.

Input image: an 8-byte header of four little-endian int16 fields
(height, width, channels, frac_bits) followed by H*W*C raw q7 bytes in
HWC order.

Activation table blob: a 16-byte header of four little-endian uint32
fields (function id, mode id, range_pow, total entries) followed by the
entries as little-endian q7 or q15 values (two-region tables store the
inner half first).  The element width is implied by the payload size.
"""

from __future__ import annotations

import numpy as np

from .kernels.act import FUNCS, MODES, LutTable
from .tensor import QTensor

_FUNC_IDS = {name: i for i, name in enumerate(sorted(FUNCS))}
_MODE_IDS = {name: i for i, name in enumerate(MODES)}

IMAGE_HEADER_BYTES = 8
TABLE_HEADER_BYTES = 16


class FileFormatError(ValueError):
    pass


def save_input_image(path, t: QTensor) -> None:
    if t.elem_width != 8:
        raise ValueError("input images are q7")
    header = np.array([t.height, t.width, t.channels, t.frac_bits],
                      dtype="<i2")
    with open(path, "wb") as fh:
        fh.write(header.tobytes())
        fh.write(t.data.astype(np.int8).tobytes())


def load_input_image(path) -> QTensor:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < IMAGE_HEADER_BYTES:
        raise FileFormatError("input file shorter than its header")
    h, w, c, frac = np.frombuffer(raw[:IMAGE_HEADER_BYTES], dtype="<i2")
    data = np.frombuffer(raw[IMAGE_HEADER_BYTES:], dtype=np.int8)
    expected = int(h) * int(w) * int(c)
    if data.size != expected:
        raise FileFormatError(
            f"input payload holds {data.size} bytes, header says {expected}")
    return QTensor(int(h), int(w), int(c), 8, int(frac), data.copy())


def save_lut_blob(path, table: LutTable) -> None:
    header = np.array([_FUNC_IDS[table.func], _MODE_IDS[table.mode],
                       table.range_pow, table.entries], dtype="<u4")
    payload = np.concatenate([t.reshape(-1) for t in table.tables])
    dtype = "<i1" if table.elem_width == 8 else "<i2"
    with open(path, "wb") as fh:
        fh.write(header.tobytes())
        fh.write(payload.astype(dtype).tobytes())


def load_lut_blob(path) -> LutTable:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < TABLE_HEADER_BYTES:
        raise FileFormatError("table file shorter than its header")
    func_id, mode_id, range_pow, entries = np.frombuffer(
        raw[:TABLE_HEADER_BYTES], dtype="<u4")
    funcs = {v: k for k, v in _FUNC_IDS.items()}
    modes = {v: k for k, v in _MODE_IDS.items()}
    if int(func_id) not in funcs or int(mode_id) not in modes:
        raise FileFormatError("unknown function or mode id")
    payload = raw[TABLE_HEADER_BYTES:]
    entries = int(entries)
    if entries <= 0 or len(payload) % entries:
        raise FileFormatError("payload size inconsistent with entry count")
    elem = len(payload) // entries
    if elem not in (1, 2):
        raise FileFormatError("element width must be 1 or 2 bytes")
    values = np.frombuffer(payload, dtype="<i1" if elem == 1 else "<i2")
    values = values.astype(np.int8 if elem == 1 else np.int16)
    mode = modes[int(mode_id)]
    if mode == "two_region":
        half = entries // 2
        tables = (values[:half].copy(), values[half:].copy())
    else:
        tables = (values.copy(),)
    return LutTable(funcs[int(func_id)], mode, int(range_pow), entries,
                    elem * 8, tables)
