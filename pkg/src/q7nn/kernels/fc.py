"""Fully-connected (matrix-vector) kernels for batch size one.

Three variants:

* ``fully_connected_q7_basic`` -- works as-is for any shape; the weight
  row is widened on the fly and consumed two columns at a time with the
  dual-MAC word op.
* ``fully_connected_q7_opt``   -- consumes weights reordered by
  ``weight_reorder_1x4`` so one streaming pointer feeds four output rows
  per pass.  Bit-identical to the basic kernel.
* ``fully_connected_mixed``    -- q15 activations with q7 weights that
  were byte-swap preprocessed; the no-reorder expansion restores the
  original column order.

Weight reordering layout (rows R, cols N, band = 4 consecutive rows):
for each band, each aligned 4-column group emits one 4-byte word per row
with the entries pre-shuffled (0, 2, 1, 3), so that the no-reorder
q7->q15 expansion of the word yields the natural column order; the
band's leftover columns (N % 4) are emitted column by column interleaved
across the 4 rows, without the shuffle.  Leftover rows (R % 4) follow,
unmodified row-major.  ``deinterleave_1x4`` is the exact inverse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import packedops as po
from ..quant import QuantParams, q7_to_q15_ordered, requantize, weight_byteswap_preprocess
from .matmul import wrap32

_SHUFFLE = (0, 2, 1, 3)


@dataclass(frozen=True)
class ReorderedWeights:
    """A q7 weight matrix in the interleaved 1x4 streaming layout."""

    rows: int
    cols: int
    blob: np.ndarray

    def __post_init__(self):
        if self.blob.dtype != np.int8 or self.blob.ndim != 1:
            raise ValueError("blob must be a 1-d int8 array")
        if self.blob.size != self.rows * self.cols:
            raise ValueError("blob size must equal rows*cols")


def weight_reorder_1x4(w, rows: int | None = None, cols: int | None = None) -> ReorderedWeights:
    """Reorder a row-major q7 matrix for the 1x4 streaming kernel."""
    mat = np.asarray(w, dtype=np.int8)
    if mat.ndim == 1:
        if rows is None or cols is None:
            raise ValueError("rows/cols required for flat input")
        mat = mat.reshape(rows, cols)
    rows, cols = mat.shape
    parts: list[np.ndarray] = []
    main_cols = cols - cols % 4
    for r in range(0, rows - rows % 4, 4):
        band = mat[r:r + 4]
        for g in range(0, main_cols, 4):
            for i in range(4):
                parts.append(band[i, g:g + 4][list(_SHUFFLE)])
        for c in range(main_cols, cols):
            parts.append(band[:, c])
    for r in range(rows - rows % 4, rows):
        parts.append(mat[r])
    blob = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int8)
    return ReorderedWeights(rows, cols, blob.astype(np.int8))


def deinterleave_1x4(wr: ReorderedWeights) -> np.ndarray:
    """Recover the original row-major matrix from the streaming layout."""
    rows, cols = wr.rows, wr.cols
    out = np.empty((rows, cols), dtype=np.int8)
    blob = wr.blob
    pos = 0
    main_cols = cols - cols % 4
    inv = np.argsort(_SHUFFLE)
    for r in range(0, rows - rows % 4, 4):
        for g in range(0, main_cols, 4):
            for i in range(4):
                out[r + i, g:g + 4] = blob[pos:pos + 4][inv]
                pos += 4
        for c in range(main_cols, cols):
            out[r:r + 4, c] = blob[pos:pos + 4]
            pos += 4
    for r in range(rows - rows % 4, rows):
        out[r] = blob[pos:pos + cols]
        pos += cols
    return out


def _check_vec(x, cols):
    xa = np.asarray(x).reshape(-1)
    if xa.size != cols:
        raise ValueError(f"input length {xa.size} != weight columns {cols}")
    return xa


def fully_connected_q7_basic(x, w, bias, quant: QuantParams,
                             out_width: int = 8) -> np.ndarray:
    """Matrix-vector product on a row-major q7 weight matrix."""
    mat = np.asarray(w, dtype=np.int8)
    if mat.ndim != 2:
        raise ValueError("weights must be 2-d")
    rows, cols = mat.shape
    xa = _check_vec(x, cols)
    x15 = q7_to_q15_ordered(xa.astype(np.int8))
    xwords = [po.pack_q15x2(int(x15[k]), int(x15[k + 1]))
              for k in range(0, cols - cols % 2, 2)]
    bias64 = np.asarray(bias).astype(np.int64).reshape(-1)
    out = np.empty(rows, dtype=np.int8 if out_width == 8 else np.int16)
    for r in range(rows):
        acc = wrap32(int(bias64[r]) << quant.bias_left_shift)
        row = mat[r]
        for j, xw in enumerate(xwords):
            ww = po.pack_q15x2(int(row[2 * j]), int(row[2 * j + 1]))
            acc = po.smlad(ww, xw, acc)
        if cols % 2:
            acc = wrap32(acc + int(row[cols - 1]) * int(x15[cols - 1]))
        out[r] = requantize(acc, quant.out_right_shift, out_width)
    return out


def fully_connected_q7_opt(x, wr: ReorderedWeights, bias, quant: QuantParams,
                           out_width: int = 8) -> np.ndarray:
    """1x4 streaming kernel over reordered weights; equals the basic kernel."""
    if not isinstance(wr, ReorderedWeights):
        raise TypeError("weights must be reordered with weight_reorder_1x4")
    rows, cols = wr.rows, wr.cols
    xa = _check_vec(x, cols)
    blob = wr.blob
    x15 = q7_to_q15_ordered(xa.astype(np.int8))
    xwords = [po.pack_q15x2(int(x15[k]), int(x15[k + 1]))
              for k in range(0, cols - cols % 2, 2)]
    bias64 = np.asarray(bias).astype(np.int64).reshape(-1)
    bls, ors = quant.bias_left_shift, quant.out_right_shift
    out = np.empty(rows, dtype=np.int8 if out_width == 8 else np.int16)
    main_cols = cols - cols % 4
    pos = 0
    for r in range(0, rows - rows % 4, 4):
        accs = [wrap32(int(bias64[r + i]) << bls) for i in range(4)]
        for g in range(0, main_cols, 4):
            xw0, xw1 = xwords[g // 2], xwords[g // 2 + 1]
            for i in range(4):
                w = po.pack_q7x4(int(blob[pos]), int(blob[pos + 1]),
                                 int(blob[pos + 2]), int(blob[pos + 3]))
                pos += 4
                # no-reorder expansion of the pre-shuffled word gives the
                # natural column pairs (w0,w1) and (w2,w3)
                accs[i] = po.smlad(po.sxtb16(w), xw0, accs[i])
                accs[i] = po.smlad(po.sxtb16_ror8(w), xw1, accs[i])
        for c in range(main_cols, cols):
            xv = int(x15[c])
            for i in range(4):
                accs[i] = wrap32(accs[i] + int(blob[pos]) * xv)
                pos += 1
        for i in range(4):
            out[r + i] = requantize(accs[i], ors, out_width)
    for r in range(rows - rows % 4, rows):
        acc = wrap32(int(bias64[r]) << bls)
        row = blob[pos:pos + cols]
        pos += cols
        for j, xw in enumerate(xwords):
            ww = po.pack_q15x2(int(row[2 * j]), int(row[2 * j + 1]))
            acc = po.smlad(ww, xw, acc)
        if cols % 2:
            acc = wrap32(acc + int(row[cols - 1]) * int(x15[cols - 1]))
        out[r] = requantize(acc, ors, out_width)
    return out


def preprocess_fc_weights_mixed(w) -> np.ndarray:
    """Byte-swap preprocess each weight row (rows padded to a multiple of 4)."""
    mat = np.asarray(w, dtype=np.int8)
    if mat.ndim != 2:
        raise ValueError("weights must be 2-d")
    return np.stack([weight_byteswap_preprocess(row) for row in mat])


def fully_connected_mixed(x, w_pre, cols: int, bias, quant: QuantParams) -> np.ndarray:
    """q15 activations against byte-swap preprocessed q7 weights -> q15 out.

    ``w_pre`` is the (rows, padded_cols) output of
    ``preprocess_fc_weights_mixed``; ``cols`` is the logical column count.
    """
    mat = np.asarray(w_pre, dtype=np.int8)
    if mat.ndim != 2 or mat.shape[1] % 4:
        raise ValueError("preprocessed weights must be 2-d with 4-aligned rows")
    if not cols <= mat.shape[1] < cols + 4:
        raise ValueError("padded width inconsistent with cols")
    xa = np.asarray(x, dtype=np.int16).reshape(-1)
    if xa.size != cols:
        raise ValueError(f"input length {xa.size} != weight columns {cols}")
    padded = mat.shape[1]
    x16 = np.zeros(padded, dtype=np.int16)
    x16[:cols] = xa
    xwords = [po.pack_q15x2(int(x16[k]), int(x16[k + 1]))
              for k in range(0, padded, 2)]
    bias64 = np.asarray(bias).astype(np.int64).reshape(-1)
    out = np.empty(mat.shape[0], dtype=np.int16)
    for r in range(mat.shape[0]):
        acc = wrap32(int(bias64[r]) << quant.bias_left_shift)
        row = mat[r]
        for g in range(0, padded, 4):
            w = po.pack_q7x4(int(row[g]), int(row[g + 1]),
                             int(row[g + 2]), int(row[g + 3]))
            acc = po.smlad(po.sxtb16(w), xwords[g // 2], acc)
            acc = po.smlad(po.sxtb16_ror8(w), xwords[g // 2 + 1], acc)
        out[r] = requantize(acc, quant.out_right_shift, 16)
    return out
