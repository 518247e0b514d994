"""HWC convolution via partial column expansion plus tiled matmul.

Instead of materializing the full patch matrix, the kernel expands a
small, even number of receptive-field columns at a time (default 2) into
a q15 scratch buffer and feeds them to the 2x2 matmul kernel, bounding
scratch memory at ``partial_cols * K*K*C_in`` q15 entries regardless of
the output size.  Because the data is HWC, every (dy, row) slice of a
patch is one contiguous channel run, copied with a single slice per
kernel row.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..quant import QuantParams, requantize
from ..tensor import QTensor
from .matmul import tiled_acc_2x2, wrap32


def conv_out_dim(n: int, kernel: int, stride: int, pad: int) -> int:
    return (n + 2 * pad - kernel) // stride + 1


@dataclass(frozen=True)
class ConvParams:
    kernel_size: int
    stride: int = 1
    pad: int = 0
    quant: QuantParams = field(default_factory=QuantParams)
    partial_cols: int = 2

    def __post_init__(self):
        if self.kernel_size < 1 or self.stride < 1 or self.pad < 0:
            raise ValueError("invalid convolution geometry")
        if self.partial_cols < 2 or self.partial_cols % 2:
            raise ValueError("partial_cols must be even and >= 2")

    def out_hw(self, h: int, w: int) -> tuple[int, int]:
        oh = conv_out_dim(h, self.kernel_size, self.stride, self.pad)
        ow = conv_out_dim(w, self.kernel_size, self.stride, self.pad)
        if oh < 1 or ow < 1:
            raise ValueError(
                f"degenerate output {oh}x{ow} for input {h}x{w}")
        return oh, ow


def im2col_partial(inp: QTensor, params: ConvParams, col_buf: np.ndarray,
                   start_patch: int, n_patches: int) -> None:
    """Fill ``col_buf[:, :n_patches]`` with consecutive receptive fields.

    Column j holds output pixel ``start_patch + j``'s K*K*C_in window in
    HWC order, widened to q15, zeros where the window overlaps padding.
    """
    k, s, p = params.kernel_size, params.stride, params.pad
    h, w, c = inp.shape
    oh, ow = params.out_hw(h, w)
    if n_patches > params.partial_cols:
        raise ValueError("n_patches exceeds partial_cols")
    if start_patch < 0 or start_patch + n_patches > oh * ow:
        raise ValueError("patch range out of bounds")
    if col_buf.shape[0] != k * k * c or col_buf.shape[1] < n_patches:
        raise ValueError("column buffer has the wrong shape")
    in3 = inp.as_hwc()
    for j in range(n_patches):
        patch = start_patch + j
        oy, ox = divmod(patch, ow)
        iy0 = oy * s - p
        ix0 = ox * s - p
        col = col_buf[:, j]
        col[:] = 0
        x_lo = max(ix0, 0)
        x_hi = min(ix0 + k, w)
        if x_hi <= x_lo:
            continue
        for dy in range(k):
            y = iy0 + dy
            if 0 <= y < h:
                seg = in3[y, x_lo:x_hi].reshape(-1)
                off = (dy * k + (x_lo - ix0)) * c
                col[off:off + seg.size] = seg


def conv_hwc_q7(inp: QTensor, weights, bias, params: ConvParams,
                out_frac_bits: int = 0) -> QTensor:
    """Convolution on a q7 HWC tensor, weights shaped (C_out, K, K, C_in)."""
    if inp.elem_width != 8:
        raise ValueError("input must be q7")
    w4 = np.asarray(weights, dtype=np.int8)
    k = params.kernel_size
    h, w, c_in = inp.shape
    if w4.ndim != 4 or w4.shape[1:] != (k, k, c_in):
        raise ValueError(
            f"weights shape {w4.shape} != (C_out, {k}, {k}, {c_in})")
    c_out = w4.shape[0]
    bias64 = np.asarray(bias).astype(np.int64).reshape(-1)
    if bias64.size != c_out:
        raise ValueError("bias length must equal C_out")
    oh, ow = params.out_hw(h, w)
    wm64 = w4.reshape(c_out, k * k * c_in).astype(np.int64)
    init = wrap32(bias64 << params.quant.bias_left_shift)
    out = QTensor(oh, ow, c_out, 8, out_frac_bits)
    out_px = out.data.reshape(oh * ow, c_out)
    col_buf = np.zeros((k * k * c_in, params.partial_cols), dtype=np.int16)
    total = oh * ow
    for p0 in range(0, total, params.partial_cols):
        n = min(params.partial_cols, total - p0)
        im2col_partial(inp, params, col_buf, p0, n)
        acc = tiled_acc_2x2(wm64, col_buf[:, :n].astype(np.int64), init)
        out_px[p0:p0 + n] = requantize(
            acc, params.quant.out_right_shift, 8).T
    return out


def depthwise_conv_hwc_q7(inp: QTensor, weights, bias, params: ConvParams,
                          out_frac_bits: int = 0) -> QTensor:
    """Per-channel convolution: output channel c depends only on input
    channel c.  Weights shaped (K, K, C)."""
    if inp.elem_width != 8:
        raise ValueError("input must be q7")
    w3 = np.asarray(weights, dtype=np.int8)
    k = params.kernel_size
    h, w, c = inp.shape
    if w3.shape != (k, k, c):
        raise ValueError(f"weights shape {w3.shape} != ({k}, {k}, {c})")
    bias64 = np.asarray(bias).astype(np.int64).reshape(-1)
    if bias64.size != c:
        raise ValueError("bias length must equal the channel count")
    oh, ow = params.out_hw(h, w)
    s, p = params.stride, params.pad
    padded = np.zeros((h + 2 * p, w + 2 * p, c), dtype=np.int64)
    padded[p:p + h, p:p + w] = inp.as_hwc()
    w64 = w3.astype(np.int64)
    init = wrap32(bias64 << params.quant.bias_left_shift)
    out = QTensor(oh, ow, c, 8, out_frac_bits)
    out3 = out.as_hwc()
    for oy in range(oh):
        for ox in range(ow):
            win = padded[oy * s:oy * s + k, ox * s:ox * s + k]
            acc = wrap32((win * w64).sum(axis=(0, 1)) + init)
            out3[oy, ox] = requantize(acc, params.quant.out_right_shift, 8)
    return out
