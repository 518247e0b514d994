"""Brute-force reference implementations used as ground truth.

Every optimized kernel has a direct counterpart here: plain window
gathers and int64 accumulation (exact for all reachable operand widths),
no column expansion, no packed words, no tiling, no in-place tricks.
The only shared routine is ``requantize``, which has its own
arbitrary-precision cross-check in the test suite.

The oracles verify that accumulators stay inside the signed 32-bit range
and raise ``AccumulatorOverflow`` otherwise, so a silent wrap in the
optimized kernels can never be mistaken for agreement.
"""

from __future__ import annotations

import math

import numpy as np

from .kernels.act import LutTable
from .kernels.conv import ConvParams, conv_out_dim
from .quant import QuantParams, requantize
from .tensor import QTensor

_Q31_LIMIT = 1 << 31


class AccumulatorOverflow(OverflowError):
    pass


def _check_q31(acc: np.ndarray, where: str) -> None:
    if acc.size and max(int(acc.max()), -int(acc.min()) - 1) >= _Q31_LIMIT:
        raise AccumulatorOverflow(
            f"{where}: accumulator exceeds the signed 32-bit range")


def ref_conv(inp: QTensor, weights, bias, params: ConvParams,
             out_frac_bits: int = 0) -> QTensor:
    """Direct zero-padded convolution, one output pixel at a time."""
    k, s, p = params.kernel_size, params.stride, params.pad
    h, w, c_in = inp.shape
    w4 = np.asarray(weights, dtype=np.int64)
    if w4.ndim != 4 or w4.shape[1:] != (k, k, c_in):
        raise ValueError("weight shape mismatch")
    c_out = w4.shape[0]
    oh, ow = params.out_hw(h, w)
    padded = np.zeros((h + 2 * p, w + 2 * p, c_in), dtype=np.int64)
    padded[p:p + h, p:p + w] = inp.as_hwc()
    wm = w4.reshape(c_out, k * k * c_in)
    bias_sh = np.asarray(bias).astype(np.int64).reshape(-1) << params.quant.bias_left_shift
    out = QTensor(oh, ow, c_out, 8, out_frac_bits)
    out3 = out.as_hwc()
    for oy in range(oh):
        for ox in range(ow):
            window = padded[oy * s:oy * s + k, ox * s:ox * s + k].reshape(-1)
            acc = wm @ window + bias_sh
            _check_q31(acc, "ref_conv")
            out3[oy, ox] = requantize(acc, params.quant.out_right_shift, 8)
    return out


def ref_depthwise_conv(inp: QTensor, weights, bias, params: ConvParams,
                       out_frac_bits: int = 0) -> QTensor:
    """Per-channel direct convolution."""
    k, s, p = params.kernel_size, params.stride, params.pad
    h, w, c = inp.shape
    w3 = np.asarray(weights, dtype=np.int64)
    if w3.shape != (k, k, c):
        raise ValueError("weight shape mismatch")
    oh, ow = params.out_hw(h, w)
    padded = np.zeros((h + 2 * p, w + 2 * p, c), dtype=np.int64)
    padded[p:p + h, p:p + w] = inp.as_hwc()
    bias_sh = np.asarray(bias).astype(np.int64).reshape(-1) << params.quant.bias_left_shift
    out = QTensor(oh, ow, c, 8, out_frac_bits)
    out3 = out.as_hwc()
    for oy in range(oh):
        for ox in range(ow):
            window = padded[oy * s:oy * s + k, ox * s:ox * s + k]
            acc = (window * w3).sum(axis=(0, 1)) + bias_sh
            _check_q31(acc, "ref_depthwise_conv")
            out3[oy, ox] = requantize(acc, params.quant.out_right_shift, 8)
    return out


def ref_fc(x, w, bias, quant: QuantParams, out_width: int = 8) -> np.ndarray:
    """Plain int64 matrix-vector product."""
    mat = np.asarray(w).astype(np.int64)
    xv = np.asarray(x).astype(np.int64).reshape(-1)
    if mat.shape[1] != xv.size:
        raise ValueError("shape mismatch")
    acc = mat @ xv + (np.asarray(bias).astype(np.int64).reshape(-1)
                      << quant.bias_left_shift)
    _check_q31(acc, "ref_fc")
    out = requantize(acc, quant.out_right_shift, out_width)
    return out.astype(np.int8 if out_width == 8 else np.int16)


def ref_matmul(a, b, bias, quant: QuantParams, out_width: int = 8) -> np.ndarray:
    a64 = np.asarray(a).astype(np.int64)
    b64 = np.asarray(b).astype(np.int64)
    acc = a64 @ b64 + (np.asarray(bias).astype(np.int64).reshape(-1)
                       << quant.bias_left_shift)[:, None]
    _check_q31(acc, "ref_matmul")
    out = requantize(acc, quant.out_right_shift, out_width)
    return out.astype(np.int8 if out_width == 8 else np.int16)


def _pair(v):
    if isinstance(v, (tuple, list)):
        return int(v[0]), int(v[1])
    return int(v), int(v)


def ref_pool_window(t: QTensor, kernel, stride, pad, op: str) -> QTensor:
    """Nested-loop window pooling into a fresh tensor.

    Max ignores padded positions; average divides by the full window area
    with the same half-up rounding the in-situ kernel declares.
    """
    kh, kw = _pair(kernel)
    sh, sw = _pair(stride)
    ph, pw = _pair(pad)
    h, w, c = t.shape
    oh = conv_out_dim(h, kh, sh, ph)
    ow = conv_out_dim(w, kw, sw, pw)
    in3 = t.as_hwc()
    out = QTensor(oh, ow, c, 8, t.frac_bits)
    out3 = out.as_hwc()
    divisor = kh * kw
    for oy in range(oh):
        for ox in range(ow):
            y0, x0 = oy * sh - ph, ox * sw - pw
            win = in3[max(y0, 0):min(y0 + kh, h), max(x0, 0):min(x0 + kw, w)]
            if op == "max":
                out3[oy, ox] = win.reshape(-1, c).max(axis=0)
            else:
                total = win.reshape(-1, c).astype(np.int64).sum(axis=0)
                out3[oy, ox] = np.clip(
                    (total + divisor // 2) // divisor, -128, 127)
    return out


def ref_relu(buf) -> np.ndarray:
    return np.maximum(np.asarray(buf), 0)


def _ref_quantize(x: float, frac_bits: int, width: int) -> int:
    lim = 1 << (width - 1)
    scaled = x * (1 << frac_bits)
    v = math.floor(scaled + 0.5) if scaled >= 0 else math.ceil(scaled - 0.5)
    return min(max(v, -lim), lim - 1)


def ref_activation_real(func, xs: np.ndarray) -> np.ndarray:
    """Double-precision evaluation of the activation on real inputs."""
    return np.asarray([func(float(v)) for v in xs], dtype=np.float64)


def ref_lut_apply(x: np.ndarray, table: LutTable, interpolate: bool = False,
                  frac_bits: int | None = None) -> np.ndarray:
    """Expected table output computed with real-valued index arithmetic.

    Entry selection works in real space (floor of the scaled position,
    exact in double for power-of-two cells); the interpolation blend uses
    the same declared rounding rule, evaluated in exact Python ints.
    """
    fb = table.input_frac_bits if frac_bits is None else frac_bits
    out = np.empty(x.size, dtype=np.int64)
    flat = x.reshape(-1)
    for j, v in enumerate(flat):
        xv = int(v)
        if table.mode == "two_region":
            bound = 1 << (table.inner_range_pow + fb)
            if -bound <= xv < bound:
                ent, rp = table.tables[0], table.inner_range_pow
            else:
                ent, rp = table.tables[1], table.range_pow
        else:
            ent, rp = table.tables[0], table.range_pow
        n = ent.size
        span = float(1 << (rp + 1 + fb))
        cell = span / n
        pos = (xv + (1 << (rp + fb))) / cell
        if cell <= 1.0 or not interpolate:
            idx = min(max(int(math.floor(pos)), 0), n - 1)
            out[j] = int(ent[idx])
            continue
        shift = round(math.log2(cell))
        centered = pos - 0.5 + 1.0 / (2 * cell)
        i = min(max(int(math.floor(centered)), 0), n - 2)
        low = int(round((centered - i) * (2 * cell)))
        low = min(max(low, 0), int(2 * cell))
        e0, e1 = int(ent[i]), int(ent[i + 1])
        out[j] = e0 + (((e1 - e0) * low + (1 << shift)) >> (shift + 1))
    want = np.int8 if table.elem_width == 8 else np.int16
    return out.astype(want).reshape(x.shape)
