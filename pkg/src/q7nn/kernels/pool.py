"""In-situ split x-y pooling on q7 HWC tensors.

Pooling is factored into an x-pass (reduce along the width, treating each
pixel's channel vector as one block) and a y-pass (reduce the x-results
along the height, one row block at a time), so horizontal reductions are
computed once and reused by every overlapping vertical window.

The result is written over the front of the input buffer: the operation
is destructive and needs no second tensor.  Overlapping windows (stride
smaller than the kernel) are handled by caching at most K x-reduced rows
before their slots are overwritten; with pad < kernel every row is first
needed no later than the step that overwrites it, so the cache is always
warm.

Max pooling ignores padded positions; average pooling sums zeros there
and always divides by the full window area, rounding half toward
positive infinity.  X-pass sums for the average case are held in int32.
"""

from __future__ import annotations

import numpy as np

from ..tensor import QTensor
from .conv import conv_out_dim


def _pair(v) -> tuple[int, int]:
    if isinstance(v, (tuple, list)):
        a, b = v
        return int(a), int(b)
    return int(v), int(v)


def _xreduce(row: np.ndarray, op: str, kw: int, sw: int, pw: int,
             w_out: int) -> np.ndarray:
    w, c = row.shape
    if op == "max":
        padded = np.full((w + 2 * pw, c), -128, dtype=np.int8)
    else:
        padded = np.zeros((w + 2 * pw, c), dtype=np.int32)
    padded[pw:pw + w] = row
    span = sw * (w_out - 1) + 1
    acc = padded[0:span:sw].copy()
    for dx in range(1, kw):
        seg = padded[dx:dx + span:sw]
        if op == "max":
            np.maximum(acc, seg, out=acc)
        else:
            acc += seg
    return acc


def _pool_insitu(t: QTensor, op: str, kernel, stride, pad) -> QTensor:
    if t.elem_width != 8:
        raise ValueError("pooling operates on q7 tensors")
    kh, kw = _pair(kernel)
    sh, sw = _pair(stride)
    ph, pw = _pair(pad)
    if min(kh, kw, sh, sw) < 1 or min(ph, pw) < 0:
        raise ValueError("invalid pooling geometry")
    if ph >= kh or pw >= kw:
        raise ValueError("pad must be smaller than the window")
    h, w, c = t.shape
    h_out = conv_out_dim(h, kh, sh, ph)
    w_out = conv_out_dim(w, kw, sw, pw)
    if h_out < 1 or w_out < 1:
        raise ValueError(f"degenerate pooled output {h_out}x{w_out}")
    data = t.data
    in3 = data.reshape(h, w, c)
    # in-situ needs the compacted output to trail the read position; that
    # holds whenever the output is no wider than the input.  Geometries
    # where padding grows the output get a fresh buffer instead.
    in_situ = w_out <= w and h_out * w_out <= h * w
    if in_situ:
        out_store = data[:h_out * w_out * c]
    else:
        out_store = np.empty(h_out * w_out * c, dtype=np.int8)
    out_flat = out_store.reshape(h_out, w_out, c)
    divisor = kh * kw
    xrows: dict[int, np.ndarray] = {}
    for oy in range(h_out):
        y0 = oy * sh - ph
        # x-reduce (and cache) every live row this window needs, before
        # this step's write can clobber it
        for dy in range(kh):
            y = y0 + dy
            if 0 <= y < h and y not in xrows:
                xrows[y] = _xreduce(in3[y], op, kw, sw, pw, w_out)
        if op == "max":
            acc = None
            for dy in range(kh):
                y = y0 + dy
                if 0 <= y < h:
                    acc = xrows[y].copy() if acc is None else np.maximum(acc, xrows[y])
            out_flat[oy] = acc
        else:
            acc = np.zeros((w_out, c), dtype=np.int32)
            for dy in range(kh):
                y = y0 + dy
                if 0 <= y < h:
                    acc += xrows[y]
            out_flat[oy] = np.clip((acc + divisor // 2) // divisor, -128, 127)
        next_start = (oy + 1) * sh - ph
        for y in [k for k in xrows if k < next_start]:
            del xrows[y]
    return QTensor(h_out, w_out, c, 8, t.frac_bits, out_store)


def maxpool_insitu(t: QTensor, kernel, stride, pad=0) -> QTensor:
    """Window max, written over the input buffer (destructive)."""
    return _pool_insitu(t, "max", kernel, stride, pad)


def avgpool_insitu(t: QTensor, kernel, stride, pad=0) -> QTensor:
    """Rounded window average over the full window area, in situ."""
    return _pool_insitu(t, "avg", kernel, stride, pad)
