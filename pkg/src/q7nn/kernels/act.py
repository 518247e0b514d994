"""Activation kernels: packed-word ReLU and table-driven sigmoid/tanh.

ReLU treats the buffer as 32-bit words of four q7 lanes: each byte's sign
bit is stretched into a 0xFF/0x00 mask (a saturating byte subtraction of
the sign bits from zero -- saturation never triggers on 0/1 operands) and
negative lanes are cleared with one AND.  The non-multiple-of-4 tail is
handled scalarly.

Sigmoid/tanh use quantized lookup tables over [-2**range_pow,
+2**range_pow).  The high bits of the input select an entry; with
``interpolate`` the low bits blend adjacent entries linearly.  A
``two_region`` table pairs a fine inner table (quarter range around zero,
where both functions bend hardest) with a coarse full-range table
selected by the input magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .. import packedops as po
from ..quant import quantize_real

FUNCS: dict[str, Callable[[float], float]] = {
    "sigmoid": lambda x: 1.0 / (1.0 + math.exp(-x)),
    "tanh": math.tanh,
}

MODES = ("unified", "two_region")


def relu_swar_q7(data: np.ndarray) -> np.ndarray:
    """In-place max(0, x) on a q7 buffer via packed sign-bit masks."""
    buf = np.ascontiguousarray(data) if not data.flags.c_contiguous else data
    n = buf.size
    body = n - n % 4
    if body:
        words = buf[:body].view(np.uint32)
        sign = (words >> 7) & np.uint32(0x01010101)
        mask = sign * np.uint32(0xFF)  # per-byte 0x00 or 0xFF, no carries
        words &= ~mask
    if body < n:
        np.maximum(buf[body:], 0, out=buf[body:])
    if buf is not data:
        data[...] = buf
    return data


def relu_word(w: int) -> int:
    """Single-word q7 ReLU built from the saturating byte subtraction."""
    sign = (w >> 7) & 0x01010101
    mask = po.qsub8(0, sign)
    return w & ~mask & po.MASK32


@dataclass(frozen=True)
class LutTable:
    """Quantized activation lookup table(s) plus range metadata."""

    func: str
    mode: str
    range_pow: int
    entries: int             # total entry count across regions
    elem_width: int
    tables: tuple[np.ndarray, ...]   # (main,) or (inner, outer)

    @property
    def input_frac_bits(self) -> int:
        """Canonical input scaling: the full input range spans the table."""
        return self.elem_width - 1 - self.range_pow

    @property
    def inner_range_pow(self) -> int:
        return self.range_pow - 2


def _sample_points(range_pow: int, n: int, frac_bits: int) -> np.ndarray:
    """Representative input value (integer units) for each table entry.

    When several quantized inputs share one entry (shift s >= 1) the
    entry is sampled at their midpoint; when the table is at least as
    fine as the input grid it is sampled exactly on the grid.
    """
    span = 1 << (range_pow + 1 + frac_bits)
    idx = np.arange(n, dtype=np.float64)
    step = span / n
    if step >= 2.0:
        return idx * step + (step - 1) / 2.0 - span / 2.0
    return idx * step - span / 2.0


def build_lut(func: str, mode: str, range_pow: int, entries: int,
              elem_width: int = 8) -> LutTable:
    """Tabulate sigmoid or tanh over [-2**range_pow, 2**range_pow)."""
    if func not in FUNCS:
        raise ValueError(f"unknown function {func!r}")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if range_pow not in (2, 3):
        raise ValueError("range_pow must be 2 or 3")
    if elem_width not in (8, 16):
        raise ValueError("elem_width must be 8 or 16")
    min_entries = 8 if mode == "two_region" else 4
    if entries < min_entries or entries & (entries - 1):
        raise ValueError(
            f"entries must be a power of two >= {min_entries}")
    f = FUNCS[func]
    out_frac = elem_width - 1
    frac_bits = elem_width - 1 - range_pow

    def table(rp: int, n: int) -> np.ndarray:
        pts = _sample_points(rp, n, frac_bits)
        vals = [quantize_real(f(v / (1 << frac_bits)), out_frac, elem_width).value
                for v in pts]
        return np.asarray(vals, dtype=np.int8 if elem_width == 8 else np.int16)

    if mode == "unified":
        tabs = (table(range_pow, entries),)
    else:
        half = entries // 2
        tabs = (table(range_pow - 2, half), table(range_pow, half))
    return LutTable(func, mode, range_pow, entries, elem_width, tabs)


def _lookup(v64: np.ndarray, ent: np.ndarray, range_pow: int,
            frac_bits: int, interpolate: bool) -> np.ndarray:
    n = ent.size
    base = v64 + (1 << (range_pow + frac_bits))
    shift = range_pow + 1 + frac_bits - n.bit_length() + 1
    e64 = ent.astype(np.int64)
    if shift <= 0:
        idx = np.clip(base << (-shift), 0, n - 1)
        return e64[idx]
    if not interpolate:
        idx = np.clip(base >> shift, 0, n - 1)
        return e64[idx]
    u = 2 * base - ((1 << shift) - 1)
    i = np.clip(u >> (shift + 1), 0, n - 2)
    low = np.clip(u - (i << (shift + 1)), 0, 1 << (shift + 1))
    e0 = e64[i]
    e1 = e64[i + 1]
    return e0 + (((e1 - e0) * low + (1 << shift)) >> (shift + 1))


def activation_lut_apply(x: np.ndarray, table: LutTable,
                         interpolate: bool = False,
                         frac_bits: int | None = None) -> np.ndarray:
    """Apply a lookup table in place to a q7/q15 buffer.

    ``frac_bits`` is the input's fixed-point scaling; it defaults to the
    table's canonical value.  Inputs past the table range clamp to the
    end entries.
    """
    want = np.int8 if table.elem_width == 8 else np.int16
    if x.dtype != want:
        raise ValueError(
            f"input dtype {x.dtype} does not match table width {table.elem_width}")
    fb = table.input_frac_bits if frac_bits is None else frac_bits
    if not 0 <= fb <= table.elem_width - 1:
        raise ValueError("frac_bits out of range for the input width")
    v = x.astype(np.int64).reshape(-1)
    if table.mode == "unified":
        out = _lookup(v, table.tables[0], table.range_pow, fb, interpolate)
    else:
        inner, outer = table.tables
        bound = 1 << (table.inner_range_pow + fb)
        is_inner = (v >= -bound) & (v < bound)
        out = np.empty_like(v)
        out[is_inner] = _lookup(v[is_inner], inner,
                                table.inner_range_pow, fb, interpolate)
        out[~is_inner] = _lookup(v[~is_inner], outer,
                                 table.range_pow, fb, interpolate)
    x[...] = out.astype(want).reshape(x.shape)
    return x
