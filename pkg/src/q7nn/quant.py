"""Power-of-two fixed-point scaling and q7 <-> q15 data transforms.

A fixed-point scalar is an integer ``value`` with ``frac_bits`` fractional
bits; the represented real number is ``value * 2**(-frac_bits)``.  All
rescaling between layers is a bitwise shift: biases are shifted left into
the wide accumulator, outputs are shifted right (with a rounding bias)
and saturated back to q7/q15.

The q7->q15 expansion comes in two flavours built from the packed-word
primitives:

* ``q7_to_q15_ordered``   -- output element order equals input order.
* ``q7_to_q15_noreorder`` -- skips the repacking step; each aligned
  quadruple [a, b, c, d] comes out as [a, c, b, d].

``weight_byteswap_preprocess`` swaps the middle bytes of every 32-bit
group ([a, b, c, d] -> [a, c, b, d], self-inverse), so that a
preprocessed weight stream consumed through ``q7_to_q15_noreorder``
yields the original element order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import packedops as po

_WIDTH_RANGE = {8: (po.Q7_MIN, po.Q7_MAX), 16: (po.Q15_MIN, po.Q15_MAX),
                32: (po.Q31_MIN, po.Q31_MAX)}


@dataclass(frozen=True)
class QScalar:
    """A fixed-point scalar: real value = value * 2**(-frac_bits)."""

    value: int
    frac_bits: int
    width: int = 8

    def __post_init__(self):
        lo, hi = _WIDTH_RANGE[self.width]
        if not lo <= self.value <= hi:
            raise ValueError(f"value {self.value} outside {self.width}-bit range")
        if not 0 <= self.frac_bits <= self.width - 1:
            raise ValueError(f"frac_bits {self.frac_bits} invalid for width {self.width}")

    @property
    def real(self) -> float:
        return self.value * 2.0 ** (-self.frac_bits)


@dataclass(frozen=True)
class QuantParams:
    """Per-layer shift amounts: bias left shift into the accumulator and
    output right shift back to the narrow format."""

    bias_left_shift: int = 0
    out_right_shift: int = 0

    def __post_init__(self):
        for name in ("bias_left_shift", "out_right_shift"):
            v = getattr(self, name)
            if not 0 <= v <= 31:
                raise ValueError(f"{name} must be in [0, 31], got {v}")


def validate_scale_chain(input_frac: int, weight_frac: int, bias_frac: int,
                         output_frac: int, quant: QuantParams) -> None:
    """Check one layer's power-of-two scale bookkeeping.

    The accumulator carries input_frac + weight_frac fractional bits, so
    the bias must be left-shifted to that scale and the output right
    shift must bring it down to the declared output scale.
    """
    prod = input_frac + weight_frac
    if bias_frac + quant.bias_left_shift != prod:
        raise ValueError(
            f"bias scale mismatch: bias_frac {bias_frac} + shift "
            f"{quant.bias_left_shift} != input_frac + weight_frac = {prod}")
    if output_frac + quant.out_right_shift != prod:
        raise ValueError(
            f"output scale mismatch: output_frac {output_frac} + shift "
            f"{quant.out_right_shift} != input_frac + weight_frac = {prod}")


def quantize_real(x: float, frac_bits: int, width: int = 8) -> QScalar:
    """Round-to-nearest (ties away from zero) of x * 2**frac_bits, saturated."""
    lo, hi = _WIDTH_RANGE[width]
    scaled = x * (1 << frac_bits)
    v = int(np.floor(scaled + 0.5)) if scaled >= 0 else int(np.ceil(scaled - 0.5))
    v = min(max(v, lo), hi)
    return QScalar(v, frac_bits, width)


def dequantize(q: QScalar) -> float:
    return q.real


def requantize(acc, out_right_shift: int, width: int = 8):
    """Rounded right shift then saturation.

    For shift > 0 the result is ``(acc + 2**(shift-1)) >> shift`` (round
    half up), for shift 0 it is plain saturation.  Works elementwise on
    ints and integer ndarrays; ndarray input must be wide enough that the
    rounding bias cannot overflow (int64 recommended).
    """
    if out_right_shift < 0:
        raise ValueError("out_right_shift must be >= 0")
    lo, hi = _WIDTH_RANGE[width]
    if isinstance(acc, np.ndarray):
        a = acc.astype(np.int64, copy=False)
        if out_right_shift > 0:
            a = (a + (1 << (out_right_shift - 1))) >> out_right_shift
        return np.clip(a, lo, hi)
    v = int(acc)
    if out_right_shift > 0:
        v = (v + (1 << (out_right_shift - 1))) >> out_right_shift
    return min(max(v, lo), hi)


def _le_word(b0: int, b1: int, b2: int, b3: int) -> int:
    return po.pack_q7x4(b0, b1, b2, b3)


def q7_to_q15_ordered(src) -> np.ndarray:
    """Expand q7 to q15 preserving element order.

    The 4-aligned body goes through sxtb16 / sxtb16_ror8 plus a repacking
    step; the tail is sign-extended scalarly.
    """
    a = np.asarray(src, dtype=np.int8)
    n = a.size
    out = np.empty(n, dtype=np.int16)
    body = n - n % 4
    for i in range(0, body, 4):
        w = _le_word(a[i], a[i + 1], a[i + 2], a[i + 3])
        even = po.sxtb16(w)        # lanes (a[i], a[i+2])
        odd = po.sxtb16_ror8(w)    # lanes (a[i+1], a[i+3])
        # repack to restore input order: (a0, a1) and (a2, a3)
        w0 = (even & 0xFFFF) | ((odd & 0xFFFF) << 16)
        w1 = (even >> 16) | (odd & 0xFFFF0000)
        out[i], out[i + 1] = po.unpack_q15x2(w0)
        out[i + 2], out[i + 3] = po.unpack_q15x2(w1)
    for i in range(body, n):
        out[i] = a[i]
    return out


def q7_to_q15_noreorder(src) -> np.ndarray:
    """Expand q7 to q15 without the repacking step.

    Each aligned quadruple [a, b, c, d] is emitted as [a, c, b, d]; a tail
    shorter than 4 keeps its order.
    """
    a = np.asarray(src, dtype=np.int8)
    n = a.size
    out = np.empty(n, dtype=np.int16)
    body = n - n % 4
    for i in range(0, body, 4):
        w = _le_word(a[i], a[i + 1], a[i + 2], a[i + 3])
        out[i], out[i + 1] = po.unpack_q15x2(po.sxtb16(w))
        out[i + 2], out[i + 3] = po.unpack_q15x2(po.sxtb16_ror8(w))
    for i in range(body, n):
        out[i] = a[i]
    return out


def weight_byteswap_preprocess(w) -> np.ndarray:
    """Swap the two middle bytes of every 32-bit group: [a,b,c,d] -> [a,c,b,d].

    Input whose length is not a multiple of 4 is zero-padded up to one
    (the caller keeps the logical length).  Self-inverse on the padded
    stream.
    """
    a = np.asarray(w, dtype=np.int8)
    pad = (-a.size) % 4
    if pad:
        a = np.concatenate([a, np.zeros(pad, dtype=np.int8)])
    g = a.reshape(-1, 4)
    return g[:, [0, 2, 1, 3]].reshape(-1).copy()
