"""Bit-exact packed-word operations on 32-bit values.

A 32-bit word is viewed either as four signed 8-bit lanes (lane i in bits
[8i+7:8i]) or two signed 16-bit lanes (lane i in bits [16i+15:16i]).
Lane 0 is always the least-significant lane, independent of host byte
order; all memory I/O elsewhere in the package is little-endian, so a
q7 quadruple [a, b, c, d] loaded from memory lands in lanes 0..3.

The three packed primitives (``sxtb16``, ``smlad``, ``qsub8``) mirror the
Arm v7E-M DSP instructions of the same names. They are total, pure
functions on Python ints; ``smlad`` wraps modulo 2**32 exactly like the
hardware instruction, so callers must size their accumulation chains to
stay inside the signed 32-bit range.
"""

from __future__ import annotations

MASK32 = 0xFFFFFFFF

Q7_MIN, Q7_MAX = -128, 127
Q15_MIN, Q15_MAX = -32768, 32767
Q31_MIN, Q31_MAX = -(1 << 31), (1 << 31) - 1


def to_unsigned32(v: int) -> int:
    """Two's-complement bit pattern of a (possibly negative) 32-bit value."""
    return v & MASK32


def to_signed32(v: int) -> int:
    v &= MASK32
    return v - (1 << 32) if v & 0x80000000 else v


def to_signed16(v: int) -> int:
    v &= 0xFFFF
    return v - (1 << 16) if v & 0x8000 else v


def to_signed8(v: int) -> int:
    v &= 0xFF
    return v - (1 << 8) if v & 0x80 else v


def ror32(w: int, n: int) -> int:
    """Rotate a 32-bit word right by n bits."""
    n &= 31
    w &= MASK32
    return ((w >> n) | (w << (32 - n))) & MASK32


def pack_q7x4(b0: int, b1: int, b2: int, b3: int) -> int:
    """Pack four signed bytes into a word, lane 0 least significant."""
    return ((int(b0) & 0xFF) | ((int(b1) & 0xFF) << 8)
            | ((int(b2) & 0xFF) << 16) | ((int(b3) & 0xFF) << 24))


def unpack_q7x4(w: int) -> tuple[int, int, int, int]:
    return (to_signed8(w), to_signed8(w >> 8),
            to_signed8(w >> 16), to_signed8(w >> 24))


def pack_q15x2(lo: int, hi: int) -> int:
    """Pack two signed halfwords into a word, lane 0 least significant."""
    return (int(lo) & 0xFFFF) | ((int(hi) & 0xFFFF) << 16)


def unpack_q15x2(w: int) -> tuple[int, int]:
    return to_signed16(w), to_signed16(w >> 16)


def sxtb16(w: int) -> int:
    """Sign-extend 8-bit lanes 0 and 2 into the two 16-bit result lanes."""
    lo = w & 0xFF
    hi = (w >> 16) & 0xFF
    if lo & 0x80:
        lo |= 0xFF00
    if hi & 0x80:
        hi |= 0xFF00
    return lo | (hi << 16)


def sxtb16_ror8(w: int) -> int:
    """Sign-extend 8-bit lanes 1 and 3 (sxtb16 of the word rotated right 8)."""
    return sxtb16(ror32(w, 8))


def smlad(x: int, y: int, acc: int) -> int:
    """Dual signed 16x16 multiply-accumulate: acc + x0*y0 + x1*y1.

    Result is a signed 32-bit value; overflow wraps (no saturation).
    """
    x0, x1 = unpack_q15x2(x)
    y0, y1 = unpack_q15x2(y)
    return to_signed32(acc + x0 * y0 + x1 * y1)


def qsub8(x: int, y: int) -> int:
    """Lanewise saturating signed byte subtraction."""
    out = 0
    for i in range(4):
        d = to_signed8(x >> (8 * i)) - to_signed8(y >> (8 * i))
        if d > Q7_MAX:
            d = Q7_MAX
        elif d < Q7_MIN:
            d = Q7_MIN
        out |= (d & 0xFF) << (8 * i)
    return out


def ssat_q7(v: int) -> int:
    """Saturate to the signed 8-bit range."""
    if v > Q7_MAX:
        return Q7_MAX
    if v < Q7_MIN:
        return Q7_MIN
    return v


def ssat_q15(v: int) -> int:
    """Saturate to the signed 16-bit range."""
    if v > Q15_MAX:
        return Q15_MAX
    if v < Q15_MIN:
        return Q15_MIN
    return v
