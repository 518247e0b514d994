"""Tiled q15 matrix multiplication with q31 wrapping accumulators.

The kernel walks the output in 2x2 tiles (two rows by two columns per
inner step, odd leftovers handled by 1-wide tails), initializing each
accumulator with the row bias shifted left by ``bias_left_shift``.

The dot products are evaluated as exact int64 sums truncated to the
signed 32-bit range once per output.  Because two's-complement wrapping
addition is associative, this equals folding the dual-MAC word operation
sequentially, as long as the exact sum stays below 2**63 (true for any
q15 operands and fewer than 2**31 terms); the property tests pin this
equivalence against the scalar word op.
"""

from __future__ import annotations

import numpy as np

from ..quant import QuantParams, requantize

_WRAP_BIAS = 1 << 31
_WRAP_MOD = 1 << 32


def wrap32(a):
    """Truncate int/int64-array values to signed 32-bit two's complement."""
    if isinstance(a, np.ndarray):
        return ((a + _WRAP_BIAS) % _WRAP_MOD) - _WRAP_BIAS
    return ((int(a) + _WRAP_BIAS) % _WRAP_MOD) - _WRAP_BIAS


def tiled_acc_2x2(a64: np.ndarray, b64: np.ndarray, acc_init64: np.ndarray) -> np.ndarray:
    """Accumulator matrix for A @ B with per-row init, 2x2 tile order.

    ``a64``/``b64``/``acc_init64`` must already be int64.  Returns the
    (rows, cols) accumulators wrapped to signed 32-bit.
    """
    m, k = a64.shape
    k2, n = b64.shape
    if k != k2:
        raise ValueError(f"inner dimensions disagree: {k} vs {k2}")
    acc = np.empty((m, n), dtype=np.int64)
    r = 0
    while r + 2 <= m:
        ar = a64[r:r + 2]
        c = 0
        while c + 2 <= n:
            acc[r:r + 2, c:c + 2] = ar @ b64[:, c:c + 2]
            c += 2
        if c < n:
            acc[r:r + 2, c] = ar @ b64[:, c]
        r += 2
    if r < m:
        ar = a64[r]
        c = 0
        while c + 2 <= n:
            acc[r, c:c + 2] = ar @ b64[:, c:c + 2]
            c += 2
        if c < n:
            acc[r, c] = ar @ b64[:, c]
    acc += acc_init64[:, None]
    return wrap32(acc)


def matmul_q15_2x2(a, b, bias, quant: QuantParams, out_width: int = 8) -> np.ndarray:
    """out[r][c] = requantize(bias[r] << bls + sum_k A[r][k]*B[k][c]).

    A and B hold q15 values (q7 inputs are valid q15 values and are
    widened on the fly).  Accumulation wraps at 32 bits.
    """
    a64 = np.asarray(a).astype(np.int64)
    b64 = np.asarray(b).astype(np.int64)
    if a64.ndim != 2 or b64.ndim != 2:
        raise ValueError("matmul operands must be 2-d")
    if a64.shape[1] != b64.shape[0]:
        raise ValueError(
            f"inner dimensions disagree: {a64.shape} @ {b64.shape}")
    bias64 = np.asarray(bias).astype(np.int64).reshape(-1)
    if bias64.size != a64.shape[0]:
        raise ValueError("bias length must equal the number of rows")
    init = wrap32(bias64 << quant.bias_left_shift)
    acc = tiled_acc_2x2(a64, b64, init)
    out = requantize(acc, quant.out_right_shift, out_width)
    return out.astype(np.int8 if out_width == 8 else np.int16)
