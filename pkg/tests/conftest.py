import numpy as np
import pytest

from q7nn.kernels import ConvParams
from q7nn.quant import QuantParams
from q7nn.tensor import QTensor


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


def rand_q7(rng, shape):
    return rng.integers(-128, 128, size=shape).astype(np.int8)


def rand_q15(rng, shape):
    return rng.integers(-32768, 32768, size=shape).astype(np.int16)


def rand_q15_small(rng, shape, limit=4096):
    """q15 values bounded so q31 accumulation chains cannot wrap."""
    return rng.integers(-limit, limit + 1, size=shape).astype(np.int16)


def rand_quant(rng, max_shift=8):
    return QuantParams(int(rng.integers(0, 4)),
                       int(rng.integers(0, max_shift + 1)))


def rand_conv_instance(rng, max_dim=16, max_cout=16):
    """Random (tensor, weights, bias, params) with a non-degenerate output."""
    while True:
        h, w = [int(v) for v in rng.integers(1, max_dim + 1, 2)]
        c_in = int(rng.integers(1, max_dim + 1))
        c_out = int(rng.integers(1, max_cout + 1))
        k = int(rng.choice([1, 3, 5]))
        s = int(rng.choice([1, 2]))
        p = int(rng.choice([0, 1, 2]))
        if (h + 2 * p - k) // s + 1 >= 1 and (w + 2 * p - k) // s + 1 >= 1:
            break
    t = QTensor(h, w, c_in, 8, 0, rand_q7(rng, h * w * c_in))
    weights = rand_q7(rng, (c_out, k, k, c_in))
    bias = rand_q7(rng, c_out)
    params = ConvParams(k, s, p, rand_quant(rng))
    return t, weights, bias, params


def rand_pool_instance(rng, max_dim=16):
    """Random (tensor, kernel, stride, pad) with pad < kernel and valid output."""
    while True:
        h, w, c = [int(v) for v in rng.integers(1, max_dim + 1, 3)]
        k = int(rng.choice([1, 2, 3, 5]))
        s = int(rng.choice([1, 2]))
        p = int(rng.integers(0, min(k, 3)))
        if (h + 2 * p - k) // s + 1 >= 1 and (w + 2 * p - k) // s + 1 >= 1:
            break
    t = QTensor(h, w, c, 8, 0, rand_q7(rng, h * w * c))
    return t, k, s, p
