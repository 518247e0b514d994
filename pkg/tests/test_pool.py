import numpy as np
import pytest

from q7nn.kernels import avgpool_insitu, maxpool_insitu
from q7nn.reference import ref_pool_window
from q7nn.tensor import QTensor

from conftest import rand_pool_instance, rand_q7


def test_max_1d_example():
    t = QTensor(1, 4, 1, 8, 0, np.array([1, 3, 2, 5], dtype=np.int8))
    out = maxpool_insitu(t, (1, 2), (1, 2))
    assert list(out.data) == [3, 5]
    assert out.data.base is t.data  # written over the front of the input


def test_avg_1d_example():
    t = QTensor(1, 4, 1, 8, 0, np.array([4, 2, 6, 0], dtype=np.int8))
    out = avgpool_insitu(t, (1, 2), (1, 2))
    assert list(out.data) == [3, 3]


def test_constant_tensor_stays_constant():
    t = QTensor(6, 6, 3, 8, 0, np.full(108, 11, dtype=np.int8))
    out = maxpool_insitu(t, 3, 2, 1)
    assert (out.data == 11).all()
    t = QTensor(6, 6, 3, 8, 0, np.full(108, 12, dtype=np.int8))
    out = avgpool_insitu(t, 2, 2, 0)
    assert (out.data == 12).all()


def test_cifar10_pool_shape_and_oracle(rng):
    data = rand_q7(rng, 32 * 32 * 32)
    t = QTensor(32, 32, 32, 8, 0, data.copy())
    expect = ref_pool_window(QTensor(32, 32, 32, 8, 0, data.copy()),
                             3, 2, 1, "max")
    out = maxpool_insitu(t, 3, 2, 1)
    assert out.shape == (16, 16, 32)
    assert np.array_equal(out.data, expect.data)


def test_max_matches_oracle_random(rng):
    for _ in range(150):
        t, k, s, p = rand_pool_instance(rng, max_dim=14)
        expect = ref_pool_window(
            QTensor(*t.shape, 8, 0, t.data.copy()), k, s, p, "max")
        out = maxpool_insitu(t, k, s, p)
        assert np.array_equal(out.data, expect.data), (t.shape, k, s, p)


def test_avg_matches_oracle_random(rng):
    for _ in range(150):
        t, k, s, p = rand_pool_instance(rng, max_dim=14)
        expect = ref_pool_window(
            QTensor(*t.shape, 8, 0, t.data.copy()), k, s, p, "avg")
        out = avgpool_insitu(t, k, s, p)
        assert np.array_equal(out.data, expect.data), (t.shape, k, s, p)


def test_overlapping_windows_stride1(rng):
    # stride < kernel exercises the row snapshot path
    for k, p in [(3, 0), (3, 1), (3, 2), (5, 2), (2, 1)]:
        data = rand_q7(rng, 9 * 9 * 3)
        t = QTensor(9, 9, 3, 8, 0, data.copy())
        expect = ref_pool_window(QTensor(9, 9, 3, 8, 0, data.copy()),
                                 k, 1, p, "max")
        out = maxpool_insitu(t, k, 1, p)
        assert np.array_equal(out.data, expect.data), (k, p)


def test_avg_rounding_rule():
    t = QTensor(1, 4, 1, 8, 0, np.array([1, 2, -1, -2], dtype=np.int8))
    out = avgpool_insitu(t, (1, 2), (1, 2))
    # (1+2+1)//2 = 2 ; (-3+1)//2 = -1 : half rounds toward +inf
    assert list(out.data) == [2, -1]


def test_invalid_geometry_rejected(rng):
    t = QTensor(4, 4, 1, 8, 0, rand_q7(rng, 16))
    with pytest.raises(ValueError):
        maxpool_insitu(t, 3, 2, 3)          # pad >= window
    with pytest.raises(ValueError):
        maxpool_insitu(t, 5, 1, 0)          # degenerate output
    with pytest.raises(ValueError):
        avgpool_insitu(t, 0, 1, 0)
    t16 = QTensor(4, 4, 1, 16, 0)
    with pytest.raises(ValueError):
        maxpool_insitu(t16, 2, 2, 0)


def test_exhaustive_small_geometry_lattice(rng):
    """Every (h, w, k, s, p) combination on a small lattice, both ops."""
    checked = 0
    for h in range(1, 7):
        for w in range(1, 7):
            for k in (1, 2, 3):
                for s in (1, 2):
                    for p in range(k):
                        if (h + 2 * p - k) // s + 1 < 1:
                            continue
                        if (w + 2 * p - k) // s + 1 < 1:
                            continue
                        data = rand_q7(rng, h * w * 3)
                        for op in ("max", "avg"):
                            t = QTensor(h, w, 3, 8, 0, data.copy())
                            expect = ref_pool_window(
                                QTensor(h, w, 3, 8, 0, data.copy()),
                                k, s, p, op)
                            got = (maxpool_insitu if op == "max"
                                   else avgpool_insitu)(t, k, s, p)
                            assert np.array_equal(got.data, expect.data), \
                                (h, w, k, s, p, op)
                            checked += 1
    assert checked > 500


def test_growth_geometry_still_matches_oracle(rng):
    # pad-driven output growth cannot be compacted in place; the kernel
    # must still produce oracle-equal values
    data = rand_q7(rng, 3 * 3 * 5)
    t = QTensor(3, 3, 5, 8, 0, data.copy())
    expect = ref_pool_window(QTensor(3, 3, 5, 8, 0, data.copy()),
                             3, 1, 2, "avg")
    out = avgpool_insitu(t, 3, 1, 2)
    assert out.shape == expect.shape
    assert np.array_equal(out.data, expect.data)
