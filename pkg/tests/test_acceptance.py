"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Randomized-equivalence criteria use fixed seeds so the suite is
reproducible.
"""

import numpy as np
import pytest

from q7nn import graph, kernels, reference
from q7nn.kernels import (ConvParams, activation_lut_apply, avgpool_insitu,
                          build_lut, conv_hwc_q7, deinterleave_1x4,
                          depthwise_conv_hwc_q7, fully_connected_mixed,
                          fully_connected_q7_basic, fully_connected_q7_opt,
                          maxpool_insitu, preprocess_fc_weights_mixed,
                          relu_swar_q7, weight_reorder_1x4)
from q7nn.kernels.act import FUNCS
from q7nn.quant import (q7_to_q15_noreorder, q7_to_q15_ordered,
                        weight_byteswap_preprocess)
from q7nn.tensor import QTensor

from conftest import (rand_conv_instance, rand_pool_instance, rand_q7,
                      rand_q15, rand_quant)

N_KERNEL_CASES = 1000
ROUNDED_OPS = [(4.9, 1e6), (73.7, 1e3), (13.1, 1e6), (18.4, 1e3),
                  (6.6, 1e6), (9.2, 1e3), (20, 1e3)]


def _report(n, label):
    print(f"ACCEPTANCE {n} ({label}): PASS")


def _rounds_to(value, printed, unit):
    digits = len(str(printed).split(".")[1]) if "." in str(printed) else 0
    return round(value / unit, digits) == printed


def test_criterion_1_op_counts():
    model = graph.build_cifar10_model(0)
    per_layer, total = graph.count_ops(model)
    assert per_layer == [4915200, 73728, 13107200, 18432, 6553600, 9216, 20480]
    for ops, (printed, unit) in zip(per_layer, ROUNDED_OPS):
        assert _rounds_to(ops, printed, unit), (ops, printed)
    assert total == 24697856
    assert _rounds_to(total, 24.7, 1e6)
    _report(1, "op-count reproduction")


def test_criterion_2_weight_activation_sizes():
    model = graph.build_cifar10_model(0)
    plan = graph.plan_memory(model)
    weight_kb = plan.weight_bytes / 1024
    assert abs(weight_kb - 87) / 87 <= 0.03, weight_kb
    act_kb = plan.activation_sum_bytes / 1024
    assert abs(act_kb - 55) / 55 <= 0.03, act_kb
    _report(2, "weight/activation size reproduction")


def test_criterion_3_kernel_oracle_equivalence():
    rng = np.random.default_rng(3)
    # fully-connected: basic, 1x4-reordered, and mixed-precision
    for _ in range(N_KERNEL_CASES):
        rows, cols = [int(v) for v in rng.integers(1, 17, 2)]
        w = rand_q7(rng, (rows, cols))
        bias = rand_q7(rng, rows)
        q = rand_quant(rng)
        x = rand_q7(rng, cols)
        expect = reference.ref_fc(x, w, bias, q)
        assert np.array_equal(fully_connected_q7_basic(x, w, bias, q), expect)
        wr = weight_reorder_1x4(w)
        assert np.array_equal(fully_connected_q7_opt(x, wr, bias, q), expect)
        x15 = rand_q15(rng, cols)
        wp = preprocess_fc_weights_mixed(w)
        assert np.array_equal(
            fully_connected_mixed(x15, wp, cols, bias, q),
            reference.ref_fc(x15, w, bias, q, out_width=16))
    # convolution
    for _ in range(N_KERNEL_CASES):
        t, w, b, params = rand_conv_instance(rng, max_dim=16, max_cout=16)
        assert np.array_equal(conv_hwc_q7(t, w, b, params).data,
                              reference.ref_conv(t, w, b, params).data)
    # depthwise convolution
    for _ in range(N_KERNEL_CASES):
        while True:
            h, w_, c = [int(v) for v in rng.integers(1, 17, 3)]
            k = int(rng.choice([1, 3, 5]))
            s = int(rng.choice([1, 2]))
            p = int(rng.choice([0, 1, 2]))
            if (h + 2 * p - k) // s + 1 >= 1 and (w_ + 2 * p - k) // s + 1 >= 1:
                break
        t = QTensor(h, w_, c, 8, 0, rand_q7(rng, h * w_ * c))
        wts = rand_q7(rng, (k, k, c))
        bias = rand_q7(rng, c)
        params = ConvParams(k, s, p, rand_quant(rng))
        assert np.array_equal(
            depthwise_conv_hwc_q7(t, wts, bias, params).data,
            reference.ref_depthwise_conv(t, wts, bias, params).data)
    # pooling
    for _ in range(N_KERNEL_CASES):
        t, k, s, p = rand_pool_instance(rng)
        op = "max" if rng.integers(0, 2) else "avg"
        expect = reference.ref_pool_window(
            QTensor(*t.shape, 8, 0, t.data.copy()), k, s, p, op)
        got = (maxpool_insitu if op == "max" else avgpool_insitu)(t, k, s, p)
        assert np.array_equal(got.data, expect.data)
    # relu: randomized buffers plus the exhaustive per-lane check
    for _ in range(N_KERNEL_CASES):
        buf = rand_q7(rng, int(rng.integers(0, 40)))
        assert np.array_equal(relu_swar_q7(buf.copy()),
                              reference.ref_relu(buf))
    vals = np.arange(-128, 128, dtype=np.int64)
    for lane in range(4):
        arr = np.zeros((256, 4), dtype=np.int8)
        arr[:, lane] = vals
        flat = arr.reshape(-1).copy()
        relu_swar_q7(flat)
        assert np.array_equal(flat, np.maximum(arr.reshape(-1), 0))
    # table-driven activations
    for _ in range(N_KERNEL_CASES):
        func = str(rng.choice(["sigmoid", "tanh"]))
        mode = str(rng.choice(["unified", "two_region"]))
        width = int(rng.choice([8, 16]))
        entries = int(rng.choice([16, 64, 256]))
        interp = bool(rng.integers(0, 2))
        tab = build_lut(func, mode, int(rng.choice([2, 3])), entries, width)
        lim = 1 << (width - 1)
        buf = rng.integers(-lim, lim, int(rng.integers(1, 32))).astype(
            np.int8 if width == 8 else np.int16)
        assert np.array_equal(
            activation_lut_apply(buf.copy(), tab, interp),
            reference.ref_lut_apply(buf.copy(), tab, interp))
    _report(3, "kernel-oracle equivalence, >=1000 cases per kernel")


def test_criterion_4_reordering_contracts():
    rng = np.random.default_rng(4)
    # byte-swap preprocessing + no-reorder expansion preserves order
    for _ in range(200):
        n = 4 * int(rng.integers(1, 33))
        w = rand_q7(rng, n)
        assert np.array_equal(
            q7_to_q15_noreorder(weight_byteswap_preprocess(w)),
            q7_to_q15_ordered(w))
    assert list(q7_to_q15_noreorder(weight_byteswap_preprocess(
        np.array([1, 2, 3, 4], dtype=np.int8)))) == [1, 2, 3, 4]
    # deinterleave inverts the 1x4 reorder, and opt == basic on every
    # row/col residue mod 4
    for dr in range(4):
        for dc in range(4):
            for trial in range(10):
                rows, cols = 4 + dr + 4 * trial % 8, 4 + dc + 4 * (trial % 3)
                w = rand_q7(rng, (rows, cols))
                wr = weight_reorder_1x4(w)
                assert np.array_equal(deinterleave_1x4(wr), w)
                x = rand_q7(rng, cols)
                bias = rand_q7(rng, rows)
                q = rand_quant(rng)
                assert np.array_equal(
                    fully_connected_q7_opt(x, wr, bias, q),
                    fully_connected_q7_basic(x, w, bias, q))
    _report(4, "reordering contracts")


def test_criterion_5_partial_im2col_equivalence_and_footprint():
    rng = np.random.default_rng(5)
    for _ in range(200):
        t, w, b, params = rand_conv_instance(rng, max_dim=10, max_cout=6)
        oh, ow = params.out_hw(t.height, t.width)
        total = oh * ow
        full = ConvParams(params.kernel_size, params.stride, params.pad,
                          params.quant, total + total % 2)
        assert np.array_equal(conv_hwc_q7(t, w, b, params).data,
                              conv_hwc_q7(t, w, b, full).data)
    model = graph.build_cifar10_model(0)
    partial = graph.plan_memory(model, 2)
    fullplan = graph.plan_memory(model, 2, full_im2col=True)
    assert partial.peak_bytes < fullplan.peak_bytes
    for row, layer in zip(partial.layers, model.layers):
        if layer.kind == "conv":
            kkc = layer.kernel_size ** 2 * layer.in_shape[2]
            patches = layer.out_shape[0] * layer.out_shape[1]
            assert row.scratch_partial == 2 * kkc * 2
            assert row.scratch_full == patches * kkc * 2
    assert partial.layers[0].scratch_partial == 300
    assert partial.layers[0].scratch_full == 153600
    _report(5, "partial column expansion: equivalence and footprint")


def test_criterion_6_pooling_equivalence():
    rng = np.random.default_rng(6)
    seen_padded = 0
    for i in range(N_KERNEL_CASES):
        t, k, s, p = rand_pool_instance(rng)
        if i % 3 == 0 and k > 1:
            p = max(p, 1)  # force borders with padding
        if (t.height + 2 * p - k) // s + 1 < 1 or \
                (t.width + 2 * p - k) // s + 1 < 1:
            continue
        seen_padded += p > 0
        for op in ("max", "avg"):
            expect = reference.ref_pool_window(
                QTensor(*t.shape, 8, 0, t.data.copy()), k, s, p, op)
            got = (maxpool_insitu if op == "max" else avgpool_insitu)(
                QTensor(*t.shape, 8, 0, t.data.copy()), k, s, p)
            assert np.array_equal(got.data, expect.data)
    assert seen_padded > 100
    _report(6, "in-situ split x-y pooling equivalence")


def _lut_sweep_error(func, mode, entries, width, interp):
    tab = build_lut(func, mode, 3, entries, width)
    f = FUNCS[func]
    fb = tab.input_frac_bits
    lim = 1 << (width - 1)
    xs = np.linspace(-8, 8, 100001)
    v = np.clip(np.floor(xs * (1 << fb) + 0.5), -lim, lim - 1)
    buf = v.astype(np.int8 if width == 8 else np.int16)
    activation_lut_apply(buf, tab, interpolate=interp)
    approx = buf.astype(np.float64) / (1 << (width - 1))
    exact = np.array([f(float(t)) for t in xs])
    return float(np.abs(approx - exact).max())


def test_criterion_7_lut_accuracy():
    lsb = 1 / 128
    # unified 256-entry q7 table: within 2 LSB of q0.7
    err = _lut_sweep_error("sigmoid", "unified", 256, 8, False)
    assert err <= 2 * lsb, err
    # interpolated and two-region modes: within 1 LSB for both functions
    for func in ("sigmoid", "tanh"):
        err = _lut_sweep_error(func, "unified", 256, 16, True)
        assert err <= lsb, (func, "interpolated", err)
        err = _lut_sweep_error(func, "two_region", 2048, 16, False)
        assert err <= lsb, (func, "two_region", err)
    _report(7, "lookup-table activation accuracy")


def test_criterion_8_end_to_end_pipeline():
    model = graph.build_cifar10_model(8)
    for seed in range(100):
        inp = graph.random_input(model, seed)
        opt = graph.run(model, inp)
        ref = graph.run(model, inp, use_reference=True)
        assert np.array_equal(opt.output, ref.output), seed
        assert opt.argmax == ref.argmax
        assert opt.output.size == 10
    _report(8, "end-to-end pipeline equivalence, 100 inputs")
