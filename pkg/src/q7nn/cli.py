"""Command-line interface: run, plan, bench and gen-tables."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import fileio, graph, report
from .fileio import FileFormatError
from .graph import Model, ModelError
from .kernels import activation_lut_apply, build_lut
from .kernels.act import FUNCS
from .tensor import QTensor

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_DIVERGENCE = 4

_RANDOM_MODELS = {
    "cifar10": graph.build_cifar10_model,
    "tiny": graph.build_tiny_model,
}


def _fmt_bytes(n: int) -> str:
    return f"{n} B ({n / 1024:.1f} KB)"


def _fmt_ops(n: int) -> str:
    if n >= 1e6:
        return f"{n / 1e6:.1f} M"
    if n >= 1e3:
        return f"{n / 1e3:.1f} K"
    return str(n)


def _load_or_generate_model(args) -> Model:
    if getattr(args, "random_model", None):
        spec = args.random_model
        name, _, seed = spec.partition(":")
        if name not in _RANDOM_MODELS:
            raise ValueError(
                f"unknown random model {name!r}; choose from "
                f"{sorted(_RANDOM_MODELS)}")
        return _RANDOM_MODELS[name](int(seed) if seed else 0)
    if not args.model:
        raise ValueError("either --model or --random-model is required")
    return graph.load_model(args.model)


def cmd_run(args) -> int:
    model = _load_or_generate_model(args)
    if args.input:
        inp = fileio.load_input_image(args.input)
    elif getattr(args, "random_model", None):
        inp = graph.random_input(model, args.seed)
    else:
        raise ValueError("--input is required unless --random-model is used")
    result = graph.run(model, inp, partial_cols=args.partial_cols)
    print(f"{'layer':<10} {'kind':<16} {'out_shape':<12} ops")
    for lr in result.layers:
        shape = "x".join(str(v) for v in lr.out_shape)
        print(f"{lr.name:<10} {lr.kind:<16} {shape:<12} {lr.ops}")
    _, total = graph.count_ops(model)
    print(f"total ops: {total} ({_fmt_ops(total)})")
    print("logits:", " ".join(str(int(v)) for v in result.output))
    print("argmax:", result.argmax)
    if args.oracle:
        oracle = graph.run(model, inp, use_reference=True)
        if np.array_equal(oracle.output, result.output):
            print("oracle check: MATCH")
        else:
            print("oracle check: MISMATCH", file=sys.stderr)
            return EXIT_DIVERGENCE
    return EXIT_OK


def cmd_plan(args) -> int:
    model = _load_or_generate_model(args)
    partial = graph.plan_memory(model, partial_cols=args.partial_cols)
    full = graph.plan_memory(model, partial_cols=args.partial_cols,
                             full_im2col=True)
    chosen = full if args.full_im2col else partial
    print(f"{'layer':<10} {'kind':<16} {'ops':>12} {'weights':>9} "
          f"{'in':>8} {'out':>8} {'scratch':>9}")
    for row in chosen.layers:
        print(f"{row.name:<10} {row.kind:<16} {row.ops:>12} "
              f"{row.weight_bytes:>9} {row.in_bytes:>8} {row.out_bytes:>8} "
              f"{row.scratch_bytes:>9}")
    print(f"total ops:            {chosen.total_ops} ({_fmt_ops(chosen.total_ops)})")
    print(f"weights:              {_fmt_bytes(chosen.weight_bytes)}")
    print(f"activations (sum):    {_fmt_bytes(chosen.activation_sum_bytes)}")
    print(f"activation pair peak: {_fmt_bytes(chosen.activation_pair_peak)}")
    print(f"column scratch:       {_fmt_bytes(chosen.scratch_bytes)}")
    print(f"runtime peak:         {_fmt_bytes(chosen.peak_bytes)}")
    print(f"peak partial={partial.peak_bytes} B vs full={full.peak_bytes} B")
    if args.report_dir:
        os.makedirs(args.report_dir, exist_ok=True)
        csv_path = os.path.join(args.report_dir, "plan.csv")
        report.write_csv(
            csv_path,
            ["layer", "kind", "ops", "weight_bytes", "in_bytes", "out_bytes",
             "scratch_partial", "scratch_full"],
            [(r.name, r.kind, r.ops, r.weight_bytes, r.in_bytes, r.out_bytes,
              r.scratch_partial, r.scratch_full) for r in chosen.layers])
        figures = report.save_plan_figures(partial, full, args.report_dir)
        print("report written:", ", ".join([csv_path] + figures))
    return EXIT_OK


def cmd_bench(args) -> int:
    model = _load_or_generate_model(args)
    inp = graph.random_input(model, args.seed)
    base = graph.run(model, inp, use_reference=True)
    opt = graph.run(model, inp, partial_cols=args.partial_cols)
    if not np.array_equal(base.output, opt.output):
        print("baseline and optimized outputs disagree", file=sys.stderr)
        return EXIT_DIVERGENCE
    n = len(model.layers)
    base_s = np.zeros(n)
    opt_s = np.zeros(n)
    for _ in range(args.iters):
        r = graph.run(model, inp, use_reference=True)
        base_s += [lr.seconds for lr in r.layers]
        r = graph.run(model, inp, partial_cols=args.partial_cols)
        opt_s += [lr.seconds for lr in r.layers]
    base_s /= args.iters
    opt_s /= args.iters
    rows = []
    print(f"{'layer':<10} {'kind':<16} {'baseline ms':>12} "
          f"{'optimized ms':>13} {'ratio':>7}")
    for i, layer in enumerate(model.layers):
        ratio = base_s[i] / opt_s[i] if opt_s[i] > 0 else float("inf")
        rows.append((layer.name, layer.kind, base_s[i], opt_s[i], ratio))
        print(f"{layer.name:<10} {layer.kind:<16} {base_s[i] * 1e3:>12.3f} "
              f"{opt_s[i] * 1e3:>13.3f} {ratio:>7.2f}")
    tb, to = base_s.sum(), opt_s.sum()
    print(f"{'total':<10} {'':<16} {tb * 1e3:>12.3f} {to * 1e3:>13.3f} "
          f"{tb / to if to else float('inf'):>7.2f}")
    print("note: ratios are informational; timings are host-specific")
    if args.report_dir:
        os.makedirs(args.report_dir, exist_ok=True)
        csv_path = os.path.join(args.report_dir, "bench.csv")
        report.write_csv(
            csv_path,
            ["layer", "kind", "baseline_s", "optimized_s", "ratio"], rows)
        fig = report.save_bench_figure(rows, args.report_dir)
        print("report written:", csv_path + ", " + fig)
    return EXIT_OK


def cmd_gen_tables(args) -> int:
    table = build_lut(args.func, args.mode, args.range_pow, args.entries,
                      args.width)
    fileio.save_lut_blob(args.out, table)
    # dense sweep against the double-precision function
    f = FUNCS[args.func]
    fb = table.input_frac_bits
    lim = 1 << (args.width - 1)
    xs = np.linspace(-(1 << args.range_pow), (1 << args.range_pow), 100001)
    v = np.clip(np.floor(xs * (1 << fb) + 0.5), -lim, lim - 1)
    buf = v.astype(np.int8 if args.width == 8 else np.int16)
    activation_lut_apply(buf, table, interpolate=args.interpolate)
    approx = buf.astype(np.float64) / (1 << (args.width - 1))
    exact = np.array([f(float(t)) for t in xs])
    err = float(np.abs(approx - exact).max())
    print(f"wrote {args.out}: {args.func} {args.mode} "
          f"range=[-{1 << args.range_pow},{1 << args.range_pow}] "
          f"entries={args.entries} width=q{args.width - 1}")
    print(f"max abs error vs exact function: {err:.6f} "
          f"({err * (1 << (args.width - 1)):.2f} LSB)")
    if args.report_dir:
        os.makedirs(args.report_dir, exist_ok=True)
        csv_path = os.path.join(args.report_dir, "lut_sweep.csv")
        report.write_csv(csv_path, ["x", "table", "exact"],
                         zip(xs, approx, exact))
        fig = report.save_lut_figure(xs, approx, exact, args.report_dir,
                                     args.func)
        print("report written:", csv_path + ", " + fig)
    return EXIT_OK


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", help="model directory or model.json path")
    p.add_argument("--random-model", metavar="SPEC",
                   help="generate a model instead: cifar10[:SEED] or tiny[:SEED]")
    p.add_argument("--partial-cols", type=int, default=2,
                   help="columns expanded per convolution step (even, >= 2)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for generated inputs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="q7nn",
        description="Fixed-point q7/q15 NN inference kernels and tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run inference and print logits")
    _add_model_args(p)
    p.add_argument("--input", help="raw q7 HWC image file")
    p.add_argument("--oracle", action="store_true",
                   help="re-run through the reference oracles and compare")
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("plan", help="print the op/memory report")
    _add_model_args(p)
    p.add_argument("--full-im2col", action="store_true",
                   help="report the full column-expansion strategy")
    p.add_argument("--report-dir", help="write CSV and figures here")
    p.set_defaults(handler=cmd_plan)

    p = sub.add_parser("bench", help="time optimized kernels vs baseline")
    _add_model_args(p)
    p.add_argument("--iters", type=int, default=3)
    p.add_argument("--report-dir", help="write CSV and figures here")
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("gen-tables", help="generate an activation table blob")
    p.add_argument("--func", required=True, choices=sorted(FUNCS))
    p.add_argument("--mode", required=True, choices=["unified", "two_region"])
    p.add_argument("--range", dest="range_pow", type=int, default=8,
                   choices=[4, 8], help="half range (4 or 8)")
    p.add_argument("--entries", type=int, required=True)
    p.add_argument("--width", type=int, default=8, choices=[8, 16])
    p.add_argument("--interpolate", action="store_true",
                   help="sweep with low-bit linear interpolation")
    p.add_argument("--out", required=True)
    p.add_argument("--report-dir", help="write CSV and figures here")
    p.set_defaults(handler=cmd_gen_tables)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "range_pow"):
        args.range_pow = {4: 2, 8: 3}[args.range_pow]
    try:
        return args.handler(args)
    except (OSError, EOFError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ModelError, FileFormatError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
