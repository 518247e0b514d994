"""CSV and figure rendering for the CLI report paths."""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_plan_figures(plan_partial, plan_full, outdir) -> list[str]:
    names = [l.name or l.kind for l in plan_partial.layers]
    x = np.arange(len(names))
    paths = []

    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.bar(x, [l.ops for l in plan_partial.layers], color="#4878d0")
    ax.set_xticks(x, names, rotation=30, ha="right")
    ax.set_yscale("log")
    ax.set_ylabel("ops")
    ax.set_title("Per-layer operation counts")
    p = os.path.join(outdir, "plan_ops.png")
    _finish(fig, p)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(7, 3.5))
    width = 0.35
    ax.bar(x - width / 2, [l.scratch_partial for l in plan_partial.layers],
           width, label=f"partial ({plan_partial.partial_cols} cols)",
           color="#4878d0")
    ax.bar(x + width / 2, [l.scratch_full for l in plan_partial.layers],
           width, label="full expansion", color="#d65f5f")
    ax.set_xticks(x, names, rotation=30, ha="right")
    ax.set_yscale("symlog")
    ax.set_ylabel("scratch bytes")
    ax.set_title(
        f"Column scratch: partial peak {plan_partial.peak_bytes} B "
        f"vs full peak {plan_full.peak_bytes} B")
    ax.legend()
    p = os.path.join(outdir, "plan_memory.png")
    _finish(fig, p)
    paths.append(p)
    return paths


def save_bench_figure(rows, outdir) -> str:
    """rows: (name, kind, baseline_s, optimized_s, ratio)."""
    names = [r[0] for r in rows]
    x = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(7, 3.5))
    width = 0.35
    ax.bar(x - width / 2, [r[2] * 1e3 for r in rows], width,
           label="baseline", color="#d65f5f")
    ax.bar(x + width / 2, [r[3] * 1e3 for r in rows], width,
           label="optimized", color="#4878d0")
    ax.set_xticks(x, names, rotation=30, ha="right")
    ax.set_ylabel("ms per run")
    ax.set_yscale("log")
    ax.set_title("Per-layer runtime, baseline vs optimized")
    ax.legend()
    p = os.path.join(outdir, "bench_runtime.png")
    _finish(fig, p)
    return p


def save_lut_figure(xs, approx, exact, outdir, label) -> str:
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    ax0.plot(xs, exact, lw=1.0, label="exact", color="#444444")
    ax0.plot(xs, approx, lw=0.8, label="table", color="#4878d0")
    ax0.set_ylabel(label)
    ax0.legend()
    ax1.plot(xs, np.abs(np.asarray(approx) - np.asarray(exact)),
             lw=0.8, color="#d65f5f")
    ax1.set_ylabel("abs error")
    ax1.set_xlabel("input")
    p = os.path.join(outdir, f"lut_{label}_error.png")
    _finish(fig, p)
    return p
