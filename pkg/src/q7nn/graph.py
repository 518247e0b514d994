"""Network description, op counting, memory planning and execution.

A ``Model`` is an ordered list of ``LayerSpec``s plus the input geometry.
``run`` executes it sequentially through the optimized kernels (or, with
``use_reference=True``, through the brute-force oracles) and reports
per-layer op counts and wall times.  ``plan_memory`` produces the static
footprint accounting: weight store, activation double-buffer peak (in
place layers reuse their input buffer) and the column-expansion scratch,
for both the partial and the full expansion strategy.

On disk a model is a ``model.json`` manifest next to a ``weights.bin``
blob file (little-endian q7 values; convolution filters stored in
(C_out, K, K, C_in) order, fully-connected matrices row-major, biases as
q7).  A per-layer flag records whether an fc blob is stored in the 1x4
streaming layout.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels, reference
from .kernels import ConvParams
from .quant import QuantParams, validate_scale_chain
from .tensor import QTensor

LAYER_KINDS = ("conv", "depthwise_conv", "maxpool", "avgpool",
               "fully_connected", "relu", "sigmoid", "tanh")

_POOL_KINDS = ("maxpool", "avgpool")
_ACT_KINDS = ("relu", "sigmoid", "tanh")
_WEIGHT_KINDS = ("conv", "depthwise_conv", "fully_connected")

MODEL_FORMAT = "q7nn-model"
WEIGHTS_FILENAME = "weights.bin"
MANIFEST_FILENAME = "model.json"

LUT_ENTRIES = 256   # runner's sigmoid/tanh tables: unified q7 over [-8, 8)


class ModelError(Exception):
    """Base class for model container problems."""


class ManifestError(ModelError):
    """Malformed or inconsistent manifest."""


class BlobSizeError(ModelError):
    """Weight blob does not match the declared layer shapes."""


class UnknownLayerError(ModelError):
    """Layer kind not supported by this runtime."""


@dataclass
class LayerSpec:
    kind: str
    name: str = ""
    kernel_size: int = 0
    stride: int = 1
    pad: int = 0
    out_channels: int = 0
    in_shape: tuple[int, int, int] = (0, 0, 0)
    out_shape: tuple[int, int, int] = (0, 0, 0)
    frac_bits: int = 0
    bias_left_shift: int = 0
    out_right_shift: int = 0
    weights: np.ndarray | None = None
    bias: np.ndarray | None = None
    fc_reordered: bool = False
    # optional scale bookkeeping; when declared, validation checks the
    # power-of-two chain in_frac + w_frac == bias_frac + bls == out_frac + ors
    weight_frac_bits: int | None = None
    bias_frac_bits: int | None = None

    @property
    def quant(self) -> QuantParams:
        return QuantParams(self.bias_left_shift, self.out_right_shift)

    def expected_out_shape(self) -> tuple[int, int, int]:
        h, w, c = self.in_shape
        if self.kind == "conv":
            oh = kernels.conv_out_dim(h, self.kernel_size, self.stride, self.pad)
            ow = kernels.conv_out_dim(w, self.kernel_size, self.stride, self.pad)
            return (oh, ow, self.out_channels)
        if self.kind == "depthwise_conv":
            oh = kernels.conv_out_dim(h, self.kernel_size, self.stride, self.pad)
            ow = kernels.conv_out_dim(w, self.kernel_size, self.stride, self.pad)
            return (oh, ow, c)
        if self.kind in _POOL_KINDS:
            oh = kernels.conv_out_dim(h, self.kernel_size, self.stride, self.pad)
            ow = kernels.conv_out_dim(w, self.kernel_size, self.stride, self.pad)
            return (oh, ow, c)
        if self.kind == "fully_connected":
            return (1, 1, self.out_channels)
        return (h, w, c)

    def weight_shape(self) -> tuple[int, ...] | None:
        h, w, c = self.in_shape
        if self.kind == "conv":
            return (self.out_channels, self.kernel_size, self.kernel_size, c)
        if self.kind == "depthwise_conv":
            return (self.kernel_size, self.kernel_size, c)
        if self.kind == "fully_connected":
            return (self.out_channels, h * w * c)
        return None

    def weight_bytes(self) -> int:
        shape = self.weight_shape()
        return int(np.prod(shape)) if shape else 0

    def bias_len(self) -> int:
        if self.kind in ("conv", "fully_connected"):
            return self.out_channels
        if self.kind == "depthwise_conv":
            return self.in_shape[2]
        return 0


@dataclass
class Model:
    input_shape: tuple[int, int, int]
    input_frac_bits: int = 0
    layers: list[LayerSpec] = field(default_factory=list)

    def validate(self) -> None:
        shape = tuple(self.input_shape)
        frac = self.input_frac_bits
        for i, layer in enumerate(self.layers):
            if layer.kind not in LAYER_KINDS:
                raise UnknownLayerError(f"layer {i}: unknown kind {layer.kind!r}")
            if tuple(layer.in_shape) != shape:
                raise ManifestError(
                    f"layer {i} ({layer.name}): input shape {layer.in_shape} "
                    f"does not chain from {shape}")
            expect = layer.expected_out_shape()
            if tuple(layer.out_shape) != expect:
                raise ManifestError(
                    f"layer {i} ({layer.name}): declared output {layer.out_shape} "
                    f"!= computed {expect}")
            wshape = layer.weight_shape()
            if wshape is not None:
                if layer.weights is None or tuple(layer.weights.shape) != wshape:
                    raise ManifestError(
                        f"layer {i} ({layer.name}): weights missing or misshaped")
                if layer.bias is None or layer.bias.size != layer.bias_len():
                    raise ManifestError(
                        f"layer {i} ({layer.name}): bias missing or misshaped")
                if layer.weight_frac_bits is not None and \
                        layer.bias_frac_bits is not None:
                    try:
                        validate_scale_chain(frac, layer.weight_frac_bits,
                                             layer.bias_frac_bits,
                                             layer.frac_bits, layer.quant)
                    except ValueError as exc:
                        raise ManifestError(
                            f"layer {i} ({layer.name}): {exc}") from exc
            shape = expect
            frac = layer.frac_bits

    @property
    def output_size(self) -> int:
        if not self.layers:
            return int(np.prod(self.input_shape))
        return int(np.prod(self.layers[-1].out_shape))

    def total_weight_bytes(self) -> int:
        return sum(l.weight_bytes() for l in self.layers)


def count_ops(model: Model) -> tuple[list[int], int]:
    """Per-layer and total op counts (2 ops per MAC; one op per compare
    or lookup for pooling and activations)."""
    per_layer = []
    for layer in model.layers:
        oh, ow, oc = layer.out_shape
        h, w, c = layer.in_shape
        k = layer.kernel_size
        if layer.kind == "conv":
            ops = 2 * k * k * c * oh * ow * oc
        elif layer.kind == "depthwise_conv":
            ops = 2 * k * k * oh * ow * c
        elif layer.kind == "fully_connected":
            ops = 2 * (h * w * c) * oc
        elif layer.kind in _POOL_KINDS:
            ops = oh * ow * oc * k * k
        else:
            ops = h * w * c
        per_layer.append(int(ops))
    return per_layer, int(sum(per_layer))


@dataclass
class LayerPlan:
    name: str
    kind: str
    ops: int
    in_bytes: int
    out_bytes: int
    weight_bytes: int
    bias_bytes: int
    scratch_bytes: int      # selected strategy
    scratch_partial: int
    scratch_full: int
    in_place: bool


@dataclass
class MemoryPlan:
    partial_cols: int
    full_im2col: bool
    layers: list[LayerPlan]
    weight_bytes: int
    bias_bytes: int
    activation_sum_bytes: int     # sum of per-layer output sizes
    activation_pair_peak: int     # largest simultaneous in+out pair
    scratch_bytes: int            # column-expansion scratch (max over convs)
    total_ops: int

    @property
    def peak_bytes(self) -> int:
        """Peak runtime activation memory: buffers plus expansion scratch."""
        return self.activation_pair_peak + self.scratch_bytes


def plan_memory(model: Model, partial_cols: int = 2,
                full_im2col: bool = False) -> MemoryPlan:
    ops, total_ops = count_ops(model)
    rows: list[LayerPlan] = []
    pair_peak = 0
    act_sum = 0
    scratch_max = 0
    for layer, layer_ops in zip(model.layers, ops):
        in_bytes = int(np.prod(layer.in_shape))
        out_bytes = int(np.prod(layer.out_shape))
        k = layer.kernel_size
        c_in = layer.in_shape[2]
        if layer.kind == "conv":
            patches = layer.out_shape[0] * layer.out_shape[1]
            scr_partial = partial_cols * k * k * c_in * 2
            scr_full = patches * k * k * c_in * 2
        else:
            scr_partial = scr_full = 0
        scratch = scr_full if full_im2col else scr_partial
        in_place = layer.kind in _POOL_KINDS or layer.kind in _ACT_KINDS
        need = in_bytes if in_place else in_bytes + out_bytes
        pair_peak = max(pair_peak, need)
        act_sum += out_bytes
        scratch_max = max(scratch_max, scratch)
        rows.append(LayerPlan(
            layer.name, layer.kind, layer_ops, in_bytes, out_bytes,
            layer.weight_bytes(), layer.bias_len(), scratch,
            scr_partial, scr_full, in_place))
    return MemoryPlan(
        partial_cols=partial_cols, full_im2col=full_im2col, layers=rows,
        weight_bytes=model.total_weight_bytes(),
        bias_bytes=sum(l.bias_len() for l in model.layers),
        activation_sum_bytes=act_sum, activation_pair_peak=pair_peak,
        scratch_bytes=scratch_max, total_ops=total_ops)


@dataclass
class LayerRun:
    name: str
    kind: str
    ops: int
    seconds: float
    out_shape: tuple[int, int, int]


@dataclass
class RunResult:
    output: np.ndarray
    layers: list[LayerRun]

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.output))

    @property
    def total_seconds(self) -> float:
        return sum(l.seconds for l in self.layers)


def _run_layer_kernels(layer: LayerSpec, cur: QTensor,
                       partial_cols: int) -> QTensor:
    quant = layer.quant
    if layer.kind == "conv":
        params = ConvParams(layer.kernel_size, layer.stride, layer.pad,
                            quant, partial_cols)
        return kernels.conv_hwc_q7(cur, layer.weights, layer.bias, params,
                                   layer.frac_bits)
    if layer.kind == "depthwise_conv":
        params = ConvParams(layer.kernel_size, layer.stride, layer.pad, quant)
        return kernels.depthwise_conv_hwc_q7(cur, layer.weights, layer.bias,
                                             params, layer.frac_bits)
    if layer.kind == "maxpool":
        return kernels.maxpool_insitu(cur, layer.kernel_size, layer.stride,
                                      layer.pad)
    if layer.kind == "avgpool":
        return kernels.avgpool_insitu(cur, layer.kernel_size, layer.stride,
                                      layer.pad)
    if layer.kind == "fully_connected":
        x = cur.data
        if layer.fc_reordered:
            wr = kernels.weight_reorder_1x4(layer.weights)
            y = kernels.fully_connected_q7_opt(x, wr, layer.bias, quant)
        else:
            y = kernels.fully_connected_q7_basic(x, layer.weights, layer.bias,
                                                 quant)
        return QTensor(1, 1, y.size, 8, layer.frac_bits, y)
    if layer.kind == "relu":
        kernels.relu_swar_q7(cur.data)
        return cur
    # sigmoid / tanh
    table = kernels.build_lut(layer.kind, "unified", 3, LUT_ENTRIES, 8)
    kernels.activation_lut_apply(cur.data, table,
                                 frac_bits=min(cur.frac_bits, 7))
    return replace(cur, frac_bits=7)


def _run_layer_reference(layer: LayerSpec, cur: QTensor) -> QTensor:
    quant = layer.quant
    if layer.kind == "conv":
        params = ConvParams(layer.kernel_size, layer.stride, layer.pad, quant)
        return reference.ref_conv(cur, layer.weights, layer.bias, params,
                                  layer.frac_bits)
    if layer.kind == "depthwise_conv":
        params = ConvParams(layer.kernel_size, layer.stride, layer.pad, quant)
        return reference.ref_depthwise_conv(cur, layer.weights, layer.bias,
                                            params, layer.frac_bits)
    if layer.kind in _POOL_KINDS:
        op = "max" if layer.kind == "maxpool" else "avg"
        return reference.ref_pool_window(cur, layer.kernel_size, layer.stride,
                                         layer.pad, op)
    if layer.kind == "fully_connected":
        y = reference.ref_fc(cur.data, layer.weights, layer.bias, quant)
        return QTensor(1, 1, y.size, 8, layer.frac_bits, y)
    if layer.kind == "relu":
        return QTensor(cur.height, cur.width, cur.channels, 8, cur.frac_bits,
                       reference.ref_relu(cur.data))
    table = kernels.build_lut(layer.kind, "unified", 3, LUT_ENTRIES, 8)
    y = reference.ref_lut_apply(cur.data, table,
                                frac_bits=min(cur.frac_bits, 7))
    return QTensor(cur.height, cur.width, cur.channels, 8, 7, y)


def run(model: Model, inp: QTensor, partial_cols: int = 2,
        use_reference: bool = False) -> RunResult:
    """Execute the model; the caller's input tensor is never modified."""
    model.validate()
    if tuple(inp.shape) != tuple(model.input_shape):
        raise ValueError(
            f"input shape {inp.shape} != model input {model.input_shape}")
    ops, _ = count_ops(model)
    cur = QTensor(inp.height, inp.width, inp.channels, inp.elem_width,
                  inp.frac_bits, inp.data.copy())
    trace: list[LayerRun] = []
    for layer, layer_ops in zip(model.layers, ops):
        t0 = time.perf_counter()
        if use_reference:
            cur = _run_layer_reference(layer, cur)
        else:
            cur = _run_layer_kernels(layer, cur, partial_cols)
        dt = time.perf_counter() - t0
        trace.append(LayerRun(layer.name, layer.kind, layer_ops, dt,
                              tuple(cur.shape)))
    return RunResult(cur.data.copy(), trace)


# ---------------------------------------------------------------------------
# serialization

def save_model(model: Model, directory) -> None:
    """Write model.json plus weights.bin into ``directory``."""
    os.makedirs(directory, exist_ok=True)
    blobs = []
    offset = 0
    manifest_layers = []
    for layer in model.layers:
        entry = {
            "name": layer.name,
            "kind": layer.kind,
            "kernel_size": layer.kernel_size,
            "stride": layer.stride,
            "pad": layer.pad,
            "out_channels": layer.out_channels,
            "in_shape": list(layer.in_shape),
            "out_shape": list(layer.out_shape),
            "frac_bits": layer.frac_bits,
            "bias_left_shift": layer.bias_left_shift,
            "out_right_shift": layer.out_right_shift,
            "fc_reordered": bool(layer.fc_reordered),
        }
        if layer.weight_frac_bits is not None:
            entry["weight_frac_bits"] = layer.weight_frac_bits
        if layer.bias_frac_bits is not None:
            entry["bias_frac_bits"] = layer.bias_frac_bits
        if layer.weight_shape() is not None:
            wdata = layer.weights
            if layer.kind == "fully_connected" and layer.fc_reordered:
                wdata = kernels.weight_reorder_1x4(layer.weights).blob
            wflat = np.asarray(wdata, dtype=np.int8).reshape(-1)
            entry["weights"] = {"offset": offset, "length": int(wflat.size)}
            blobs.append(wflat)
            offset += wflat.size
            bflat = np.asarray(layer.bias, dtype=np.int8).reshape(-1)
            entry["bias"] = {"offset": offset, "length": int(bflat.size)}
            blobs.append(bflat)
            offset += bflat.size
        manifest_layers.append(entry)
    manifest = {
        "format": MODEL_FORMAT,
        "version": 1,
        "input": {"shape": list(model.input_shape),
                  "frac_bits": model.input_frac_bits},
        "layers": manifest_layers,
    }
    with open(os.path.join(directory, MANIFEST_FILENAME), "w") as fh:
        json.dump(manifest, fh, indent=2)
    blob = np.concatenate(blobs) if blobs else np.zeros(0, dtype=np.int8)
    blob.tofile(os.path.join(directory, WEIGHTS_FILENAME))


def _take_blob(blob: np.ndarray, ref: dict, what: str) -> np.ndarray:
    try:
        offset, length = int(ref["offset"]), int(ref["length"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestError(f"{what}: bad blob reference") from exc
    if offset < 0 or length < 0 or offset + length > blob.size:
        raise BlobSizeError(
            f"{what}: blob range [{offset}, {offset + length}) exceeds "
            f"weights file of {blob.size} bytes")
    return blob[offset:offset + length]


def load_model(path) -> Model:
    """Load a model from a directory or a path to its manifest."""
    if os.path.isdir(path):
        manifest_path = os.path.join(path, MANIFEST_FILENAME)
    else:
        manifest_path = str(path)
    weights_path = os.path.join(os.path.dirname(manifest_path),
                                WEIGHTS_FILENAME)
    with open(manifest_path) as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(manifest, dict) or manifest.get("format") != MODEL_FORMAT:
        raise ManifestError("missing or unknown manifest format tag")
    try:
        in_shape = tuple(int(v) for v in manifest["input"]["shape"])
        in_frac = int(manifest["input"]["frac_bits"])
        layer_entries = manifest["layers"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestError(f"manifest missing required fields: {exc}") from exc
    blob = np.fromfile(weights_path, dtype=np.int8)
    layers = []
    for i, entry in enumerate(layer_entries):
        try:
            kind = entry["kind"]
        except (KeyError, TypeError) as exc:
            raise ManifestError(f"layer {i}: missing kind") from exc
        if kind not in LAYER_KINDS:
            raise UnknownLayerError(f"layer {i}: unsupported kind {kind!r}")
        try:
            layer = LayerSpec(
                kind=kind,
                name=entry.get("name", f"layer{i}"),
                kernel_size=int(entry.get("kernel_size", 0)),
                stride=int(entry.get("stride", 1)),
                pad=int(entry.get("pad", 0)),
                out_channels=int(entry.get("out_channels", 0)),
                in_shape=tuple(int(v) for v in entry["in_shape"]),
                out_shape=tuple(int(v) for v in entry["out_shape"]),
                frac_bits=int(entry.get("frac_bits", 0)),
                bias_left_shift=int(entry.get("bias_left_shift", 0)),
                out_right_shift=int(entry.get("out_right_shift", 0)),
                fc_reordered=bool(entry.get("fc_reordered", False)),
                weight_frac_bits=entry.get("weight_frac_bits"),
                bias_frac_bits=entry.get("bias_frac_bits"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestError(f"layer {i}: bad fields: {exc}") from exc
        wshape = layer.weight_shape()
        if wshape is not None:
            if "weights" not in entry or "bias" not in entry:
                raise ManifestError(f"layer {i}: missing blob references")
            wflat = _take_blob(blob, entry["weights"], f"layer {i} weights")
            expected = int(np.prod(wshape))
            if wflat.size != expected:
                raise BlobSizeError(
                    f"layer {i}: weight blob holds {wflat.size} values, "
                    f"shape {wshape} needs {expected}")
            if layer.kind == "fully_connected" and layer.fc_reordered:
                wr = kernels.ReorderedWeights(wshape[0], wshape[1],
                                              wflat.copy())
                layer.weights = kernels.deinterleave_1x4(wr)
            else:
                layer.weights = wflat.reshape(wshape).copy()
            bflat = _take_blob(blob, entry["bias"], f"layer {i} bias")
            if bflat.size != layer.bias_len():
                raise BlobSizeError(
                    f"layer {i}: bias blob holds {bflat.size} values, "
                    f"expected {layer.bias_len()}")
            layer.bias = bflat.copy()
        layers.append(layer)
    model = Model(in_shape, in_frac, layers)
    model.validate()
    return model


# ---------------------------------------------------------------------------
# model builders

def _rand_q7(rng, shape):
    return rng.integers(-128, 128, size=shape).astype(np.int8)


def _chain(layers: list[LayerSpec], input_shape) -> None:
    shape = tuple(input_shape)
    for layer in layers:
        layer.in_shape = shape
        layer.out_shape = layer.expected_out_shape()
        shape = layer.out_shape


def build_cifar10_model(seed: int = 0, fc_reordered: bool = True) -> Model:
    """The 7-layer CIFAR-10 CNN topology with random q7 parameters.

    Three 5x5 convolutions (pad 2) interleaved with 3x3/stride-2 max
    pooling (pad 1, forced by the 32->16->8->4 halving), then a 10-way
    fully-connected classifier.
    """
    rng = np.random.default_rng(seed)
    layers = [
        LayerSpec("conv", "conv1", kernel_size=5, stride=1, pad=2,
                  out_channels=32, frac_bits=5, bias_left_shift=1,
                  out_right_shift=10),
        LayerSpec("maxpool", "pool1", kernel_size=3, stride=2, pad=1,
                  frac_bits=5),
        LayerSpec("conv", "conv2", kernel_size=5, stride=1, pad=2,
                  out_channels=32, frac_bits=4, bias_left_shift=0,
                  out_right_shift=11),
        LayerSpec("maxpool", "pool2", kernel_size=3, stride=2, pad=1,
                  frac_bits=4),
        LayerSpec("conv", "conv3", kernel_size=5, stride=1, pad=2,
                  out_channels=64, frac_bits=4, bias_left_shift=0,
                  out_right_shift=11),
        LayerSpec("maxpool", "pool3", kernel_size=3, stride=2, pad=1,
                  frac_bits=4),
        LayerSpec("fully_connected", "fc1", out_channels=10, frac_bits=3,
                  bias_left_shift=0, out_right_shift=13,
                  fc_reordered=fc_reordered),
    ]
    model = Model((32, 32, 3), 7, layers)
    _chain(model.layers, model.input_shape)
    for layer in model.layers:
        shape = layer.weight_shape()
        if shape is not None:
            layer.weights = _rand_q7(rng, shape)
            layer.bias = _rand_q7(rng, layer.bias_len())
    model.validate()
    return model


def build_tiny_model(seed: int = 0) -> Model:
    """A small conv/pool/relu/fc network with a consistent scale chain."""
    rng = np.random.default_rng(seed)
    layers = [
        # q0.7 input, q0.7 weights: accumulator carries 14 fractional bits
        LayerSpec("conv", "conv1", kernel_size=3, stride=1, pad=1,
                  out_channels=8, frac_bits=5, bias_left_shift=7,
                  out_right_shift=9, weight_frac_bits=7, bias_frac_bits=7),
        LayerSpec("relu", "relu1", frac_bits=5),
        LayerSpec("maxpool", "pool1", kernel_size=2, stride=2, frac_bits=5),
        LayerSpec("fully_connected", "fc1", out_channels=4, frac_bits=2,
                  bias_left_shift=5, out_right_shift=10,
                  weight_frac_bits=7, bias_frac_bits=7),
    ]
    model = Model((8, 8, 3), 7, layers)
    _chain(model.layers, model.input_shape)
    for layer in model.layers:
        shape = layer.weight_shape()
        if shape is not None:
            layer.weights = _rand_q7(rng, shape)
            layer.bias = _rand_q7(rng, layer.bias_len())
    model.validate()
    return model


def random_input(model: Model, seed: int = 0) -> QTensor:
    rng = np.random.default_rng(seed)
    h, w, c = model.input_shape
    return QTensor(h, w, c, 8, model.input_frac_bits,
                   _rand_q7(rng, h * w * c))
