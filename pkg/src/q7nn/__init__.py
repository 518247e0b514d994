"""q7nn: fixed-point q7/q15 neural-network inference kernels.

Packed-word (SIMD within a register) kernel semantics, power-of-two
fixed-point quantization, partial-column-expansion convolution, in-situ
pooling, table-driven activations, brute-force reference oracles, plus a
graph runner, static memory planner and CLI.
"""

from . import kernels, packedops, reference
from .graph import (LayerSpec, MemoryPlan, Model, RunResult, count_ops,
                    load_model, plan_memory, run, save_model)
from .quant import (QScalar, QuantParams, dequantize, q7_to_q15_noreorder,
                    q7_to_q15_ordered, quantize_real, requantize,
                    weight_byteswap_preprocess)
from .tensor import QTensor

__version__ = "0.1.0"

__all__ = [
    "kernels", "packedops", "reference",
    "LayerSpec", "MemoryPlan", "Model", "RunResult", "count_ops",
    "load_model", "plan_memory", "run", "save_model",
    "QScalar", "QuantParams", "dequantize", "q7_to_q15_noreorder",
    "q7_to_q15_ordered", "quantize_real", "requantize",
    "weight_byteswap_preprocess", "QTensor",
]
