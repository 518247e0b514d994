"""Neural-network layer kernels."""

from .act import (FUNCS, MODES, LutTable, activation_lut_apply, build_lut,
                  relu_swar_q7, relu_word)
from .conv import (ConvParams, conv_hwc_q7, conv_out_dim,
                   depthwise_conv_hwc_q7, im2col_partial)
from .fc import (ReorderedWeights, deinterleave_1x4, fully_connected_mixed,
                 fully_connected_q7_basic, fully_connected_q7_opt,
                 preprocess_fc_weights_mixed, weight_reorder_1x4)
from .matmul import matmul_q15_2x2, tiled_acc_2x2, wrap32
from .pool import avgpool_insitu, maxpool_insitu

__all__ = [
    "FUNCS", "MODES", "LutTable", "activation_lut_apply", "build_lut",
    "relu_swar_q7", "relu_word",
    "ConvParams", "conv_hwc_q7", "conv_out_dim", "depthwise_conv_hwc_q7",
    "im2col_partial",
    "ReorderedWeights", "deinterleave_1x4", "fully_connected_mixed",
    "fully_connected_q7_basic", "fully_connected_q7_opt",
    "preprocess_fc_weights_mixed", "weight_reorder_1x4",
    "matmul_q15_2x2", "tiled_acc_2x2", "wrap32",
    "avgpool_insitu", "maxpool_insitu",
]
