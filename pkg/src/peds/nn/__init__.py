"""Minimal dense-tensor autodiff engine for the recurrent-convolutional model."""

from .gradcheck import finite_diff_gradcheck
from .layers import (GRU, AvgPool3D, Conv3D, Dense, Dropout, Layer, avgpool3d,
                     conv3d_valid, conv_output_length)
from .loss import one_hot, wbce_loss
from .optim import Adam, TrainConfig, apply_max_norm
from .serialize import load_checkpoint, save_checkpoint
from .tensor import (LOG_EPS, NumericsError, Tensor, concatenate, dropout,
                     log_eps, pointwise, reshape, sigmoid, softmax, square,
                     tanh, tmean, transpose, tsum)

__all__ = [
    "Adam", "AvgPool3D", "Conv3D", "Dense", "Dropout", "GRU", "LOG_EPS",
    "Layer", "NumericsError", "Tensor", "TrainConfig", "apply_max_norm",
    "avgpool3d", "concatenate", "conv3d_valid", "conv_output_length",
    "dropout", "finite_diff_gradcheck", "load_checkpoint", "log_eps",
    "one_hot", "pointwise", "reshape", "save_checkpoint", "sigmoid",
    "softmax", "square", "tanh", "tmean", "transpose", "tsum", "wbce_loss",
]
