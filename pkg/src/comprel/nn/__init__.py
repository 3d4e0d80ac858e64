"""Dense numeric core: parameter tensors, forward/backward, Adam, checks."""

from comprel.nn.adam import AdamConfig, adam_step
from comprel.nn.gradcheck import GradCheckReport, gradient_check
from comprel.nn.network import ForwardTrace, backward, forward, loss, softmax
from comprel.nn.params import ModelParams, ParamTensor, build_dual, build_single, glorot_uniform

__all__ = [
    "AdamConfig",
    "ForwardTrace",
    "GradCheckReport",
    "ModelParams",
    "ParamTensor",
    "adam_step",
    "backward",
    "build_dual",
    "build_single",
    "forward",
    "glorot_uniform",
    "gradient_check",
    "loss",
    "softmax",
]
