from .tensor import (
    ShapeError,
    Tensor,
    add,
    as_tensor,
    clamp,
    concat,
    default_dtype,
    dropout,
    embedding_lookup,
    exp,
    log,
    masked_mean,
    matmul,
    mean,
    mul,
    power,
    relu,
    reshape,
    set_default_dtype,
    sigmoid,
    slice_,
    softmax,
    stack,
    sum_,
    tanh,
    transpose,
)
from .losses import PROB_EPS, bce, masked_mse
from .optim import Adam
from .checkpoint import load_checkpoint, save_checkpoint
from .gradcheck import check_gradients, numeric_gradient
from . import init

__all__ = [
    "Adam", "PROB_EPS", "ShapeError", "Tensor", "add", "as_tensor", "bce",
    "check_gradients", "clamp", "concat", "default_dtype", "dropout",
    "embedding_lookup", "exp", "init", "load_checkpoint", "log",
    "masked_mean", "masked_mse", "matmul", "mean", "mul", "numeric_gradient",
    "power", "relu", "reshape", "save_checkpoint", "set_default_dtype",
    "sigmoid", "slice_", "softmax", "stack", "sum_", "tanh", "transpose",
]
