from .tensor import (ConfigError, ShapeError, Tensor, concat, matmul,
                     precision, stack, default_dtype)
from .params import ParamStore, Scope
from .gradcheck import grad_check, grad_check_multi
from .optim import Adam
from . import functional
from . import layers

__all__ = [
    "ConfigError", "ShapeError", "Tensor", "concat", "matmul", "precision",
    "stack", "default_dtype", "ParamStore", "Scope", "grad_check",
    "grad_check_multi", "Adam", "functional", "layers",
]
