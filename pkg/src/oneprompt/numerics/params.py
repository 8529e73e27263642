"""Named parameter storage with deterministic initialization."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, default_dtype


class ParamStore:
    """Ordered map name -> Tensor, seeded for reproducible initialization."""

    def __init__(self, seed: int = 0):
        self.rng_seed = int(seed)
        self._rng = np.random.default_rng(seed)
        self._params: dict[str, Tensor] = {}

    def create(self, name, shape, init="xavier"):
        if name in self._params:
            raise KeyError(f"duplicate parameter name: {name}")
        shape = tuple(shape)
        if init == "zeros":
            data = np.zeros(shape)
        elif init == "ones":
            data = np.ones(shape)
        elif init == "xavier":
            if len(shape) >= 2:
                fan_in = int(np.prod(shape[:-1])) if len(shape) == 2 else \
                    int(np.prod(shape[1:]))
                fan_out = shape[-1] if len(shape) == 2 else shape[0]
            else:
                fan_in = fan_out = shape[0]
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            data = self._rng.uniform(-limit, limit, size=shape)
        elif init == "xavier_last":
            # last axis is fan-out (e.g. channel-last conv kernels)
            fan_in = int(np.prod(shape[:-1]))
            fan_out = shape[-1]
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            data = self._rng.uniform(-limit, limit, size=shape)
        elif init == "embed":
            data = self._rng.normal(0.0, 0.02, size=shape)
        else:
            raise ValueError(f"unknown init: {init}")
        t = Tensor(data.astype(default_dtype()), requires_grad=True)
        self._params[name] = t
        return t

    def __getitem__(self, name) -> Tensor:
        return self._params[name]

    def __contains__(self, name):
        return name in self._params

    def names(self):
        return list(self._params)

    def items(self):
        return list(self._params.items())

    def tensors(self):
        return list(self._params.values())

    def scope(self, prefix: str) -> "Scope":
        return Scope(self, prefix)

    def zero_grads(self):
        for t in self._params.values():
            t.grad = None

    def total_size(self):
        return sum(t.size for t in self._params.values())


class Scope:
    """Prefix view over a ParamStore (a 'slice' of parameters)."""

    def __init__(self, store: ParamStore, prefix: str):
        self._store = store
        self._prefix = prefix.rstrip(".")

    def create(self, name, shape, init="xavier"):
        return self._store.create(f"{self._prefix}.{name}", shape, init)

    def __getitem__(self, name):
        return self._store[f"{self._prefix}.{name}"]

    def __contains__(self, name):
        return f"{self._prefix}.{name}" in self._store

    def scope(self, name):
        return Scope(self._store, f"{self._prefix}.{name}")
