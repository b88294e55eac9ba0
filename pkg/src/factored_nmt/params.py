"""Named parameter store and its on-disk container format.

Container layout: one JSON manifest line (names, shapes, precision,
format version, optional embedded config) followed by the raw
little-endian IEEE-754 payload of every tensor, in manifest order.
"""

from __future__ import annotations

import json

import numpy as np

from .tensor import Tensor

FORMAT_NAME = "fnmt-params"
FORMAT_VERSION = 1

_DTYPE_CODES = {"float32": "<f4", "float64": "<f8"}


class CorruptModelError(Exception):
    """Raised when a parameter container cannot be decoded."""


class ParamStore:
    """Ordered mapping name -> Tensor with gradient plumbing.

    Single-writer: training mutates parameters between steps, readers
    (decoding) never write.
    """

    def __init__(self):
        self._params = {}

    def add(self, name, tensor):
        if name in self._params:
            raise ValueError(f"ParamStore: duplicate parameter {name!r}")
        tensor.requires_grad = True
        tensor.name = name
        self._params[name] = tensor
        return tensor

    def __getitem__(self, name):
        return self._params[name]

    def __contains__(self, name):
        return name in self._params

    def __len__(self):
        return len(self._params)

    def names(self):
        return list(self._params)

    def items(self):
        return self._params.items()

    def values(self):
        return self._params.values()

    def zero_grad(self):
        for p in self._params.values():
            p.grad = None

    def grads(self):
        """Gradients keyed by name; missing grads come back as zeros."""
        out = {}
        for name, p in self._params.items():
            out[name] = p.grad if p.grad is not None else np.zeros_like(p.data)
        return out

    def copy_data(self):
        return {name: p.data.copy() for name, p in self._params.items()}

    def load_data(self, snapshot):
        for name, arr in snapshot.items():
            p = self._params[name]
            if p.data.shape != arr.shape:
                raise ValueError(f"ParamStore: snapshot shape mismatch for {name}")
            p.data = arr.copy()

    # -- container IO ------------------------------------------------------

    def save(self, path, config=None):
        dtypes = {str(p.data.dtype) for p in self._params.values()}
        if len(dtypes) > 1:
            raise ValueError(f"ParamStore.save: mixed precisions {dtypes}")
        precision = dtypes.pop() if dtypes else "float32"
        if precision not in _DTYPE_CODES:
            raise ValueError(f"ParamStore.save: unsupported precision {precision}")
        manifest = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "precision": precision,
            "tensors": [{"name": n, "shape": list(p.data.shape)}
                        for n, p in self._params.items()],
        }
        if config is not None:
            manifest["config"] = config
        code = _DTYPE_CODES[precision]
        with open(path, "wb") as fh:
            fh.write(json.dumps(manifest, sort_keys=True).encode("utf-8"))
            fh.write(b"\n")
            for p in self._params.values():
                fh.write(np.ascontiguousarray(p.data, dtype=code).tobytes())

    @classmethod
    def load(cls, path):
        """Read a container; returns (ParamStore, embedded config or None)."""
        with open(path, "rb") as fh:
            header = fh.readline()
            payload = fh.read()
        try:
            manifest = json.loads(header.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CorruptModelError(f"{path}: bad manifest ({exc})") from None
        if manifest.get("format") != FORMAT_NAME:
            raise CorruptModelError(f"{path}: not a {FORMAT_NAME} container")
        if manifest.get("version") != FORMAT_VERSION:
            raise CorruptModelError(
                f"{path}: unsupported container version {manifest.get('version')}")
        precision = manifest.get("precision")
        if precision not in _DTYPE_CODES:
            raise CorruptModelError(f"{path}: unknown precision {precision}")
        code = _DTYPE_CODES[precision]
        itemsize = np.dtype(code).itemsize
        store = cls()
        offset = 0
        for entry in manifest["tensors"]:
            shape = tuple(entry["shape"])
            nbytes = int(np.prod(shape, dtype=np.int64)) * itemsize
            chunk = payload[offset:offset + nbytes]
            if len(chunk) != nbytes:
                raise CorruptModelError(
                    f"{path}: truncated payload at tensor {entry['name']!r}")
            data = np.frombuffer(chunk, dtype=code).reshape(shape).copy()
            store.add(entry["name"], Tensor(data))
            offset += nbytes
        if offset != len(payload):
            raise CorruptModelError(f"{path}: trailing bytes after payload")
        return store, manifest.get("config")
