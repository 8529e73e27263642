"""Bit-exact binary checkpoint format.

Layout: magic "OPSG", version u32, entry count u32, then per entry
(name_len u16, name utf8, dtype u8 [0 = float32], rank u8, dims u32 x rank,
payload little-endian), then a trailing CRC32 over all preceding bytes.
All integers little-endian.
"""

from __future__ import annotations

import hashlib
import struct
import zlib

import numpy as np

MAGIC = b"OPSG"
VERSION = 1
_DTYPES = {0: np.dtype("<f4")}
_DTYPE_CODES = {np.dtype("float32"): 0}


class CheckpointError(RuntimeError):
    """Base class for checkpoint failures."""


class CorruptCheckpointError(CheckpointError):
    """CRC mismatch, truncation, or a malformed container."""


class VersionError(CheckpointError):
    """Unknown format version."""


class ParameterMismatchError(CheckpointError):
    """Checkpoint and model disagree on parameter names or shapes."""


def save_checkpoint(model, path):
    """Serialize every model parameter (frozen ones included)."""
    entries = model.params.items()
    buf = bytearray()
    buf += MAGIC
    buf += struct.pack("<II", VERSION, len(entries))
    for name, tensor in entries:
        data = np.ascontiguousarray(tensor.data, dtype="<f4")
        raw = name.encode("utf-8")
        buf += struct.pack("<H", len(raw))
        buf += raw
        buf += struct.pack("<BB", _DTYPE_CODES[np.dtype("float32")],
                           data.ndim)
        buf += struct.pack(f"<{data.ndim}I", *data.shape)
        buf += data.tobytes()
    buf += struct.pack("<I", zlib.crc32(bytes(buf)))
    with open(path, "wb") as fh:
        fh.write(bytes(buf))


def load_checkpoint(path):
    """Read a checkpoint into an ordered {name: float32 ndarray} dict."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 16 or blob[:4] != MAGIC:
        raise CorruptCheckpointError(f"{path}: not an OPSG checkpoint")
    (stored_crc,) = struct.unpack("<I", blob[-4:])
    if zlib.crc32(blob[:-4]) != stored_crc:
        raise CorruptCheckpointError(f"{path}: CRC mismatch")
    version, count = struct.unpack("<II", blob[4:12])
    if version != VERSION:
        raise VersionError(f"{path}: unknown checkpoint version {version}")
    params = {}
    off = 12
    end = len(blob) - 4
    try:
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", blob, off)
            off += 2
            name = blob[off:off + name_len].decode("utf-8")
            off += name_len
            dtype_code, rank = struct.unpack_from("<BB", blob, off)
            off += 2
            if dtype_code not in _DTYPES:
                raise CorruptCheckpointError(
                    f"{path}: unknown dtype code {dtype_code} for {name}")
            dims = struct.unpack_from(f"<{rank}I", blob, off)
            off += 4 * rank
            dt = _DTYPES[dtype_code]
            nbytes = int(np.prod(dims, dtype=np.int64)) * dt.itemsize
            payload = blob[off:off + nbytes]
            if len(payload) != nbytes:
                raise CorruptCheckpointError(f"{path}: truncated payload "
                                             f"for {name}")
            off += nbytes
            if name in params:
                raise CorruptCheckpointError(f"{path}: duplicate entry "
                                             f"{name}")
            params[name] = np.frombuffer(payload, dtype=dt).reshape(dims)
    except struct.error as exc:
        raise CorruptCheckpointError(f"{path}: truncated entry table "
                                     f"({exc})") from exc
    if off != end:
        raise CorruptCheckpointError(f"{path}: {end - off} trailing bytes")
    return params


def load_into_model(model, path):
    """Load a checkpoint and copy values into the model's parameters."""
    params = load_checkpoint(path)
    model_names = [n for n, _ in model.params.items()]
    missing = [n for n in model_names if n not in params]
    if missing:
        raise ParameterMismatchError(
            f"{path}: missing parameter {missing[0]} "
            f"({len(missing)} missing in total)")
    extra = [n for n in params if n not in set(model_names)]
    if extra:
        raise ParameterMismatchError(f"{path}: unexpected parameter "
                                     f"{extra[0]}")
    for name, tensor in model.params.items():
        value = params[name]
        if value.shape != tensor.data.shape:
            raise ParameterMismatchError(
                f"{path}: parameter {name} has dims {value.shape}, "
                f"model expects {tensor.data.shape}")
        tensor.data = value.astype(tensor.data.dtype)
        tensor.grad = None
    return model


def checkpoint_hash(path) -> str:
    """Short content hash used to tag reports and API responses."""
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()[:12]
