"""PTNS binary tensor files.

Layout (little-endian)::

    offset 0   b"PTNS"
    offset 4   u8 version (1)
    offset 5   u8 scalar code (0 = real f64, 1 = complex f64 as interleaved re, im)
    offset 6   u8 order p
    offset 7   u8 padding (zero) -> header aligned to 8 bytes
    offset 8   p x u64 dims
    then       data, first-index-fastest
"""
from __future__ import annotations

import os
import struct
from math import prod

import numpy as np

from .core import DenseTensor, as_tensor

MAGIC = b"PTNS"
VERSION = 1
REAL, COMPLEX = 0, 1

__all__ = ["PTNSFormatError", "read_ptns", "write_ptns", "dumps", "loads"]


class PTNSFormatError(ValueError):
    pass


def dumps(A, real: bool | None = None) -> bytes:
    """Serialize a tensor (or any 2-D+ array) to PTNS bytes.

    ``real=None`` stores real scalars when every imaginary part is exactly 0.
    Passing ``real=True`` for a tensor with nonzero imaginary parts is an error.
    """
    arr = np.asarray(A)
    if arr.ndim < 1 or arr.ndim > 255:
        raise PTNSFormatError(f"cannot store array of order {arr.ndim}")
    arr = arr.astype(np.complex128, copy=False)
    has_imag = bool(np.any(arr.imag != 0))
    if real is None:
        real = not has_imag
    elif real and has_imag:
        raise PTNSFormatError("real=True requested but tensor has nonzero imaginary parts")
    header = MAGIC + struct.pack("<BBBx", VERSION, REAL if real else COMPLEX, arr.ndim)
    header += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    flat = arr.ravel(order="F")
    if real:
        payload = flat.real.astype("<f8").tobytes()
    else:
        payload = flat.astype("<c16").tobytes()
    return header + payload


def loads(buf: bytes, source: str = "<bytes>") -> np.ndarray:
    """Parse PTNS bytes into a complex128 array of the declared shape."""
    if len(buf) < 8:
        raise PTNSFormatError(f"{source}: truncated header ({len(buf)} bytes)")
    if buf[:4] != MAGIC:
        raise PTNSFormatError(f"{source}: bad magic {buf[:4]!r}")
    version, code, order = struct.unpack_from("<BBB", buf, 4)
    if version != VERSION:
        raise PTNSFormatError(f"{source}: unsupported version {version}")
    if code not in (REAL, COMPLEX):
        raise PTNSFormatError(f"{source}: unknown scalar code {code}")
    if order < 1:
        raise PTNSFormatError(f"{source}: order must be >= 1")
    dims_end = 8 + 8 * order
    if len(buf) < dims_end:
        raise PTNSFormatError(f"{source}: truncated dimension table")
    dims = struct.unpack_from(f"<{order}Q", buf, 8)
    count = prod(dims)
    width = 8 if code == REAL else 16
    expected = dims_end + count * width
    if len(buf) != expected:
        raise PTNSFormatError(
            f"{source}: declared shape {dims} needs {expected} bytes, file has {len(buf)}"
        )
    if code == REAL:
        flat = np.frombuffer(buf, dtype="<f8", count=count, offset=dims_end).astype(np.complex128)
    else:
        flat = np.frombuffer(buf, dtype="<c16", count=count, offset=dims_end).astype(np.complex128)
    return flat.reshape(dims, order="F")


def write_ptns(path: str | os.PathLike, A, real: bool | None = None) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(A, real=real))


def read_ptns(path: str | os.PathLike) -> DenseTensor:
    """Read a PTNS file holding a tensor of order >= 2."""
    arr = read_ptns_array(path)
    if arr.ndim < 2:
        raise PTNSFormatError(f"{path}: order {arr.ndim} is not a tensor (need p >= 2)")
    return as_tensor(arr)


def read_ptns_array(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        return loads(fh.read(), source=str(path))
