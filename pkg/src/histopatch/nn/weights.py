"""Bit-exact on-disk weight container.

Layout (little-endian, no padding between fields):

    magic   4 bytes  b"EFFW"
    version u32      currently 1
    count   u32      number of tensors
    entry*  count times:
        name_len u16
        name     name_len bytes, UTF-8
        rank     u8
        dims     rank * u32
        data     prod(dims) * 4 bytes, IEEE-754 float32, row-major

Format version 1 also pins the weight semantics the tensors were trained
under: convolutions assume symmetric zero "same" padding and NCHW layout.
A save -> load round trip is bit-identical.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Dict, Mapping, Union

import numpy as np

from ..errors import BadMagic, NameCollision, TruncatedFile, UnsupportedVersion

MAGIC = b"EFFW"
VERSION = 1


def save_tensors(tensors: Mapping[str, np.ndarray], path: Union[str, Path]) -> None:
    """Write named float32 tensors; iteration order is preserved on disk."""
    names = list(tensors.keys())
    if len(set(names)) != len(names):
        raise NameCollision("duplicate tensor names in store")
    chunks = [MAGIC, struct.pack("<II", VERSION, len(names))]
    for name in names:
        arr = np.ascontiguousarray(tensors[name], dtype=np.float32)
        encoded = name.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise ValueError(f"tensor name too long: {name[:32]!r}...")
        if arr.ndim > 0xFF:
            raise ValueError(f"tensor rank {arr.ndim} exceeds format limit")
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<B", arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        chunks.append(arr.tobytes(order="C"))
    Path(path).write_bytes(b"".join(chunks))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedFile(
                f"needed {n} bytes at offset {self.pos}, file has {len(self.data)}"
            )
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out


def load_tensors(path: Union[str, Path]) -> Dict[str, np.ndarray]:
    """Read a weight file back into an ordered name -> float32 array dict."""
    reader = _Reader(Path(path).read_bytes())
    if reader.take(4) != MAGIC:
        raise BadMagic(f"{path}: not a weight file (bad magic)")
    (version,) = struct.unpack("<I", reader.take(4))
    if version != VERSION:
        raise UnsupportedVersion(f"{path}: version {version}, expected {VERSION}")
    (count,) = struct.unpack("<I", reader.take(4))

    tensors: Dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", reader.take(2))
        name = reader.take(name_len).decode("utf-8")
        if name in tensors:
            raise NameCollision(f"{path}: tensor {name!r} appears twice")
        (rank,) = struct.unpack("<B", reader.take(1))
        dims = struct.unpack(f"<{rank}I", reader.take(4 * rank))
        size = int(np.prod(dims, dtype=np.int64)) if rank else 1
        raw = reader.take(4 * size)
        arr = np.frombuffer(raw, dtype="<f4").astype(np.float32).reshape(dims)
        tensors[name] = arr
    if reader.pos != len(reader.data):
        raise ValueError(f"{path}: {len(reader.data) - reader.pos} trailing bytes")
    return tensors
