"""Binary cache and field files.

Layout (little-endian): 4-byte magic, u32 version, 32-byte config digest,
f64 T, u32 n, u32 J, u16 L, u16 G, u32 N, then complex128 n x n fields in
row-major order. Dual caches (magic ``AOFD``) store one field per
``(l, g, j, k)`` in lexicographic order; layer (``AOFL``) and wavefront
(``AOFW``) files store L or G fields.
"""
from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass

import numpy as np

VERSION = 1
HEADER = struct.Struct("<4sI32sdIIHHI")
CACHE_MAGIC = b"AOFD"
LAYER_MAGIC = b"AOFL"
WAVEFRONT_MAGIC = b"AOFW"
DTYPE = np.dtype("<c16")


class FormatError(IOError):
    pass


@dataclass
class Header:
    magic: bytes
    digest: bytes
    T: float
    n: int
    J: int
    L: int
    G: int
    N: int
    version: int = VERSION

    def pack(self) -> bytes:
        return HEADER.pack(self.magic, self.version, self.digest, self.T, self.n, self.J,
                           self.L, self.G, self.N)

    @property
    def field_count(self) -> int:
        if self.magic == CACHE_MAGIC:
            nb = 2 * self.J + 1
            return self.L * self.G * nb * nb
        return self.L if self.magic == LAYER_MAGIC else self.G

    @property
    def shape(self):
        if self.magic == CACHE_MAGIC:
            nb = 2 * self.J + 1
            return (self.L, self.G, nb, nb, self.n, self.n)
        return (self.field_count, self.n, self.n)


def read_header(path) -> Header:
    with open(path, "rb") as fh:
        raw = fh.read(HEADER.size)
    if len(raw) != HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, digest, T, n, J, L, G, N = HEADER.unpack(raw)
    if magic not in (CACHE_MAGIC, LAYER_MAGIC, WAVEFRONT_MAGIC):
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    return Header(magic, digest, T, n, J, L, G, N, version)


def open_fields(path, expect_magic=None):
    """Return ``(header, memmap)`` for any file in this format, read-only."""
    hdr = read_header(path)
    if expect_magic is not None and hdr.magic != expect_magic:
        raise FormatError(f"{path}: expected {expect_magic!r}, found {hdr.magic!r}")
    size = os.path.getsize(path)
    need = HEADER.size + int(np.prod(hdr.shape)) * DTYPE.itemsize
    if size != need:
        raise FormatError(f"{path}: size {size} does not match header ({need})")
    return hdr, np.memmap(path, dtype=DTYPE, mode="r", offset=HEADER.size, shape=hdr.shape)


class AtomicWriter:
    """Create ``path`` via a temporary sibling that is renamed on success.

    ``array`` is a writable memmap of the body with the header's shape.
    """

    def __init__(self, path, header: Header):
        self.path = os.fspath(path)
        self.header = header

    def __enter__(self):
        d = os.path.dirname(os.path.abspath(self.path))
        os.makedirs(d, exist_ok=True)
        fd, self.tmp = tempfile.mkstemp(prefix=".tmp-", dir=d)
        with os.fdopen(fd, "wb") as fh:
            fh.write(self.header.pack())
            fh.truncate(HEADER.size + int(np.prod(self.header.shape)) * DTYPE.itemsize)
        self.array = np.memmap(self.tmp, dtype=DTYPE, mode="r+", offset=HEADER.size, shape=self.header.shape)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.array.flush()
            del self.array
            os.replace(self.tmp, self.path)
        else:
            del self.array
            os.unlink(self.tmp)
        return False


def write_fields(path, magic, fields, digest, T, J=0, L=0, G=0, N=0):
    fields = np.asarray(fields, dtype=np.complex128)
    count, n = fields.shape[0], fields.shape[-1]
    if magic == LAYER_MAGIC:
        L = count
    elif magic == WAVEFRONT_MAGIC:
        G = count
    hdr = Header(magic, digest, float(T), n, J, L, G, N)
    with AtomicWriter(path, hdr) as w:
        w.array[...] = fields
    return hdr


def cache_bytes(L, G, J, n) -> int:
    nb = 2 * J + 1
    return HEADER.size + L * G * nb * nb * n * n * DTYPE.itemsize
