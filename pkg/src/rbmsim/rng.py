"""Counter-based random streams.

Every random number drawn by the simulators is a pure function of
``(master seed, stream label, counter words)`` computed with the
Philox4x32-10 block cipher, vectorized over numpy arrays.  A path's
randomness therefore does not depend on how paths are batched or which
worker runs them.

Counter word convention used across the package:

    c0 -- block index inside one step (each block yields 4 words)
    c1 -- step / segment index
    c2 -- rejection attempt
    c3 -- path (or sample, or cell) index
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_MASK = np.uint64(0xFFFFFFFF)
_SHIFT = np.uint64(32)
_INV32 = 1.0 / 4294967296.0


def philox4x32(c0, c1, c2, c3, k0: int, k1: int, rounds: int = 10) -> np.ndarray:
    """Philox4x32 on broadcast counter arrays; returns uint32 words, shape (..., 4)."""
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) & _MASK for c in (c0, c1, c2, c3))
    c0, c1, c2, c3 = np.broadcast_arrays(c0, c1, c2, c3)
    k0 &= 0xFFFFFFFF
    k1 &= 0xFFFFFFFF
    for r in range(rounds):
        if r:
            k0 = (k0 + _W0) & 0xFFFFFFFF
            k1 = (k1 + _W1) & 0xFFFFFFFF
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> _SHIFT) ^ c1 ^ np.uint64(k0),
            p1 & _MASK,
            (p0 >> _SHIFT) ^ c3 ^ np.uint64(k1),
            p0 & _MASK,
        )
    return np.stack([c0, c1, c2, c3], axis=-1).astype(np.uint32)


@dataclass(frozen=True)
class Stream:
    """A named substream of a master seed."""

    seed: int
    label: str

    @property
    def key(self) -> tuple[int, int]:
        seed = int(self.seed) & 0xFFFFFFFFFFFFFFFF
        return seed & 0xFFFFFFFF, ((seed >> 32) ^ zlib.crc32(self.label.encode())) & 0xFFFFFFFF

    def bits(self, c0=0, c1=0, c2=0, c3=0) -> np.ndarray:
        k0, k1 = self.key
        return philox4x32(c0, c1, c2, c3, k0, k1)

    def uniforms(self, c0=0, c1=0, c2=0, c3=0) -> np.ndarray:
        """Four uniforms on the open interval (0, 1) per counter, 32-bit resolution."""
        return (self.bits(c0, c1, c2, c3).astype(np.float64) + 0.5) * _INV32

    def uniforms53(self, c0=0, c1=0, c2=0, c3=0) -> np.ndarray:
        """Two double-precision uniforms on (0, 1) per counter, 53-bit resolution."""
        b = self.bits(c0, c1, c2, c3).astype(np.uint64)
        hi = b[..., 0::2] >> np.uint64(5)
        lo = b[..., 1::2] >> np.uint64(6)
        return ((hi * np.uint64(67108864) + lo).astype(np.float64) + 0.5) / 9007199254740992.0

    def normals(self, c0=0, c1=0, c2=0, c3=0) -> np.ndarray:
        """Four standard normals per counter (Box-Muller on 32-bit uniforms)."""
        u = self.uniforms(c0, c1, c2, c3)
        r = np.sqrt(-2.0 * np.log(u[..., 0::2]))
        theta = 2.0 * np.pi * u[..., 1::2]
        out = np.empty_like(u)
        out[..., 0::2] = r * np.cos(theta)
        out[..., 1::2] = r * np.sin(theta)
        return out

    def normal_block(self, count: int, c1=0, c2=0, c3=0) -> np.ndarray:
        """``count`` normals per (c1, c2, c3) broadcast point, laid out on the last axis."""
        nblocks = -(-count // 4)
        c1, c2, c3 = (np.asarray(c)[..., None] for c in (c1, c2, c3))
        z = self.normals(np.arange(nblocks), c1, c2, c3)
        return z.reshape(z.shape[:-2] + (4 * nblocks,))[..., :count]

    def uniform_block(self, count: int, c1=0, c2=0, c3=0) -> np.ndarray:
        nblocks = -(-count // 4)
        c1, c2, c3 = (np.asarray(c)[..., None] for c in (c1, c2, c3))
        u = self.uniforms(np.arange(nblocks), c1, c2, c3)
        return u.reshape(u.shape[:-2] + (4 * nblocks,))[..., :count]

    def child(self, label: str) -> "Stream":
        return Stream(self.seed, f"{self.label}/{label}")
