"""Counter-based random streams.

Every stream is keyed by (base_seed, *tags) through SHA-256 onto a Philox
key, so any replicate or sampling site can be regenerated independently of
execution order or worker count.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["substream", "derived_seed"]

_SEP = b"\x1f"


def _digest(base_seed, tags):
    h = hashlib.sha256()
    h.update(str(int(base_seed)).encode())
    for t in tags:
        h.update(_SEP)
        h.update(str(t).encode())
    return h.digest()


def derived_seed(base_seed, replicate):
    """The documented (base_seed, replicate) -> 64-bit seed function used
    for the per-record seed column."""
    d = _digest(base_seed, ("replicate", int(replicate)))
    return int.from_bytes(d[:8], "little")


def substream(base_seed, *tags):
    """A numpy Generator on a Philox stream keyed by (base_seed, *tags)."""
    d = _digest(base_seed, tags)
    key = np.frombuffer(d[:16], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
