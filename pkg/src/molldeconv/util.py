"""Small shared helpers: seed substreams."""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["substream_seed"]


def substream_seed(seed: int, label: str) -> int:
    """Derive a named substream seed from a config-level seed.

    All randomness in a run flows from one seed; substreams keep independent
    consumers (data noise, kappa probes) decoupled and reproducible.  The
    label enters through a stable CRC so the mapping is platform-independent.
    """
    ss = np.random.SeedSequence([int(seed), zlib.crc32(label.encode("utf-8"))])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
