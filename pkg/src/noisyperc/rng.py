"""Counter-based per-edge randomness.

A uniform for edge ``i`` is a hash of ``(seed, stream_id, lane, i)``, so results
never depend on iteration order or on how replicates are split across workers.
"""
import numpy as np

from ._kernels import hashed_uniforms

MASK64 = (1 << 64) - 1

# lanes keep different uses of the same (seed, stream) independent
LANE_ADD = 0
LANE_THIN = 1
LANE_TREE = 2
LANE_ACTIVATION = 3


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, stream_id: int = 0, lane: int = 0) -> int:
    z = mix64(seed ^ 0x6A09E667F3BCC909)
    z = mix64(z ^ (stream_id & MASK64))
    return mix64(z ^ (lane * 0x9E3779B97F4A7C15))


def uniforms(seed: int, stream_id: int, lane: int, n: int) -> np.ndarray:
    return hashed_uniforms(np.uint64(stream_key(seed, stream_id, lane)), n)
