"""Counter-based 64-bit PRNG (splitmix64 mixing) with Box-Muller normals.

Draw i of a stream is a pure function of (seed, i), so any slice of the
stream can be generated independently and the results are identical
across platforms and library versions. All streams return float64.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_SEED_SALT = np.uint64(0x8E2B_5CA1_9B3D_71F7)


def _mix64(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):  # modular 2^64 arithmetic is the point
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def _stream_base(seed: int) -> np.uint64:
    with np.errstate(over="ignore"):
        return _mix64(np.uint64(seed) + _SEED_SALT)


def raw_words(seed: int, start: int, count: int) -> np.ndarray:
    """count uint64 words at counters [start, start+count) of the stream."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix64(_stream_base(seed) + idx * _GOLDEN)


def uniforms(seed: int, start: int, count: int) -> np.ndarray:
    """Uniform draws strictly inside (0, 1)."""
    z = raw_words(seed, start, count)
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def uniforms_in(seed: int, start: int, count: int, low: float, high: float) -> np.ndarray:
    """Uniform draws strictly inside the open interval (low, high)."""
    return low + (high - low) * uniforms(seed, start, count)


def normals(seed: int, start: int, count: int) -> np.ndarray:
    """Standard normal draws via Box-Muller.

    Consumes 2 * ceil(count / 2) counters beginning at `start`; callers
    stepping through a stream should advance by that amount.
    """
    pairs = (count + 1) // 2
    u = uniforms(seed, start, 2 * pairs)
    u1 = u[:pairs]
    u2 = u[pairs:]
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    out = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
    return out[:count]
