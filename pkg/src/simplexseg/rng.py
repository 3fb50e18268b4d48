"""Counter-based SplitMix64 stream with Box-Muller normals.

Output ``k`` (0-based) of the stream seeded with ``s`` is
``mix(s + (k + 1) * 0x9E3779B97F4A7C15 mod 2**64)`` using the SplitMix64
finaliser. Uniform doubles take the top 53 bits: ``(x >> 11) * 2**-53`` lies
in [0, 1); ``((x >> 11) + 1) * 2**-53`` lies in (0, 1].

Normal ``2j`` and ``2j + 1`` come from the uniform pair drawn at outputs
``2j`` and ``2j + 1``:

    r = sqrt(-2 ln u1),  u1 in (0, 1]
    z0 = r cos(2 pi u2),  z1 = r sin(2 pi u2),  u2 in [0, 1)

Because outputs are indexed by a counter, any block can be produced with
vectorised numpy arithmetic and the result is independent of block sizes.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1
_TWO_NEG53 = 2.0 ** -53


def splitmix64(seed: int, start: int, count: int) -> np.ndarray:
    """Outputs ``start .. start+count-1`` of the stream seeded with ``seed``."""
    counters = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & _MASK64) + counters * _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        z = z ^ (z >> np.uint64(31))
    return z


class SplitMix64:
    """Sequential view over the counter-based stream."""

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self.position = 0

    def next_uint64(self, count: int) -> np.ndarray:
        out = splitmix64(self.seed, self.position, count)
        self.position += count
        return out

    def uniform(self, count: int) -> np.ndarray:
        """Doubles in [0, 1)."""
        return (self.next_uint64(count) >> np.uint64(11)).astype(np.float64) * _TWO_NEG53

    def uniform_range(self, low: float, high: float, count: int) -> np.ndarray:
        return low + (high - low) * self.uniform(count)

    def normal(self, count: int) -> np.ndarray:
        """Standard normals via Box-Muller; consumes an even number of outputs."""
        pairs = (count + 1) // 2
        raw = self.next_uint64(2 * pairs) >> np.uint64(11)
        u1 = (raw[0::2].astype(np.float64) + 1.0) * _TWO_NEG53
        u2 = raw[1::2].astype(np.float64) * _TWO_NEG53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        out = np.empty(2 * pairs)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:count]

    def permutation(self, n: int) -> np.ndarray:
        """Permutation of ``range(n)`` ordering indices by fresh random keys."""
        keys = self.next_uint64(n)
        return np.argsort(keys, kind="stable")
