"""Seedable 64-bit RNG shared by every component.

The whole suite uses a single, fixed generator (splitmix64) so that the same
(seed, inputs) pair reproduces datasets and planner runs bit-exactly,
regardless of platform or of which planner backend (compiled or pure Python)
is active. The compiled planner core carries an identical C implementation.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """splitmix64 output function: scrambles a 64-bit word."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """splitmix64 stream generator."""

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        return mix64(self.state)

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return int(self.random() * n)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(i + 1)
            items[i], items[j] = items[j], items[i]


def derive_seed(*parts) -> int:
    """Derive a 64-bit seed from a tuple of ints/strings.

    FNV-1a over the decimal/utf-8 rendering of each part (with a separator
    byte so ("ab", "c") != ("a", "bc")), finished with the splitmix64
    scrambler. Deterministic across platforms and sessions.
    """
    h = 0xCBF29CE484222325
    for part in parts:
        for b in str(part).encode() + b"\x1f":
            h = ((h ^ b) * 0x100000001B3) & _MASK
    return mix64(h)
