"""Deterministic random streams shared by the Python layers.

A stream is a (state, gamma) pair advanced as ``state += gamma`` (mod 2^64)
with a mix64 output; the trajectory kernel derives its per-rollout streams
the same way, so every random quantity in a run is a pure function of the
run seed and a handful of integer tags.
"""

from __future__ import annotations

from gsres import _core

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15

# stream tags for seed derivation (arbitrary, fixed)
TAG_EVAL = 1
TAG_SWEEP = 2
TAG_REPOP = 3
TAG_INIT = 4


def mix_seed(*parts: int) -> int:
    """Collapse any tuple of nonnegative ints into a well-spread 64-bit seed."""
    s = 0x6C62272E07BB0142
    for p in parts:
        s = _core.mix64((s * _GOLDEN + (int(p) & _MASK) + 1) & _MASK)
    return s


class RngStream:
    """Explicitly-seeded stream; one mix64 output per draw."""

    __slots__ = ("state", "gamma")

    def __init__(self, seed: int, k: int = 0):
        self.state = _core.stream_state(int(seed) & _MASK, k)
        self.gamma = _core.stream_gamma(int(seed) & _MASK, k)

    def uniform(self) -> float:
        """Uniform draw strictly inside (0, 1)."""
        self.state = (self.state + self.gamma) & _MASK
        return _core.u01(self.state)

    def uniform_in(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.uniform()

    def integer(self, n: int) -> int:
        """Uniform integer in {0, ..., n-1}."""
        if n <= 0:
            raise ValueError("integer() needs n >= 1")
        return int(self.uniform() * n)

    def normal(self, mean: float = 0.0, sd: float = 1.0) -> float:
        return mean + sd * _core.normal_quantile(self.uniform())

    def truncated_normal(self, mean: float, sd: float, lo: float, hi: float) -> float:
        return _core.truncated_normal(mean, sd, lo, hi, self.uniform())

    def child_seed(self) -> int:
        """Derive an independent 64-bit seed, advancing this stream once."""
        self.state = (self.state + self.gamma) & _MASK
        return _core.mix64(self.state)

    def spawn(self) -> "RngStream":
        return RngStream(self.child_seed())
