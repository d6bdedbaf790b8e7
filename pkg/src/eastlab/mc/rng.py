"""Splittable counter-based random streams for reproducible parallel replicas.

Each (master seed, replica, site) triple owns an independent SplitMix64
stream: the generator state advances by the 64-bit golden-ratio increment and
each output is the SplitMix64 finalizer of the state (Weyl sequence plus
avalanche mix).  Streams are derived, not stored: the initial state chains
the seed through the finalizer with replica and site offsets, so any stream
can be reconstructed in O(1) anywhere, which makes replicas embarrassingly
parallel with results independent of scheduling.

This module is the pure-Python reference; mc.kernels mirrors it bit for bit
for the compiled path, and the tests assert the two produce identical
streams.
"""

from __future__ import annotations

import math

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

#: Stream index used for sampling a replica's initial configuration.
INIT_STREAM_OFFSET = 1 << 32


def mix64(z: int) -> int:
    """SplitMix64 finalizer (64-bit avalanche)."""
    z &= MASK
    z = ((z ^ (z >> 30)) * MIX1) & MASK
    z = ((z ^ (z >> 27)) * MIX2) & MASK
    return z ^ (z >> 31)


def stream_state(seed: int, replica: int, site: int) -> int:
    """Initial SplitMix64 state of the (seed, replica, site) stream."""
    h = mix64(seed & MASK)
    h = mix64((h + ((replica + 1) * GOLDEN)) & MASK)
    h = mix64((h + ((site + 1) * GOLDEN)) & MASK)
    return h


def next_u64(state: int) -> tuple[int, int]:
    """(value, new state)."""
    state = (state + GOLDEN) & MASK
    return mix64(state), state


def next_uniform(state: int) -> tuple[float, int]:
    """Uniform in [0, 1) with 53 random bits."""
    v, state = next_u64(state)
    return (v >> 11) * 2.0**-53, state


def next_exponential(state: int) -> tuple[float, int]:
    """Standard exponential via inversion; the argument of log stays in (0,1]."""
    u, state = next_uniform(state)
    return -math.log(1.0 - u), state


class EventStream:
    """The clock-and-coin stream of one (seed, replica, site) triple.

    Draws alternate per ring: an exponential clock gap, then a Bernoulli(p)
    coin read as the proposed new spin.  The stream is a view on the
    underlying counter-based state, so constructing it anywhere yields the
    same sequence; distinct (replica, site) pairs are independent by
    construction.
    """

    def __init__(self, seed: int, replica: int, site: int):
        self.seed = seed
        self.replica = replica
        self.site = site
        self._state = stream_state(seed, replica, site)

    def next_ring_gap(self) -> float:
        gap, self._state = next_exponential(self._state)
        return gap

    def next_coin(self, p: float) -> int:
        u, self._state = next_uniform(self._state)
        return 1 if u < p else 0
