"""Deterministic random streams (PCG32, XSH-RR variant).

Every stochastic decision in this package (mask sampling, weight init,
epoch shuffles, synthetic data) draws from a `Stream` addressed by
``(global seed, purpose tag, index)``.  Streams for different addresses
are distinct PCG32 sequences, so e.g. re-sampling layer 2's mask can
never perturb layer 1's.

PCG32 constants and seeding follow the reference implementation
(64-bit LCG state, multiplier 6364136223846793005, odd per-stream
increment derived from the sequence selector).  The sequence selector
for ``(purpose, index)`` is ``fnv1a64(purpose + ":" + str(index))``.

Uniform convention: ``u = next_u32() / 2**32``, so u lies in [0, 1) and
a Bernoulli(p) bit is ``u < p``.  Gaussians use Box-Muller and consume
exactly two 32-bit draws per value.  All of this is plain integer
arithmetic, so sequences are identical on every platform.
"""

from __future__ import annotations

import math

_MASK32 = 0xFFFFFFFF
_MASK64 = 0xFFFFFFFFFFFFFFFF
_PCG_MULT = 6364136223846793005

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

#: Stream purposes used by this package; free-form tags are allowed but
#: these are the ones with package-level meaning.
PURPOSES = ("mask", "init", "shuffle", "synth")


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash of a byte string."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


def stream_selector(purpose: str, index: int) -> int:
    """Sequence selector for a (purpose, index) pair."""
    return fnv1a64(f"{purpose}:{index}".encode("utf-8"))


class Stream:
    """One PCG32 generator.

    Use `Stream.derive(seed, purpose, index)` for addressed streams;
    the bare constructor takes explicit (initstate, initseq) and exists
    mainly for tests against published PCG32 vectors.
    """

    __slots__ = ("_state", "_inc")

    def __init__(self, initstate: int, initseq: int):
        self._state = 0
        self._inc = ((initseq << 1) | 1) & _MASK64
        self.next_u32()
        self._state = (self._state + initstate) & _MASK64
        self.next_u32()

    @classmethod
    def derive(cls, seed: int, purpose: str, index: int) -> "Stream":
        return cls(seed & _MASK64, stream_selector(purpose, index))

    def next_u32(self) -> int:
        old = self._state
        self._state = (old * _PCG_MULT + self._inc) & _MASK64
        xorshifted = (((old >> 18) ^ old) >> 27) & _MASK32
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & _MASK32

    def uniform(self) -> float:
        """Uniform double in [0, 1) as next_u32 / 2^32."""
        return self.next_u32() / 4294967296.0

    def bernoulli(self, p: float) -> int:
        """One Bernoulli(p) bit: 1 iff uniform() < p. Consumes one draw."""
        return 1 if self.uniform() < p else 0

    def normal(self) -> float:
        """Standard Gaussian via Box-Muller; consumes exactly two draws.

        The radial uniform is shifted to (0, 1] so log never sees 0.
        """
        u1 = (self.next_u32() + 1) / 4294967296.0
        u2 = self.next_u32() / 4294967296.0
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) without modulo bias.

        Rejection sampling on the top of the 32-bit range; expected
        draws per call < 2 for any bound.
        """
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        threshold = (-bound) % bound
        while True:
            r = self.next_u32()
            if r >= threshold:
                return r % bound

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle (descending index convention)."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
