"""Counter-based random streams.

Every random choice in the library is drawn from a Philox4x64-10 stream
keyed by ``(seed, stream_id)``.  The 256-bit counter is incremented before
each block, so block ``b = 1, 2, ...`` encrypts counter ``(b, 0, 0, 0)`` and
yields four words in order.  Each call to :meth:`Stream.raw` consumes one
word, so the sequence depends only on the two key words.  Stream ids are 64-bit integers
laid out as::

    bits 63..48   kind   (PERM=1, NEGATION=2, TSAMPLE=3)
    bits 47..24   x
    bits 23..0    y

For permutations ``(x, y) = (variable group i, constraint group j)``; for
negations ``(x, y) = (constraint group j, copy b)``.  Bounded integers use
plain rejection on the top of the 64-bit range; permutations use
Fisher-Yates from the last position down.  Both are simple enough to
reimplement bit-for-bit in another language.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

PERM = 1
NEGATION = 2
TSAMPLE = 3


def stream_id(kind: int, x: int = 0, y: int = 0) -> int:
    if not (0 <= x < 1 << 24 and 0 <= y < 1 << 24):
        raise ValueError("stream coordinates must fit in 24 bits")
    return (kind << 48) | (x << 24) | y


class Stream:
    """One independent substream of 64-bit words."""

    def __init__(self, seed: int, sid: int):
        key = np.array([seed & MASK64, sid & MASK64], dtype=np.uint64)
        self._bitgen = np.random.Philox(key=key)

    def raw(self) -> int:
        return int(self._bitgen.random_raw())

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)``."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            u = self.raw()
            if u < limit:
                return u % bound

    def sign(self) -> int:
        return 1 if self.raw() >> 63 else -1

    def uniform(self) -> float:
        """Double in ``[0, 1)`` from the top 53 bits."""
        return (self.raw() >> 11) * (1.0 / (1 << 53))

    def permutation(self, n: int) -> np.ndarray:
        perm = np.arange(n, dtype=np.int64)
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return perm


def substream(seed: int, kind: int, x: int = 0, y: int = 0) -> Stream:
    return Stream(seed, stream_id(kind, x, y))
