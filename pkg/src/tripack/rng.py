"""Seeded streams of 64-bit random words.

The engine consumes raw 64-bit words from numpy's PCG64 generator. Keeping
the word stream explicit (instead of calling a generator per draw) lets the
compiled kernels read from a plain ``uint64`` buffer, and makes a trajectory
depend only on the seed, never on how the buffer happened to be chunked.

Seeds for sweeps are derived with :func:`derive_seed`, which feeds
``(seed_base, n, replicate)`` through numpy's ``SeedSequence`` hash and keeps
the first 64-bit word of its state. That mixing function is fixed; changing
it changes every published sweep.
"""

from __future__ import annotations

import numpy as np

REFILL_WORDS = 1 << 14


def derive_seed(seed_base: int, n: int, replicate: int) -> int:
    """Seed of replicate ``replicate`` at vertex count ``n`` in a sweep."""
    seq = np.random.SeedSequence([int(seed_base), int(n), int(replicate)])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


class RandomWords:
    """Buffered stream of uniform 64-bit words seeded by a single integer.

    ``buffer[pos:]`` holds the unread words. Kernels advance ``pos`` and hand
    it back; callers use :meth:`reserve` to top the buffer up.
    """

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.seed = int(seed)
        self._bitgen = np.random.PCG64(np.random.SeedSequence(self.seed))
        self.buffer = np.empty(0, dtype=np.uint64)
        self.pos = 0

    def reserve(self, count: int = REFILL_WORDS) -> None:
        """Ensure at least ``count`` unread words are buffered."""
        available = len(self.buffer) - self.pos
        if available >= count:
            return
        fresh = self._bitgen.random_raw(max(count - available, REFILL_WORDS))
        self.buffer = np.concatenate([self.buffer[self.pos:], fresh])
        self.pos = 0

    def next_word(self) -> int:
        self.reserve(1)
        word = int(self.buffer[self.pos])
        self.pos += 1
        return word

    def bounded(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` by masked rejection (no modulo bias)."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        mask = (1 << (bound - 1).bit_length()) - 1
        while True:
            x = self.next_word() & mask
            if x < bound:
                return x
