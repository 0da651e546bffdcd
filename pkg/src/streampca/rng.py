"""Deterministic, counter-based random number generation.

Every random quantity in this package is a pure function of a 64-bit
``seed`` and a 64-bit ``counter``.  Output word ``i`` of a stream is

    out(i) = mix64((seed + (i + 1) * GOLDEN) mod 2**64)

where ``mix64`` is the SplitMix64 finalizer and ``GOLDEN`` is the 64-bit
golden-ratio constant.  Counter-based generation makes substreams cheap:
consumers record how many words they used and jumping ahead is free.

Standard normals are produced by the Box-Muller transform.  Normal ``m``
of a stream consumes the two words at counters ``2m`` and ``2m + 1``:

    u1 = unit(out(2m)),  u2 = unit(out(2m + 1))
    z  = sqrt(-2 ln u1) * cos(2 pi u2)

with ``unit(x) = ((x >> 12) + 0.5) * 2**-52``, which lies strictly inside
(0, 1) so the logarithm is always finite.  (At 53-bit resolution the top
value would round to exactly 1.0 under ties-to-even.)

Seeds for independent streams are derived by folding labels into a hash
chain (`derive_seed`), so adding a new configuration or trial never
perturbs the draws of existing ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def raw64(seed: int, counter: int) -> int:
    """Stream word at ``counter`` for ``seed`` (pure-python reference)."""
    return mix64((seed + ((counter + 1) * GOLDEN)) & MASK64)


def fnv1a64(data: str | bytes) -> int:
    """FNV-1a hash of a string or byte sequence, 64-bit variant."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & MASK64
    return h


def derive_seed(*parts: int | str) -> int:
    """Fold integer and string labels into a 64-bit seed.

    The chain is ``h = mix64(h ^ fold(part))`` starting from ``h = 0``,
    where integers fold as their value mod 2**64 and strings as their
    FNV-1a hash.  Deterministic across platforms and runs.
    """
    h = 0
    for part in parts:
        if isinstance(part, str):
            v = fnv1a64(part)
        elif isinstance(part, (int, np.integer)):
            v = int(part) & MASK64
        else:
            raise InvalidArgumentError(f"seed parts must be int or str, got {type(part)!r}")
        h = mix64(h ^ v)
    return h


@dataclass
class RngState:
    """Position in a counter-based random stream.

    ``seed`` identifies the stream, ``counter`` the next unused word.
    Bulk draws advance ``counter`` by exactly the number of words
    consumed, so state can be serialized and resumed bit-identically.
    """

    seed: int
    counter: int = field(default=0)

    def __post_init__(self) -> None:
        if not 0 <= int(self.seed) <= MASK64:
            raise InvalidArgumentError("seed must fit in 64 bits")
        if int(self.counter) < 0:
            raise InvalidArgumentError("counter must be nonnegative")
        self.seed = int(self.seed)
        self.counter = int(self.counter)

    def clone(self) -> "RngState":
        return RngState(self.seed, self.counter)

    def take(self, words: int) -> int:
        """Reserve ``words`` counters and return the first one."""
        if words < 0:
            raise InvalidArgumentError("words must be nonnegative")
        start = self.counter
        self.counter += words
        return start

    def uint64(self, n: int) -> np.ndarray:
        """Next ``n`` raw 64-bit words."""
        from .backend import kernels

        out = np.empty(n, dtype=np.uint64)
        start = self.take(n)
        kernels().fill_uint64(np.uint64(self.seed), np.uint64(start), out)
        return out

    def normals(self, n: int) -> np.ndarray:
        """Next ``n`` standard normal draws (two words each)."""
        from .backend import kernels

        out = np.empty(n, dtype=np.float64)
        start = self.take(2 * n)
        kernels().fill_normals(np.uint64(self.seed), np.uint64(start), out)
        return out
