"""
Frozen, bit-exact pseudo-random scheme for procedural tree automorphisms.

For a user seed ``s`` and a ball ``B`` the stream starts from
``splitmix64_mix(s XOR fnv1a64(encode_ball(B)))`` and draws successive 64-bit
words with SplitMix64 steps. Uniform integers in ``[0, k)`` reject words at or
above ``floor(2**64 / k) * k`` and reduce the rest mod ``k``. Permutations are
Fisher-Yates shuffles running from the last index down; affine actions fill
the matrix row-major, redraw the whole matrix while its determinant is zero
mod p, then draw the translation componentwise.

Changing anything in this module changes every seeded morphism and vector
field.
"""

from __future__ import annotations

from typing import List, Tuple

from .fp import Matrix, Vector, det_mod

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & MASK64
    return h


def splitmix64_mix(z: int) -> int:
    z = (z + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """SplitMix64 stream; ``next_word`` advances the state by the golden gamma."""

    def __init__(self, state: int) -> None:
        self.state = state & MASK64

    @classmethod
    def for_key(cls, seed: int, key: bytes) -> "SplitMix64":
        return cls(splitmix64_mix((seed & MASK64) ^ fnv1a64(key)))

    def next_word(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, k: int) -> int:
        if k <= 0:
            raise ValueError("bound must be positive")
        limit = ((1 << 64) // k) * k
        while True:
            word = self.next_word()
            if word < limit:
                return word % k

    def permutation(self, n: int) -> Tuple[int, ...]:
        items: List[int] = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return tuple(items)

    def affine(self, p: int, d: int) -> Tuple[Matrix, Vector]:
        while True:
            flat = [self.below(p) for _ in range(d * d)]
            a = tuple(tuple(flat[r * d:(r + 1) * d]) for r in range(d))
            if det_mod(a, p):
                break
        b = tuple(self.below(p) for _ in range(d))
        return a, b

    def nonzero_vector(self, p: int, d: int) -> Vector:
        """Uniform nonzero vector of F_p^d (index draw in ``[1, p**d)``)."""
        index = 1 + self.below(p**d - 1)
        residues = [0] * d
        for i in range(d - 1, -1, -1):
            index, residues[i] = divmod(index, p)
        return tuple(residues)


__all__ = ["SplitMix64", "fnv1a64", "splitmix64_mix", "MASK64"]
