"""Splittable, label-addressed random streams.

A :class:`RandomStream` is an immutable (seed, path) pair.  Children are
derived by appending labels, so the numbers drawn under a given path never
depend on how many other streams were consumed before it.  This is what makes
parallel and serial Monte Carlo runs agree bit for bit.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np


def _label_key(label) -> int:
    if isinstance(label, (int, np.integer)):
        if label < 0:
            raise ValueError("integer labels must be nonnegative")
        return int(label)
    digest = hashlib.blake2b(str(label).encode("utf-8"), digest_size=8).digest()
    # high bit keeps string labels disjoint from small integer labels
    return int.from_bytes(digest, "little") | (1 << 63)


@dataclass(frozen=True)
class RandomStream:
    seed: int
    path: tuple = ()

    def child(self, *labels) -> "RandomStream":
        return RandomStream(self.seed, self.path + tuple(labels))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=int(self.seed) & ((1 << 128) - 1),
            spawn_key=tuple(_label_key(lab) for lab in self.path),
        )
        return np.random.Generator(np.random.Philox(ss))

    def uniform(self, size) -> np.ndarray:
        """Uniforms on the open interval (0, 1)."""
        u = self.generator().random(size)
        # Generator.random is [0, 1); 0 is a measure-zero event but must not
        # reach a quantile function.
        return np.where(u == 0.0, np.finfo(float).tiny, u)

    def standard_normal(self, size) -> np.ndarray:
        return self.generator().standard_normal(size)

    def derive_seed(self) -> int:
        """A 63-bit integer seed owned by this path."""
        return int(self.generator().integers(0, 2**63 - 1))


def as_stream(rng) -> RandomStream:
    if isinstance(rng, RandomStream):
        return rng
    if rng is None:
        return RandomStream(0)
    return RandomStream(int(rng))
