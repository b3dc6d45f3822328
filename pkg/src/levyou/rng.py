"""Reproducible random streams.

A stream is identified by a 64-bit seed plus a path of nonnegative integers.
The path is fed to ``numpy.random.SeedSequence`` as its spawn key, so the
mapping (seed, path) -> draws is fixed and independent of evaluation order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# Top-level stream tags keep unrelated consumers apart under one seed.
TAG_COORD = 1
TAG_BLOCK = 2
TAG_LARGE = 3
TAG_ORACLE = 4
TAG_SMALL = 5
TAG_PERM = 6


@dataclass(frozen=True)
class RngStream:
    seed: int
    index: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be a 64-bit nonnegative integer")
        if any(int(k) < 0 for k in self.index):
            raise DomainError("stream index entries must be nonnegative")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "index", tuple(int(k) for k in self.index))

    def child(self, *keys: int) -> "RngStream":
        return RngStream(self.seed, self.index + tuple(keys))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.index)
        return np.random.Generator(np.random.PCG64(ss))

    @property
    def label(self) -> str:
        return ".".join(str(k) for k in self.index) or "-"

    @classmethod
    def parse(cls, seed: str | int, label: str) -> "RngStream":
        index = () if label == "-" else tuple(int(k) for k in label.split("."))
        return cls(int(seed), index)


def rademacher(gen: np.random.Generator, size) -> np.ndarray:
    return (2 * gen.integers(0, 2, size=size, dtype=np.int8) - 1).astype(np.int8)
