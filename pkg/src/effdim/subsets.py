"""Coordinate subsets u of 1:d stored as bit masks.

Index j (1-based) lives in bit j-1.  The empty set is ``Subset(0, d)``.
Integrands live in at most 64 dimensions, but weight-space searches may ask
for subsets of a longer prefix 1:d, so the ambient d may exceed 64.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

MAX_DIM = 64
MAX_AMBIENT = 4096


@dataclass(frozen=True, order=True)
class Subset:
    bits: int
    d: int

    def __post_init__(self):
        object.__setattr__(self, "bits", int(self.bits))
        object.__setattr__(self, "d", int(self.d))
        if not 1 <= self.d <= MAX_AMBIENT:
            raise ValueError(f"ambient dimension must be in 1..{MAX_AMBIENT}, got {self.d}")
        if self.bits < 0 or self.bits >> self.d:
            raise ValueError(f"mask {self.bits:#x} has bits above position {self.d}")

    @classmethod
    def of(cls, indices: Iterable[int], d: int | None = None) -> "Subset":
        """Build from 1-based indices; ``d`` defaults to the largest index (at least 1)."""
        idx = sorted(set(int(j) for j in indices))
        if idx and idx[0] < 1:
            raise ValueError("subset indices are 1-based")
        if d is None:
            d = max(idx[-1] if idx else 1, 1)
        bits = 0
        for j in idx:
            bits |= 1 << (j - 1)
        return cls(bits, d)

    @classmethod
    def full(cls, d: int) -> "Subset":
        return cls((1 << d) - 1, d)

    @classmethod
    def first(cls, s: int, d: int) -> "Subset":
        """The leading block 1:s."""
        return cls((1 << s) - 1, d)

    @classmethod
    def parse(cls, text: str, d: int | None = None) -> "Subset":
        """Parse ``"{1,3}"`` style keys; ``"{}"`` and ``"∅"`` are the empty set."""
        t = text.strip()
        if t in ("∅", "{}", ""):
            return cls(0, d or 1)
        m = re.fullmatch(r"\{\s*(\d+(?:\s*,\s*\d+)*)\s*\}", t)
        if not m:
            raise ValueError(f"cannot parse subset {text!r}")
        return cls.of((int(s) for s in m.group(1).split(",")), d)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(j + 1 for j in range(self.d) if self.bits >> j & 1)

    @property
    def zero_based(self) -> list[int]:
        return [j for j in range(self.d) if self.bits >> j & 1]

    def __len__(self) -> int:
        return bin(self.bits).count("1")

    def __bool__(self) -> bool:
        return self.bits != 0

    def __contains__(self, j: int) -> bool:
        return 1 <= j <= self.d and bool(self.bits >> (j - 1) & 1)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    @property
    def ceil(self) -> int:
        """Largest index, 0 for the empty set."""
        return self.bits.bit_length()

    @property
    def floor(self) -> int:
        return (self.bits & -self.bits).bit_length()

    def complement(self) -> "Subset":
        return Subset(((1 << self.d) - 1) ^ self.bits, self.d)

    def issubset(self, other: "Subset") -> bool:
        return self.bits & ~other.bits == 0

    def __or__(self, other: "Subset") -> "Subset":
        return Subset(self.bits | other.bits, max(self.d, other.d))

    def subsets(self) -> Iterator["Subset"]:
        """All v ⊆ self, in increasing mask order."""
        v = 0
        while True:
            yield Subset(v, self.d)
            if v == self.bits:
                return
            v = (v - self.bits) & self.bits

    def __str__(self) -> str:
        return "{" + ",".join(str(j) for j in self.indices) + "}"

    def __repr__(self) -> str:
        return f"Subset({self}, d={self.d})"


def all_subsets(d: int) -> Iterator[Subset]:
    for bits in range(1 << d):
        yield Subset(bits, d)


def mask_cardinality(masks: np.ndarray) -> np.ndarray:
    """Vectorised popcount for nonnegative int64 masks."""
    m = masks.astype(np.uint64)
    m = m - ((m >> np.uint64(1)) & np.uint64(0x5555555555555555))
    m = (m & np.uint64(0x3333333333333333)) + ((m >> np.uint64(2)) & np.uint64(0x3333333333333333))
    m = (m + (m >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return ((m * np.uint64(0x0101010101010101)) >> np.uint64(56)).astype(np.int64)


def mask_ceiling(masks: np.ndarray) -> np.ndarray:
    """Vectorised bit_length (largest 1-based index); exact below 2**53."""
    _, exponent = np.frexp(np.asarray(masks, dtype=np.float64))
    return exponent.astype(np.int64)


def mask_floor(masks: np.ndarray) -> np.ndarray:
    m = masks.astype(np.int64)
    return mask_ceiling(m & -m)
