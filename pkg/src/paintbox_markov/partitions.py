"""Set partitions of [n] = {1, ..., n}.

A partition is stored as a tuple of blocks, each block a sorted tuple of
1-indexed elements, blocks ordered by their least element.  That canonical
form is the only representation; equivalence-relation and Boolean-matrix
views are derived on demand.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np


class DimensionError(ValueError):
    """Operands live on ground sets of different sizes."""


@dataclass(frozen=True)
class SetPartition:
    n: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"ground set size must be positive, got {self.n}")
        seen = []
        for b in self.blocks:
            if not b:
                raise ValueError("empty block")
            if any(b[i] >= b[i + 1] for i in range(len(b) - 1)):
                raise ValueError(f"block {b} is not strictly increasing")
            seen.extend(b)
        if sorted(seen) != list(range(1, self.n + 1)):
            raise ValueError(f"blocks {self.blocks} do not partition [{self.n}]")
        firsts = [b[0] for b in self.blocks]
        if firsts != sorted(firsts):
            raise ValueError("blocks are not in order of least element")

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], n: int | None = None) -> "SetPartition":
        """Canonicalize an arbitrary collection of blocks (empties dropped)."""
        bs = [tuple(sorted(b)) for b in blocks]
        bs = [b for b in bs if b]
        bs.sort(key=lambda b: b[0])
        if n is None:
            n = sum(len(b) for b in bs)
        return cls(n, tuple(bs))

    @classmethod
    def from_labels(cls, labels: Sequence[int] | np.ndarray) -> "SetPartition":
        """Partition whose blocks are the classes of equal label; element i+1 has labels[i]."""
        n = len(labels)
        if n == 0:
            raise ValueError("need at least one element")
        if n <= 64:
            # plain dict pass beats np.unique at small sizes
            slot: dict = {}
            bs: list[list[int]] = []
            for i, v in enumerate(labels.tolist() if isinstance(labels, np.ndarray) else labels, start=1):
                j = slot.get(v)
                if j is None:
                    slot[v] = len(bs)
                    bs.append([i])
                else:
                    bs[j].append(i)
            return cls._trusted(n, tuple(map(tuple, bs)))
        labels = np.asarray(labels)
        _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
        order = np.argsort(first, kind="stable")
        rank = np.empty_like(order)
        rank[order] = np.arange(len(order))
        canon = rank[inverse.ravel()]
        idx = np.argsort(canon, kind="stable")
        bounds = np.cumsum(np.bincount(canon))[:-1]
        blocks = tuple(tuple(int(x) + 1 for x in chunk) for chunk in np.split(idx, bounds))
        return cls._trusted(n, blocks)

    @classmethod
    def _trusted(cls, n: int, blocks: tuple[tuple[int, ...], ...]) -> "SetPartition":
        """Construct without validation, for blocks already known to be canonical."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "n", n)
        object.__setattr__(obj, "blocks", blocks)
        return obj

    @classmethod
    def one_block(cls, n: int) -> "SetPartition":
        return cls(n, (tuple(range(1, n + 1)),))

    @classmethod
    def singletons(cls, n: int) -> "SetPartition":
        return cls(n, tuple((i,) for i in range(1, n + 1)))

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @property
    def block_sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def labels(self) -> np.ndarray:
        """0-based block index of each element (length n), read-only."""
        return self._labels

    @cached_property
    def _labels(self) -> np.ndarray:
        out = np.empty(self.n, dtype=np.int64)
        for j, b in enumerate(self.blocks):
            out[np.asarray(b) - 1] = j
        out.setflags(write=False)
        return out

    def matrix(self) -> np.ndarray:
        """n x n Boolean co-membership matrix, as floats."""
        lab = self.labels()
        return (lab[:, None] == lab[None, :]).astype(float)

    def padded(self, k: int) -> tuple[tuple[int, ...], ...]:
        """Blocks followed by k - #B empty blocks."""
        if self.num_blocks > k:
            raise ValueError(f"{self.num_blocks} blocks exceed k={k}")
        return self.blocks + ((),) * (k - self.num_blocks)

    def to_json(self) -> dict:
        return {"n": self.n, "blocks": [list(b) for b in self.blocks]}

    @classmethod
    def from_json(cls, obj: dict) -> "SetPartition":
        part = cls.from_blocks(obj["blocks"], n=int(obj["n"]))
        return part

    def __str__(self) -> str:
        if self.n < 10:
            return "".join("{" + "".join(map(str, b)) + "}" for b in self.blocks)
        return "|".join(",".join(map(str, b)) for b in self.blocks)


def parse(text: str) -> SetPartition:
    """Parse the compact notation ``{12}{3}`` (single-digit elements only)."""
    blocks = []
    for chunk in text.replace(" ", "").strip("{}").split("}{"):
        blocks.append([int(c) for c in chunk])
    return SetPartition.from_blocks(blocks)


@dataclass(frozen=True)
class PartitionPermutation:
    """A bijection of [n]; ``mapping[i-1]`` is the image of i."""

    n: int
    mapping: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.mapping) != list(range(1, self.n + 1)):
            raise ValueError(f"{self.mapping} is not a permutation of [{self.n}]")

    @classmethod
    def identity(cls, n: int) -> "PartitionPermutation":
        return cls(n, tuple(range(1, n + 1)))

    @classmethod
    def transposition(cls, n: int, i: int, j: int) -> "PartitionPermutation":
        m = list(range(1, n + 1))
        m[i - 1], m[j - 1] = j, i
        return cls(n, tuple(m))

    def inverse(self) -> "PartitionPermutation":
        inv = [0] * self.n
        for i, img in enumerate(self.mapping, start=1):
            inv[img - 1] = i
        return PartitionPermutation(self.n, tuple(inv))


def _restricted_growth_strings(n: int, k: int) -> Iterator[list[int]]:
    # a[i] <= max(a[:i]) + 1, values < k
    a = [0] * n

    def rec(i, m):
        if i == n:
            yield a
            return
        for v in range(min(m + 2, k)):
            a[i] = v
            yield from rec(i + 1, max(m, v))

    yield from rec(1, 0)


def enumerate_partitions(n: int, k: int) -> list[SetPartition]:
    """All partitions of [n] with at most k blocks, canonical, no duplicates."""
    if n < 1 or k < 1:
        raise ValueError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    out = []
    for rgs in _restricted_growth_strings(n, k):
        blocks: list[list[int]] = []
        for i, v in enumerate(rgs, start=1):
            if v == len(blocks):
                blocks.append([])
            blocks[v].append(i)
        out.append(SetPartition(n, tuple(tuple(b) for b in blocks)))
    return out


def restrict(part: SetPartition, m: int) -> SetPartition:
    """Projection onto [m]: intersect every block with [m]."""
    if not 1 <= m <= part.n:
        raise IndexError(f"restriction size {m} outside [1, {part.n}]")
    if m == part.n:
        return part
    blocks = tuple(t for t in (tuple(x for x in b if x <= m) for b in part.blocks) if t)
    return SetPartition(m, blocks)


def restrict_to(part: SetPartition, subset: Sequence[int]) -> SetPartition:
    """Restriction to an arbitrary subset, relabelled onto [len(subset)] in increasing order."""
    subset = sorted(subset)
    pos = {x: i for i, x in enumerate(subset, start=1)}
    blocks = [[pos[x] for x in b if x in pos] for b in part.blocks]
    return SetPartition.from_blocks(blocks, n=len(subset))


def extensions(part: SetPartition, k: int) -> list[SetPartition]:
    """Partitions of [n+1] with at most k blocks that restrict to ``part``.

    Element n+1 joins each block in turn; the singleton extension comes last
    and is present only while ``part`` has fewer than k blocks.
    """
    new = part.n + 1
    out = []
    for j in range(part.num_blocks):
        blocks = list(part.blocks)
        blocks[j] = blocks[j] + (new,)
        out.append(SetPartition(new, tuple(blocks)))
    if part.num_blocks < k:
        out.append(SetPartition(new, part.blocks + ((new,),)))
    return out


def meet(a: SetPartition, b: SetPartition) -> SetPartition:
    """Greatest lower bound: all nonempty pairwise block intersections."""
    if a.n != b.n:
        raise DimensionError(f"cannot meet partitions of [{a.n}] and [{b.n}]")
    la, lb = a.labels(), b.labels()
    return SetPartition.from_labels(la * b.num_blocks + lb)


def apply_permutation(part: SetPartition, sigma: PartitionPermutation) -> SetPartition:
    """Relabel elements: i ~ j in the result iff sigma^-1(i) ~ sigma^-1(j) in ``part``."""
    if part.n != sigma.n:
        raise DimensionError(f"permutation of [{sigma.n}] applied to partition of [{part.n}]")
    return SetPartition.from_blocks(
        [[sigma.mapping[x - 1] for x in b] for b in part.blocks], n=part.n
    )


def prefix_distance(a: SetPartition, b: SetPartition) -> Fraction:
    """1 / (largest m with equal restrictions to [m]); 1/n when a == b."""
    if a.n != b.n:
        raise DimensionError(f"partitions of [{a.n}] and [{b.n}]")
    la, lb = a.labels(), b.labels()
    # restrictions to [m] agree iff the co-membership relations agree on [m]
    m = 1
    for i in range(1, a.n):
        same_a = la[:i] == la[i]
        same_b = lb[:i] == lb[i]
        if not np.array_equal(same_a, same_b):
            break
        m = i + 1
    return Fraction(1, m)


def all_permutations(n: int) -> Iterator[PartitionPermutation]:
    for p in itertools.permutations(range(1, n + 1)):
        yield PartitionPermutation(n, p)


def stirling2(n: int, j: int) -> int:
    """Stirling number of the second kind, by the usual recurrence."""
    row = [1] + [0] * j  # S(0, .)
    for m in range(1, n + 1):
        new = [0] * (j + 1)
        for i in range(1, min(m, j) + 1):
            new[i] = i * row[i] + row[i - 1]
        row = new
    return row[j]


def restricted_bell(n: int, k: int) -> int:
    """Number of partitions of [n] with at most k blocks."""
    return sum(stirling2(n, j) for j in range(1, min(n, k) + 1))
