"""Discrete-time paintbox-driven chain on partitions with at most k blocks.

One step from B: for every block B_i draw a paintbox C_i and a uniform
relabelling sigma_i of the k columns, place C_{i,sigma_i(j)} ∩ B_i in
column j, and read the new state off the nonempty column unions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import exp, factorial, lgamma
from typing import Sequence

import numpy as np

from .masses import NuMeasure, PitmanDirichlet, RngStream
from .paintbox import paint, rho
from .partitions import (
    DimensionError,
    SetPartition,
    enumerate_partitions,
    extensions,
    meet,
    restricted_bell,
)

MAX_STATES = 50_000
MAX_PERMANENT_SIZE = 10


class StateError(ValueError):
    """A state has more blocks than the chain allows."""


class SizeError(ValueError):
    """Requested object is too large to materialize."""


def _check_state(part: SetPartition, k: int) -> None:
    if part.num_blocks > k:
        raise StateError(f"state {part} has {part.num_blocks} blocks, more than k={k}")


# --- the matrix construction -------------------------------------------------

def inverse_permutations(sigmas: np.ndarray) -> np.ndarray:
    """Row-wise inverses of an (r, k) array of 0-based permutations."""
    sigmas = np.asarray(sigmas)
    inv = np.empty_like(sigmas)
    rows = np.arange(sigmas.shape[0])[:, None]
    inv[rows, sigmas] = np.arange(sigmas.shape[1])[None, :]
    return inv


def matrix_columns(state: SetPartition, labels: np.ndarray, sigmas: np.ndarray) -> np.ndarray:
    """Column index (0-based) of every element in the array B ∩ C^sigma.

    ``labels`` has shape (r, n) with r >= #B: ``labels[i, x-1]`` is the
    0-based block label of element x in C_{i+1}.  Only entries with x in
    B_{i+1} are read.  ``sigmas[i]`` maps column j to the label
    sigma_{i+1}(j), so an element with label l sits in column
    sigma^{-1}(l).
    """
    row = state.labels()
    inv = inverse_permutations(sigmas)
    lab = np.asarray(labels)[row, np.arange(state.n)]
    return inv[row, lab]


def matrix_step(state: SetPartition, labels: np.ndarray, sigmas: np.ndarray) -> tuple[SetPartition, SetPartition]:
    """Apply one matrix construction; returns (new state, partition into nonempty cells)."""
    cols = matrix_columns(state, labels, sigmas)
    new = SetPartition.from_labels(cols)
    cells = SetPartition.from_labels(state.labels() * sigmas.shape[1] + cols)
    return new, cells


def sample_row_labels(state: SetPartition, nu: NuMeasure, k: int, rng: RngStream) -> np.ndarray:
    """Color labels for one paintbox per block, each drawn only on its own block."""
    lab = np.zeros((state.num_blocks, state.n), dtype=np.int64)
    for i, block in enumerate(state.blocks):
        s = nu.sample(rng)
        if s.support > k:
            raise StateError(f"nu puts mass beyond coordinate {k}")
        idx = np.asarray(block) - 1
        lab[i, idx] = paint(s, len(block), rng) - 1
    return lab


def sample_sigmas(rows: int, k: int, rng: RngStream) -> np.ndarray:
    return np.array([rng.permutation(k) for _ in range(rows)], dtype=np.int64).reshape(rows, k)


def step_sample_detailed(state: SetPartition, nu: NuMeasure, k: int, rng: RngStream) -> tuple[SetPartition, SetPartition]:
    _check_state(state, k)
    labels = sample_row_labels(state, nu, k, rng)
    sigmas = sample_sigmas(state.num_blocks, k, rng)
    return matrix_step(state, labels, sigmas)


def step_sample(state: SetPartition, nu: NuMeasure, k: int, rng: RngStream) -> SetPartition:
    """One transition of the chain, sampled by the matrix construction."""
    return step_sample_detailed(state, nu, k, rng)[0]


# --- exact transition probabilities ----------------------------------------

def intersection_profiles(b: SetPartition, b2: SetPartition) -> list[tuple[int, ...]]:
    """For each block of ``b``, the block sizes of ``b2`` restricted to it."""
    if b.n != b2.n:
        raise DimensionError(f"partitions of [{b.n}] and [{b2.n}]")
    r1, r2 = b.labels(), b2.labels()
    m1, m2 = b.num_blocks, b2.num_blocks
    table = np.bincount(r1 * m2 + r2, minlength=m1 * m2).reshape(m1, m2)
    return [tuple(sorted((int(c) for c in row if c), reverse=True)) for row in table]


def transition_exact(b: SetPartition, b2: SetPartition, nu: NuMeasure, k: int) -> float:
    """p_n(B, B'; nu) = k!/(k-#B')! prod_b (k-#B'|b)!/k! rho_nu(B'|b)."""
    _check_state(b, k)
    _check_state(b2, k)
    return _transition_from_profiles(b2.num_blocks, intersection_profiles(b, b2), nu, k)


def _transition_from_profiles(m2: int, profiles, nu: NuMeasure, k: int) -> float:
    prob = factorial(k) / factorial(k - m2)
    for prof in profiles:
        prob *= factorial(k - len(prof)) / factorial(k)
        prob *= rho(prof, nu)
        if prob == 0.0:
            return 0.0
    return prob


def _perm_cycle_counts(perms: np.ndarray) -> np.ndarray:
    m, n = perms.shape
    rows = np.arange(m)
    counts = np.zeros(m, dtype=np.int64)
    for i in range(n):
        # i starts a cycle iff it is the least element on its cycle
        least = np.full(m, i)
        cur = perms[:, i].copy()
        for _ in range(n - 1):
            least = np.minimum(least, cur)
            cur = perms[rows, cur]
        counts += least == i
    return counts


@lru_cache(maxsize=None)
def _permutation_table(n: int) -> tuple[np.ndarray, np.ndarray]:
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    return perms, _perm_cycle_counts(perms)


def alpha_permanent(matrix: Sequence[Sequence[float]] | np.ndarray, alpha: float) -> float:
    """sum over permutations sigma of alpha^{#cycles(sigma)} prod_i M[i, sigma(i)], by brute force."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"need a square matrix, got shape {m.shape}")
    n = m.shape[0]
    if n > MAX_PERMANENT_SIZE:
        raise SizeError(f"{n}x{n} permanent exceeds the {MAX_PERMANENT_SIZE}x{MAX_PERMANENT_SIZE} guard")
    if n == 0:
        return 1.0
    if n <= 8:
        chunks = [_permutation_table(n)]
    else:
        chunks = _permutation_chunks(n)
    total = 0.0
    for perms, cycles in chunks:
        terms = np.prod(m[np.arange(n)[None, :], perms], axis=1)
        total += float(np.sum(terms * np.power(float(alpha), cycles)))
    return total


def _permutation_chunks(n: int, size: int = 200_000):
    it = itertools.permutations(range(n))
    while True:
        block = list(itertools.islice(it, size))
        if not block:
            return
        perms = np.array(block, dtype=np.int64)
        yield perms, _perm_cycle_counts(perms)


def log_alpha_permanent_partition(part: SetPartition | Sequence[int], alpha: float) -> float:
    sizes = part.block_sizes if isinstance(part, SetPartition) else part
    return sum(lgamma(alpha + b) - lgamma(alpha) for b in sizes)


def alpha_permanent_partition(part: SetPartition | Sequence[int], alpha: float) -> float:
    """alpha-permanent of a partition's co-membership matrix: product of rising factorials alpha^(#b)."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return exp(log_alpha_permanent_partition(part, alpha))


def transition_alpha_k(b: SetPartition, b2: SetPartition, alpha: float, k: int) -> float:
    """Closed form k!/(k-#B')! per_{alpha/k}(B ∧ B') / per_alpha(B)."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    _check_state(b, k)
    _check_state(b2, k)
    logp = lgamma(k + 1) - lgamma(k - b2.num_blocks + 1)
    logp += log_alpha_permanent_partition(meet(b, b2), alpha / k)
    logp -= log_alpha_permanent_partition(b, alpha)
    return exp(logp)


# --- materialized kernels --------------------------------------------------

@dataclass
class TransitionKernel:
    n: int
    k: int
    states: list[SetPartition]
    probs: np.ndarray
    nu: NuMeasure | None = None
    index: dict[SetPartition, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {s: i for i, s in enumerate(self.states)}

    def prob(self, b: SetPartition, b2: SetPartition) -> float:
        return float(self.probs[self.index[b], self.index[b2]])

    def row(self, b: SetPartition) -> np.ndarray:
        return self.probs[self.index[b]]

    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "k": self.k,
            "states": [s.to_json() for s in self.states],
            "probs": self.probs.tolist(),
        }
        if self.nu is not None:
            out["nu"] = self.nu.to_json()
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "TransitionKernel":
        from .masses import nu_from_config

        states = [SetPartition.from_json(s) for s in obj["states"]]
        nu = nu_from_config(obj["nu"]) if "nu" in obj else None
        n = int(obj.get("n", states[0].n))
        k = int(obj.get("k", max(s.num_blocks for s in states)))
        return cls(n, k, states, np.array(obj["probs"], dtype=float), nu)


def _check_size(n: int, k: int) -> None:
    count = restricted_bell(n, k)
    if count > MAX_STATES:
        raise SizeError(f"{count} states for n={n}, k={k} exceeds the {MAX_STATES} guard")


def build_kernel(n: int, k: int, nu: NuMeasure | None = None, alpha: float | None = None) -> TransitionKernel:
    """Dense transition matrix over all partitions of [n] with at most k blocks.

    Pass ``nu`` for the general formula, or ``alpha`` for the closed form of
    the chain driven by PD(-alpha/k, alpha).
    """
    if (nu is None) == (alpha is None):
        raise ValueError("give exactly one of nu and alpha")
    _check_size(n, k)
    if nu is not None and nu.support > k:
        raise StateError(f"nu lives on {nu.support} coordinates, more than k={k}")
    states = enumerate_partitions(n, k)
    m = len(states)
    probs = np.empty((m, m))
    if alpha is not None:
        for i, b in enumerate(states):
            for j, b2 in enumerate(states):
                probs[i, j] = transition_alpha_k(b, b2, alpha, k)
        nu = PitmanDirichlet(alpha, k)
    else:
        # the value depends on (B, B') only through #B' and the restriction profiles
        memo: dict = {}
        for i, b in enumerate(states):
            for j, b2 in enumerate(states):
                key = (b2.num_blocks, tuple(sorted(intersection_profiles(b, b2))))
                if key not in memo:
                    memo[key] = _transition_from_profiles(key[0], key[1], nu, k)
                probs[i, j] = memo[key]
    return TransitionKernel(n, k, states, probs, nu)


def row_sum_defect(kern: TransitionKernel) -> float:
    return float(np.max(np.abs(kern.probs.sum(axis=1) - 1.0)))


def extension_defect(small_states, small: np.ndarray, big_index: dict, big: np.ndarray, k: int) -> float:
    """Largest violation of M_n(B,B') = sum_{B'' extends B'} M_{n+1}(B*, B'') over B* extending B.

    Works for transition matrices and rate matrices alike.
    """
    ext_idx = [[big_index[e] for e in extensions(s, k)] for s in small_states]
    lumped = np.stack([big[:, cols].sum(axis=1) for cols in ext_idx], axis=1)
    worst = 0.0
    for i in range(len(small_states)):
        for star in ext_idx[i]:
            worst = max(worst, float(np.max(np.abs(small[i] - lumped[star]))))
    return worst


def consistency_defect(small: TransitionKernel, big: TransitionKernel) -> float:
    if big.n != small.n + 1 or big.k != small.k:
        raise DimensionError("kernels must be at sizes n and n+1 with equal k")
    return extension_defect(small.states, small.probs, big.index, big.probs, small.k)


def check_consistency(n: int, k: int, nu: NuMeasure | None = None, alpha: float | None = None) -> float:
    small = build_kernel(n, k, nu=nu, alpha=alpha)
    big = build_kernel(n + 1, k, nu=nu, alpha=alpha)
    return consistency_defect(small, big)
