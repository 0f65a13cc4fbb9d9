"""Ranked mass partitions on the k-simplex and mixing measures over them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

SIMPLEX_TOL = 1e-12
ARITH_TOL = 1e-9


class DomainError(ValueError):
    pass


class RngStream:
    """Reproducible random stream keyed by (seed, stream id).

    Thin wrapper over :class:`numpy.random.Generator` seeded from a
    ``SeedSequence`` whose spawn key is the stream id, so distinct ids give
    independent sequences and identical pairs reproduce identical draws.
    """

    def __init__(self, seed: int = 0, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        self.gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(self.stream,)))
        )

    def split(self, stream: int) -> "RngStream":
        return RngStream(self.seed, stream)

    def permutation(self, k: int) -> np.ndarray:
        """Uniform permutation of {0, ..., k-1} (Fisher-Yates)."""
        return self.gen.permutation(k)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream={self.stream})"


@dataclass(frozen=True)
class MassPartition:
    masses: tuple[float, ...]

    def __post_init__(self):
        m = self.masses
        if not m:
            raise DomainError("empty mass vector")
        if any(x < 0 for x in m):
            raise DomainError(f"negative mass in {m}")
        if any(m[i] < m[i + 1] for i in range(len(m) - 1)):
            raise DomainError(f"masses {m} are not ranked")
        if abs(sum(m) - 1.0) > SIMPLEX_TOL:
            raise DomainError(f"masses sum to {sum(m)!r}, not 1")

    @classmethod
    def _trusted(cls, masses: tuple[float, ...]) -> "MassPartition":
        """Skip validation for vectors just produced by sorting and normalizing."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "masses", masses)
        return obj

    @property
    def k(self) -> int:
        return len(self.masses)

    @property
    def support(self) -> int:
        """Index of the last nonzero coordinate (smallest k' with the point in the k'-simplex)."""
        nz = [i for i, x in enumerate(self.masses) if x > 0]
        return nz[-1] + 1

    def padded(self, k: int) -> np.ndarray:
        if self.support > k:
            raise DomainError(f"{self.masses} has mass beyond coordinate {k}")
        out = np.zeros(k)
        m = min(k, self.k)
        out[:m] = self.masses[:m]
        return out

    def is_trivial(self) -> bool:
        return self.masses[0] == 1.0

    def to_json(self) -> dict:
        return {"masses": list(self.masses)}

    @classmethod
    def from_json(cls, obj) -> "MassPartition":
        if isinstance(obj, dict):
            obj = obj["masses"]
        return cls(tuple(float(x) for x in obj))


def rank(masses: Sequence[float]) -> MassPartition:
    """Decreasing rearrangement of a probability vector."""
    arr = np.asarray(masses, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("expected a nonempty vector")
    if np.any(arr < 0):
        raise DomainError(f"negative entry in {arr}")
    total = arr.sum()
    if abs(total - 1.0) > ARITH_TOL:
        raise DomainError(f"entries sum to {total!r}, not 1")
    arr = np.sort(arr)[::-1] / total
    return MassPartition(tuple(float(x) for x in arr))


@dataclass(frozen=True)
class DiscreteMixture:
    """Finitely supported measure: ``atoms`` is a sequence of (weight, MassPartition)."""

    atoms: tuple[tuple[float, MassPartition], ...]

    def __post_init__(self):
        if not self.atoms:
            raise DomainError("mixture needs at least one atom")
        ws = [w for w, _ in self.atoms]
        if any(w <= 0 for w in ws):
            raise DomainError("atom weights must be positive")
        if abs(sum(ws) - 1.0) > SIMPLEX_TOL:
            raise DomainError(f"atom weights sum to {sum(ws)!r}")

    @classmethod
    def point(cls, masses: Sequence[float]) -> "DiscreteMixture":
        return cls(((1.0, MassPartition(tuple(masses))),))

    @classmethod
    def of(cls, *pairs) -> "DiscreteMixture":
        return cls(tuple((float(w), MassPartition(tuple(s))) for w, s in pairs))

    @property
    def support(self) -> int:
        return max(s.support for _, s in self.atoms)

    def is_degenerate(self) -> bool:
        """All mass on (1, 0, ..., 0)."""
        return all(s.is_trivial() for _, s in self.atoms)

    def sample(self, rng: RngStream) -> MassPartition:
        if len(self.atoms) == 1:
            return self.atoms[0][1]
        ws = np.array([w for w, _ in self.atoms])
        i = rng.gen.choice(len(ws), p=ws / ws.sum())
        return self.atoms[i][1]

    def to_json(self) -> dict:
        return {"type": "discrete", "atoms": [[w, list(s.masses)] for w, s in self.atoms]}


@dataclass(frozen=True)
class PitmanDirichlet:
    """PD(-alpha/k, alpha) on the ranked k-simplex, i.e. ranked symmetric Dirichlet(alpha/k)."""

    alpha: float
    k: int

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.k < 1:
            raise DomainError(f"k must be positive, got {self.k}")

    @property
    def support(self) -> int:
        return self.k

    def is_degenerate(self) -> bool:
        return self.k == 1

    def sample(self, rng: RngStream) -> MassPartition:
        return ranked_dirichlet(self.alpha / self.k, self.k, rng)

    def to_json(self) -> dict:
        return {"type": "pd", "alpha": self.alpha, "k": self.k}


NuMeasure = Union[DiscreteMixture, PitmanDirichlet]


def ranked_dirichlet(shape: float, k: int, rng: RngStream) -> MassPartition:
    """Ranked symmetric Dirichlet(shape, ..., shape) on k coordinates via normalized gammas."""
    g = rng.gen.standard_gamma(shape, size=k)
    while g.sum() == 0.0:  # all underflowed; only reachable for tiny shapes
        g = rng.gen.standard_gamma(shape, size=k)
    g = np.sort(g)[::-1] / g.sum()
    return MassPartition._trusted(tuple(g.tolist()))


def sample_nu(nu: NuMeasure, rng: RngStream) -> MassPartition:
    return nu.sample(rng)


def nu_from_config(cfg: dict) -> NuMeasure:
    kind = cfg.get("type")
    if kind == "discrete":
        atoms = []
        for atom in cfg["atoms"]:
            if isinstance(atom, dict):
                w, s = atom["weight"], atom["masses"]
            else:
                w, s = atom
            atoms.append((float(w), MassPartition(tuple(float(x) for x in s))))
        return DiscreteMixture(tuple(atoms))
    if kind == "pd":
        return PitmanDirichlet(float(cfg["alpha"]), int(cfg["k"]))
    raise DomainError(f"unknown measure type {kind!r}")
