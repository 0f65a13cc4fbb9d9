"""Paintbox partitions: sampling and exact evaluation of their laws."""

from __future__ import annotations

import itertools
from functools import lru_cache
from math import exp, lgamma
from typing import Sequence

import numpy as np

from .masses import DiscreteMixture, MassPartition, NuMeasure, PitmanDirichlet, RngStream
from .partitions import SetPartition


def paint(s: MassPartition, n: int, rng: RngStream) -> np.ndarray:
    """n i.i.d. colors in {1, ..., k} with P(color = j) = s_j."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    p = np.asarray(s.masses, dtype=float)
    if p[0] == 1.0:
        return np.ones(n, dtype=np.int64)
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    return np.minimum(np.searchsorted(cdf, rng.gen.random(n), side="right"), len(p) - 1) + 1


def paintbox_sample(s: MassPartition, n: int, rng: RngStream) -> tuple[SetPartition, np.ndarray]:
    colors = paint(s, n, rng)
    return SetPartition.from_labels(colors), colors


def paintbox_sample_nu(nu: NuMeasure, n: int, rng: RngStream) -> SetPartition:
    return paintbox_sample(nu.sample(rng), n, rng)[0]


def _profile(part: SetPartition | Sequence[int]) -> tuple[int, ...]:
    sizes = part.block_sizes if isinstance(part, SetPartition) else part
    return tuple(sorted(sizes, reverse=True))


def rho_point(sizes: Sequence[int], s: Sequence[float]) -> float:
    """Probability that a paintbox from s produces a given partition with these block sizes.

    Sums prod_b s_{c(b)}^{#b} over injective color assignments c.
    """
    m, k = len(sizes), len(s)
    if m > k:
        return 0.0
    total = 0.0
    for colors in itertools.permutations(range(k), m):
        term = 1.0
        for size, c in zip(sizes, colors):
            term *= s[c] ** size
            if term == 0.0:
                break
        total += term
    return total


def rho_discrete(part: SetPartition | Sequence[int], nu: DiscreteMixture) -> float:
    return _rho_discrete_cached(_profile(part), nu)


@lru_cache(maxsize=None)
def _rho_discrete_cached(profile: tuple[int, ...], nu: DiscreteMixture) -> float:
    return sum(w * rho_point(profile, s.masses) for w, s in nu.atoms)


def _log_rising(x: float, m: int) -> float:
    return lgamma(x + m) - lgamma(x)


def _log_falling_factorial(k: int, m: int) -> float:
    # log k!/(k-m)!
    return lgamma(k + 1) - lgamma(k - m + 1)


def eppf_dirichlet_multinomial(part: SetPartition | Sequence[int], alpha: float, k: int) -> float:
    """Law of a paintbox over ranked symmetric Dirichlet(alpha, ..., alpha) on k coordinates.

    (k!/(k-#B)!) prod_b Gamma(alpha+#b)/Gamma(alpha) / (Gamma(k alpha + n)/Gamma(k alpha)).
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    sizes = _profile(part)
    if len(sizes) > k:
        return 0.0
    n = sum(sizes)
    logp = _log_falling_factorial(k, len(sizes))
    logp += sum(_log_rising(alpha, b) for b in sizes)
    logp -= _log_rising(k * alpha, n)
    return exp(logp)


def eppf_alpha_k(part: SetPartition | Sequence[int], alpha: float, k: int) -> float:
    """Law of the paintbox over PD(-alpha/k, alpha): (k!/(k-#B)!) per_{alpha/k}(B) / alpha^(n rising)."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    sizes = _profile(part)
    if len(sizes) > k:
        return 0.0
    n = sum(sizes)
    a = alpha / k
    logp = _log_falling_factorial(k, len(sizes))
    logp += sum(_log_rising(a, b) for b in sizes)
    logp -= _log_rising(alpha, n)
    return exp(logp)


def rho(part: SetPartition | Sequence[int], nu: NuMeasure) -> float:
    """Probability of ``part`` under the nu-mixture of paintboxes."""
    if isinstance(nu, PitmanDirichlet):
        return eppf_alpha_k(part, nu.alpha, nu.k)
    return rho_discrete(part, nu)

