"""Ranked block frequencies and the measure-valued process on the k-simplex."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .ctmc import Trajectory, poisson_times
from .kernel import inverse_permutations, sample_sigmas
from .masses import MassPartition, NuMeasure, PitmanDirichlet, RngStream, rank
from .paintbox import paint
from .partitions import SetPartition


@dataclass
class MassTrajectory:
    initial: MassPartition
    jumps: list[tuple[float, MassPartition]] = field(default_factory=list)
    horizon: float = float("inf")

    def to_rows(self) -> list[list[float]]:
        """(time, s_1, ..., s_k) rows starting with time 0."""
        rows = [[0.0, *self.initial.masses]]
        rows += [[t, *x.masses] for t, x in self.jumps]
        return rows


def column_totals(x: np.ndarray, draws: np.ndarray, sigmas: np.ndarray) -> np.ndarray:
    """Unranked column sums sum_i x_i P^i_{sigma_i(j)} of the k x k mass array."""
    rows = np.arange(len(x))[:, None]
    return (x[:, None] * draws[rows, sigmas]).sum(axis=0)


def mass_step(x: MassPartition, draws: list[MassPartition], sigmas: np.ndarray) -> MassPartition:
    """Ranked column totals of the array with entries x_i P^i_{sigma_i(j)}."""
    k = len(draws)
    xv = x.padded(k)
    pv = np.stack([p.padded(k) for p in draws])
    return rank(column_totals(xv, pv, np.asarray(sigmas)))


def simulate_mass_process(
    x0: MassPartition, nu: NuMeasure, k: int, lam: float, horizon: float, rng: RngStream
) -> MassTrajectory:
    x = x0
    jumps = []
    for t in poisson_times(lam, horizon, rng):
        draws = [nu.sample(rng) for _ in range(k)]
        x = mass_step(x, draws, sample_sigmas(k, k, rng))
        jumps.append((t, x))
    return MassTrajectory(x0, jumps, horizon)


def empirical_frequencies(part: SetPartition, k: int) -> np.ndarray:
    """Block sizes over n, ranked and zero-padded to length k."""
    if part.num_blocks > k:
        raise ValueError(f"{part.num_blocks} blocks exceed k={k}")
    out = np.zeros(k)
    out[: part.num_blocks] = sorted(part.block_sizes, reverse=True)
    return out / part.n


@dataclass
class CoupledRun:
    sets: Trajectory
    masses: MassTrajectory
    errors: list[float]  # sup-norm gap after each atom

    @property
    def sup_error(self) -> float:
        return max(self.errors, default=0.0)


def coupled_set_mass(
    n: int, x0: MassPartition, nu: NuMeasure, k: int, lam: float, horizon: float, rng: RngStream
) -> CoupledRun:
    """Drive the set-valued chain on [n] and the mass process with one stream of mass draws.

    Rows are tracked by column label rather than least-element order, so
    the row with mass x_i is exactly the set of elements carrying label i.
    At each atom the mass process takes column totals of x_i P^i_{sigma_i(j)}
    while element e in row i gets a color from P^i and moves to column
    sigma_i^{-1}(color).
    """
    xv = x0.padded(k)
    lab = paint(x0, n, rng) - 1
    start = SetPartition.from_labels(lab)
    state = start
    jumps: list[tuple[float, SetPartition]] = []
    mjumps: list[tuple[float, MassPartition]] = []
    errors = []
    for t in poisson_times(lam, horizon, rng):
        draws = np.stack([nu.sample(rng).padded(k) for _ in range(k)])
        sigmas = sample_sigmas(k, k, rng)
        inv = inverse_permutations(sigmas)
        colors = np.empty(n, dtype=np.int64)
        for i in range(k):
            members = np.flatnonzero(lab == i)
            if members.size:
                colors[members] = paint(MassPartition(tuple(draws[i])), members.size, rng) - 1
        lab = inv[lab, colors]
        xv = column_totals(xv, draws, sigmas)
        x = rank(xv)
        new = SetPartition.from_labels(lab)
        if new != state:
            jumps.append((t, new))
            state = new
        mjumps.append((t, x))
        errors.append(float(np.max(np.abs(empirical_frequencies(new, k) - np.asarray(x.masses)))))
    return CoupledRun(Trajectory(start, jumps, horizon), MassTrajectory(x0, mjumps, horizon), errors)


def max_of_symmetric_beta_cdf(x, alpha: float) -> np.ndarray:
    """CDF of max(U, 1-U) for U ~ Beta(alpha, alpha): the largest coordinate of Dirichlet(alpha, alpha)."""
    x = np.asarray(x, dtype=float)
    b = stats.beta(alpha, alpha)
    return np.where(x < 0.5, 0.0, b.cdf(x) - b.cdf(1.0 - x))


def occupation_sample(traj: MassTrajectory, start: float, stop: float) -> tuple[np.ndarray, np.ndarray]:
    """Visited states of the path on [start, stop] with their holding times in that window."""
    times = [0.0] + [t for t, _ in traj.jumps]
    states = [traj.initial] + [x for _, x in traj.jumps]
    ends = times[1:] + [np.inf]
    vals, weights = [], []
    for t0, t1, x in zip(times, ends, states):
        lo, hi = max(t0, start), min(t1, stop)
        if hi > lo:
            vals.append(np.asarray(x.masses))
            weights.append(hi - lo)
    return np.array(vals), np.array(weights)


def effective_sample_size(values: np.ndarray, weights: np.ndarray) -> float:
    """Kish size of the weights, shrunk by the AR(1) factor (1 - r)/(1 + r) of the visit sequence."""
    kish = weights.sum() ** 2 / np.sum(weights**2)
    r = 0.0
    if len(values) > 2 and np.std(values) > 0:
        r = max(0.0, float(np.corrcoef(values[:-1], values[1:])[0, 1]))
    return kish * (1.0 - r) / (1.0 + r)


def weighted_ks(values: np.ndarray, weights: np.ndarray, cdf, n_eff: float | None = None) -> tuple[float, float]:
    """KS distance between the weighted empirical law of a visit sequence and ``cdf``, with p-value.

    ``values`` must be in visiting order when ``n_eff`` is left to default.
    """
    if n_eff is None:
        n_eff = effective_sample_size(values, weights)
    order = np.argsort(values)
    v = values[order]
    w = weights[order] / weights.sum()
    upper = np.cumsum(w)
    lower = upper - w
    f = cdf(v)
    d = float(max(np.max(upper - f), np.max(f - lower)))
    return d, float(stats.kstwo.sf(d, max(1, int(n_eff))))


def stationary_ks(
    alpha: float, lam: float, horizon: float, rng: RngStream, x0: MassPartition | None = None
) -> tuple[float, float]:
    """KS test of the occupation law of s_1 over [horizon/2, horizon] for the (alpha, 2) mass process.

    Reference: largest coordinate of Dirichlet(alpha, alpha).
    """
    x0 = x0 or MassPartition((1.0, 0.0))
    traj = simulate_mass_process(x0, PitmanDirichlet(alpha, 2), 2, lam, horizon, rng)
    vals, weights = occupation_sample(traj, horizon / 2, horizon)
    return weighted_ks(vals[:, 0], weights, lambda x: max_of_symmetric_beta_cdf(x, alpha))
