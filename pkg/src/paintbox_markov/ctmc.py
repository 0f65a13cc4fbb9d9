"""Continuous-time chain: rate matrices and two simulation drivers.

The embedded driver holds in B for an exponential time with rate
lambda * (1 - p(B, B)) and then jumps according to the kernel row with the
diagonal removed.  The Poissonian driver runs the matrix construction at
the atoms of a rate-lambda Poisson process, k fresh paintboxes per atom,
and keeps only the atoms that change the state.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .kernel import TransitionKernel, build_kernel, extension_defect, matrix_step, sample_sigmas
from .masses import NuMeasure, RngStream
from .paintbox import paintbox_sample_nu
from .partitions import DimensionError, SetPartition


@dataclass
class RateMatrix:
    n: int
    k: int
    states: list[SetPartition]
    rates: np.ndarray
    lam: float
    index: dict[SetPartition, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {s: i for i, s in enumerate(self.states)}

    def exit_rate(self, b: SetPartition) -> float:
        return -float(self.rates[self.index[b], self.index[b]])


def build_rate_matrix(kernel: TransitionKernel, lam: float) -> RateMatrix:
    """Q = lambda (P - I)."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    q = lam * (kernel.probs - np.eye(len(kernel.states)))
    return RateMatrix(kernel.n, kernel.k, list(kernel.states), q, float(lam))


def check_rate_consistency(n: int, k: int, lam: float, nu: NuMeasure | None = None, alpha: float | None = None) -> float:
    small = build_rate_matrix(build_kernel(n, k, nu=nu, alpha=alpha), lam)
    big = build_rate_matrix(build_kernel(n + 1, k, nu=nu, alpha=alpha), lam)
    return extension_defect(small.states, small.rates, big.index, big.rates, k)


@dataclass
class Trajectory:
    """Right-continuous path: ``initial`` on [0, t_1), then each jump state until the next jump."""

    initial: SetPartition
    jumps: list[tuple[float, SetPartition]] = field(default_factory=list)
    horizon: float = float("inf")
    # (time, state after the atom) for every driving atom, effective or not
    events: list[tuple[float, SetPartition]] | None = None

    def state_at(self, t: float) -> SetPartition:
        i = bisect_right([tj for tj, _ in self.jumps], t)
        return self.initial if i == 0 else self.jumps[i - 1][1]

    def states_at(self, times) -> list[SetPartition]:
        jt = [tj for tj, _ in self.jumps]
        out = []
        for t in times:
            i = bisect_right(jt, t)
            out.append(self.initial if i == 0 else self.jumps[i - 1][1])
        return out

    def to_json(self) -> dict:
        return {
            "initial": self.initial.to_json(),
            "jumps": [[t, s.to_json()] for t, s in self.jumps],
            "horizon": self.horizon,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Trajectory":
        return cls(
            SetPartition.from_json(obj["initial"]),
            [(float(t), SetPartition.from_json(s)) for t, s in obj["jumps"]],
            float(obj.get("horizon", float("inf"))),
        )


def simulate_embedded(start: SetPartition, rates: RateMatrix, horizon: float, rng: RngStream) -> Trajectory:
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    q = rates.rates
    i = rates.index[start]
    t = 0.0
    jumps = []
    while True:
        out_rate = -q[i, i]
        if out_rate <= 0:
            break
        t += rng.gen.exponential(1.0 / out_rate)
        if t > horizon:
            break
        row = q[i].copy()
        row[i] = 0.0
        i = int(rng.gen.choice(len(row), p=row / row.sum()))
        jumps.append((t, rates.states[i]))
    return Trajectory(start, jumps, horizon)


@dataclass
class DrivingEvent:
    time: float
    draws: list[SetPartition]  # C_1..C_k restricted to the window [n]
    sigmas: np.ndarray  # (k, k); sigmas[i, j] = sigma_{i+1}(j+1) - 1

    def labels(self) -> np.ndarray:
        return np.stack([c.labels() for c in self.draws])


@dataclass
class EventStream:
    """Atoms (t, C_1, ..., C_k) of the driving Poisson process on [0, horizon], with the permutations."""

    n: int
    k: int
    lam: float
    horizon: float
    events: list[DrivingEvent]

    def times(self) -> list[float]:
        return [e.time for e in self.events]


def poisson_times(lam: float, horizon: float, rng: RngStream) -> list[float]:
    times = []
    if lam <= 0:
        return times
    t = rng.gen.exponential(1.0 / lam)
    while t <= horizon:
        times.append(t)
        t += rng.gen.exponential(1.0 / lam)
    return times


def generate_event_stream(n: int, nu: NuMeasure, k: int, lam: float, horizon: float, rng: RngStream) -> EventStream:
    if nu.support > k:
        raise ValueError(f"nu lives on {nu.support} coordinates, more than k={k}")
    events = []
    for t in poisson_times(lam, horizon, rng):
        draws = [paintbox_sample_nu(nu, n, rng) for _ in range(k)]
        events.append(DrivingEvent(t, draws, sample_sigmas(k, k, rng)))
    return EventStream(n, k, lam, horizon, events)


def drive(start: SetPartition, stream: EventStream, log_events: bool = False) -> Trajectory:
    """Run the matrix construction at every atom of ``stream``; record effective jumps."""
    if start.n != stream.n:
        raise DimensionError(f"start on [{start.n}] but stream window is [{stream.n}]")
    if start.num_blocks > stream.k:
        raise ValueError(f"start {start} has more than k={stream.k} blocks")
    state = start
    jumps = []
    log = [] if log_events else None
    for ev in stream.events:
        new, _ = matrix_step(state, ev.labels(), ev.sigmas)
        if new != state:
            jumps.append((ev.time, new))
            state = new
        if log is not None:
            log.append((ev.time, state))
    return Trajectory(start, jumps, stream.horizon, log)


def simulate_poissonian(
    start: SetPartition,
    nu: NuMeasure,
    k: int,
    lam: float,
    horizon: float,
    rng: RngStream,
    log_events: bool = False,
) -> Trajectory:
    stream = generate_event_stream(start.n, nu, k, lam, horizon, rng)
    return drive(start, stream, log_events=log_events)


def coupled_pair(
    pi: SetPartition,
    pi2: SetPartition,
    nu: NuMeasure,
    k: int,
    lam: float,
    horizon: float,
    rng: RngStream,
) -> tuple[Trajectory, Trajectory]:
    """Two processes driven by one shared event stream (same paintboxes, same permutations).

    Both trajectories carry the full event log, so their states can be
    compared at every atom of the stream.
    """
    if pi.n != pi2.n:
        raise DimensionError(f"starts on [{pi.n}] and [{pi2.n}]")
    stream = generate_event_stream(pi.n, nu, k, lam, horizon, rng)
    return drive(pi, stream, log_events=True), drive(pi2, stream, log_events=True)
