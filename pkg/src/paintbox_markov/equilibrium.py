"""Stationary distributions of the finite chains and the checks built on them."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernel import TransitionKernel, build_kernel
from .paintbox import eppf_dirichlet_multinomial
from .partitions import (
    DimensionError,
    PartitionPermutation,
    SetPartition,
    apply_permutation,
    extensions,
)


class UniquenessError(RuntimeError):
    """The mixing measure sits entirely on (1, 0, ..., 0); no unique stationary law is guaranteed."""


@dataclass
class StationaryDistribution:
    n: int
    k: int
    states: list[SetPartition]
    weights: np.ndarray
    index: dict[SetPartition, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {s: i for i, s in enumerate(self.states)}

    def __getitem__(self, part: SetPartition) -> float:
        return float(self.weights[self.index[part]])

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "states": [s.to_json() for s in self.states],
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "StationaryDistribution":
        states = [SetPartition.from_json(s) for s in obj["states"]]
        return cls(int(obj["n"]), int(obj["k"]), states, np.array(obj["weights"], dtype=float))


def is_degenerate(kernel: TransitionKernel) -> bool:
    return kernel.nu is not None and kernel.nu.is_degenerate() and kernel.n > 1


def solve_stationary(kernel: TransitionKernel, force: bool = False) -> StationaryDistribution:
    """Left fixed vector of the kernel from a dense linear solve.

    One equation of (P^T - I) theta = 0 is replaced by sum(theta) = 1.
    Raises UniquenessError for a degenerate mixing measure unless
    ``force``, in which case power iteration from the uniform vector is
    returned instead.
    """
    if is_degenerate(kernel):
        if not force:
            raise UniquenessError("mixing measure is degenerate at (1, 0, ..., 0)")
        return power_iteration(kernel)
    p = kernel.probs
    m = p.shape[0]
    a = p.T - np.eye(m)
    a[-1, :] = 1.0
    rhs = np.zeros(m)
    rhs[-1] = 1.0
    theta = np.linalg.solve(a, rhs)
    theta = np.clip(theta, 0.0, None)
    theta /= theta.sum()
    return StationaryDistribution(kernel.n, kernel.k, list(kernel.states), theta)


def power_iteration(kernel: TransitionKernel, tol: float = 1e-14, maxiter: int = 100_000) -> StationaryDistribution:
    p = kernel.probs
    theta = np.full(p.shape[0], 1.0 / p.shape[0])
    for _ in range(maxiter):
        nxt = theta @ p
        if np.max(np.abs(nxt - theta)) < tol:
            theta = nxt
            break
        theta = nxt
    return StationaryDistribution(kernel.n, kernel.k, list(kernel.states), theta / theta.sum())


def stationarity_residual(theta: StationaryDistribution, kernel: TransitionKernel) -> float:
    return float(np.max(np.abs(theta.weights @ kernel.probs - theta.weights)))


def check_projection_consistency(theta_big: StationaryDistribution, theta_small: StationaryDistribution) -> float:
    """max_B |theta_n(B) - sum over extensions B* of B of theta_{n+1}(B*)|."""
    if theta_big.n != theta_small.n + 1 or theta_big.k != theta_small.k:
        raise DimensionError(
            f"need sizes n+1 and n with equal k, got {theta_big.n},{theta_big.k} and {theta_small.n},{theta_small.k}"
        )
    worst = 0.0
    for b in theta_small.states:
        lumped = sum(theta_big[e] for e in extensions(b, theta_small.k))
        worst = max(worst, abs(theta_small[b] - lumped))
    return worst


def check_exchangeability(theta: StationaryDistribution) -> float:
    """max |theta(sigma B) - theta(B)| over adjacent transpositions sigma."""
    worst = 0.0
    for i in range(1, theta.n):
        sigma = PartitionPermutation.transposition(theta.n, i, i + 1)
        for b in theta.states:
            worst = max(worst, abs(theta[apply_permutation(b, sigma)] - theta[b]))
    return worst


def check_detailed_balance(n: int, k: int, alpha: float, relative: bool = False) -> float:
    """Largest violation of rho(B) p(B,B') = rho(B') p(B',B) for the (alpha, k) chain.

    With ``relative`` each pair's gap is divided by the larger side.
    """
    kern = build_kernel(n, k, alpha=alpha)
    rho = np.array([eppf_dirichlet_multinomial(b, alpha, k) for b in kern.states])
    flow = rho[:, None] * kern.probs
    gap = np.abs(flow - flow.T)
    if relative:
        scale = np.maximum(np.abs(flow), np.abs(flow.T))
        gap = np.divide(gap, scale, out=np.zeros_like(gap), where=scale > 0)
    return float(gap.max())


def eppf_match_defect(theta: StationaryDistribution, alpha: float) -> float:
    """max_B |theta(B) - Dirichlet-multinomial(B; alpha, k)|."""
    return max(abs(theta[b] - eppf_dirichlet_multinomial(b, alpha, theta.k)) for b in theta.states)


def tv_after(kernel: TransitionKernel, theta: StationaryDistribution, steps: int) -> float:
    """Worst total-variation distance to theta after ``steps`` steps, over all starting states."""
    pt = np.linalg.matrix_power(kernel.probs, steps)
    return float(0.5 * np.max(np.abs(pt - theta.weights[None, :]).sum(axis=1)))


def solve_for(n: int, k: int, nu=None, alpha=None) -> StationaryDistribution:
    return solve_stationary(build_kernel(n, k, nu=nu, alpha=alpha))

