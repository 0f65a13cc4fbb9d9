import itertools
from math import comb

import numpy as np
import pytest
from scipy import integrate, stats

from paintbox_markov.masses import DiscreteMixture, MassPartition, PitmanDirichlet, RngStream
from paintbox_markov.paintbox import (
    eppf_alpha_k,
    eppf_dirichlet_multinomial,
    paint,
    paintbox_sample,
    paintbox_sample_nu,
    rho,
    rho_point,
)
from paintbox_markov.partitions import (
    PartitionPermutation,
    SetPartition,
    apply_permutation,
    enumerate_partitions,
    extensions,
    parse,
)

MEASURES = [
    DiscreteMixture.point((0.6, 0.4)),
    DiscreteMixture.of((0.7, (0.5, 0.3, 0.2)), (0.3, (0.8, 0.2))),
    PitmanDirichlet(0.5, 3),
    PitmanDirichlet(1.0, 2),
    PitmanDirichlet(2.0, 2),
]


def rho_by_colorings(part, s):
    """Sum over all colorings of [n] whose color classes are exactly the blocks."""
    total = 0.0
    for colors in itertools.product(range(len(s)), repeat=part.n):
        if SetPartition.from_labels(colors) == part:
            total += np.prod([s[c] for c in colors])
    return total


def beta_oracle(part, alpha):
    """Paintbox law over PD(-alpha/2, alpha) on two coordinates by quadrature over Beta(alpha/2, alpha/2)."""
    dens = stats.beta(alpha / 2, alpha / 2).pdf
    f = lambda u: rho_point(part.block_sizes, (u, 1 - u)) * dens(u)
    return integrate.quad(f, 0, 1, limit=200)[0]


def test_paint_colors():
    rng = RngStream(3)
    c = paint(MassPartition((0.5, 0.5)), 1000, rng)
    assert set(c.tolist()) == {1, 2}
    assert np.all(paint(MassPartition((1.0, 0.0)), 5, rng) == 1)
    part, colors = paintbox_sample(MassPartition((0.5, 0.3, 0.2)), 10, rng)
    assert part == SetPartition.from_labels(colors)
    with pytest.raises(ValueError):
        paint(MassPartition((1.0,)), 0, rng)


@pytest.mark.parametrize("s", [(0.6, 0.4), (0.5, 0.3, 0.2), (1.0, 0.0)])
def test_rho_point_matches_colorings(s):
    for part in enumerate_partitions(4, 4):
        assert rho_point(part.block_sizes, s) == pytest.approx(rho_by_colorings(part, s), abs=1e-14)


def test_hand_values():
    # one block of two from s = (1/2, 1/2): 1/4 + 1/4
    assert rho(parse("{12}"), DiscreteMixture.point((0.5, 0.5))) == pytest.approx(0.5)
    # PD(1, 2): E[U^2 + (1-U)^2] with U ~ Beta(1/2, 1/2)
    assert eppf_alpha_k(parse("{12}"), 1.0, 2) == pytest.approx(0.75, abs=1e-14)
    # stationary law of the (1, 2) chain, one block of two
    assert eppf_dirichlet_multinomial(parse("{12}"), 1.0, 2) == pytest.approx(2 / 3, abs=1e-14)
    assert eppf_dirichlet_multinomial(parse("{1}{2}"), 1.0, 2) == pytest.approx(1 / 3, abs=1e-14)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.5])
def test_eppf_alpha_k_against_quadrature(alpha):
    for part in enumerate_partitions(4, 2):
        assert eppf_alpha_k(part, alpha, 2) == pytest.approx(beta_oracle(part, alpha), rel=1e-7, abs=1e-10)


def test_dirichlet_multinomial_is_eppf_of_shape_alpha():
    # Dirichlet(alpha, ..., alpha) on k coordinates is PD(-alpha, k alpha)
    for part in enumerate_partitions(5, 3):
        for alpha in (0.5, 1.0, 2.0):
            assert eppf_dirichlet_multinomial(part, alpha, 3) == pytest.approx(eppf_alpha_k(part, 3 * alpha, 3), rel=1e-12)


@pytest.mark.parametrize("nu", MEASURES, ids=str)
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_normalized(nu, n):
    k = nu.support
    assert sum(rho(p, nu) for p in enumerate_partitions(n, k)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("nu", MEASURES, ids=str)
def test_consistent_under_restriction(nu):
    k = nu.support
    for n in range(1, 5):
        for p in enumerate_partitions(n, k):
            assert rho(p, nu) == pytest.approx(sum(rho(q, nu) for q in extensions(p, k)), abs=1e-13)


@pytest.mark.parametrize("nu", MEASURES, ids=str)
def test_exchangeable(nu):
    sigma = PartitionPermutation(4, (3, 1, 4, 2))
    for p in enumerate_partitions(4, nu.support):
        assert rho(apply_permutation(p, sigma), nu) == pytest.approx(rho(p, nu), abs=1e-15)


def test_too_many_blocks_has_zero_mass():
    assert eppf_alpha_k(SetPartition.singletons(3), 1.0, 2) == 0.0
    assert eppf_dirichlet_multinomial(SetPartition.singletons(3), 1.0, 2) == 0.0
    assert rho(SetPartition.singletons(3), DiscreteMixture.point((0.5, 0.5))) == 0.0


@pytest.mark.parametrize("nu", [MEASURES[1], MEASURES[2]], ids=str)
def test_sampler_matches_law(nu):
    n, draws = 4, 40_000
    states = enumerate_partitions(n, nu.support)
    index = {s: i for i, s in enumerate(states)}
    counts = np.zeros(len(states))
    rng = RngStream(17)
    for _ in range(draws):
        counts[index[paintbox_sample_nu(nu, n, rng)]] += 1
    p = np.array([rho(s, nu) for s in states])
    se = np.sqrt(p * (1 - p) / draws)
    assert np.all(np.abs(counts / draws - p) < 4 * se + 1e-12)


def test_block_count_law_point_mass():
    # number of blocks from s = (1/2, 1/2) on [n]: 1 block w.p. 2^(1-n)
    s = (0.5, 0.5)
    n = 5
    one = sum(rho_point(p.block_sizes, s) for p in enumerate_partitions(n, 1))
    assert one == pytest.approx(2 * 0.5**n)
    two = sum(rho_point(p.block_sizes, s) for p in enumerate_partitions(n, 2) if p.num_blocks == 2)
    assert two == pytest.approx(sum(comb(n, j) for j in range(1, n)) * 0.5**n)
