import numpy as np
import pytest
from scipy import integrate, stats

from paintbox_markov.masses import (
    DiscreteMixture,
    DomainError,
    MassPartition,
    PitmanDirichlet,
    RngStream,
    nu_from_config,
    rank,
    ranked_dirichlet,
)


def test_mass_partition_validation():
    MassPartition((0.5, 0.5))
    with pytest.raises(DomainError):
        MassPartition((0.3, 0.7))
    with pytest.raises(DomainError):
        MassPartition((0.6, 0.3))
    with pytest.raises(DomainError):
        MassPartition((1.2, -0.2))
    with pytest.raises(DomainError):
        MassPartition(())


def test_support_and_padding():
    s = MassPartition((0.7, 0.3, 0.0))
    assert s.k == 3
    assert s.support == 2
    np.testing.assert_array_equal(s.padded(2), [0.7, 0.3])
    np.testing.assert_array_equal(s.padded(4), [0.7, 0.3, 0.0, 0.0])
    with pytest.raises(DomainError):
        s.padded(1)
    assert MassPartition((1.0, 0.0)).is_trivial()


def test_rank():
    assert rank([0.2, 0.5, 0.3]).masses == (0.5, 0.3, 0.2)
    with pytest.raises(DomainError):
        rank([0.5, 0.6])
    with pytest.raises(DomainError):
        rank([1.5, -0.5])


def test_rng_streams_reproducible_and_distinct():
    a = RngStream(5, 1).gen.random(4)
    b = RngStream(5, 1).gen.random(4)
    c = RngStream(5, 2).gen.random(4)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)
    assert sorted(RngStream(1).permutation(6).tolist()) == list(range(6))
    assert RngStream(3).split(4).stream == 4


def test_discrete_mixture():
    nu = DiscreteMixture.of((0.25, (0.6, 0.4)), (0.75, (1.0, 0.0)))
    assert nu.support == 2
    assert not nu.is_degenerate()
    assert DiscreteMixture.point((1.0, 0.0, 0.0)).is_degenerate()
    rng = RngStream(11)
    hits = sum(nu.sample(rng).masses[0] == 0.6 for _ in range(20_000))
    se = np.sqrt(0.25 * 0.75 / 20_000)
    assert abs(hits / 20_000 - 0.25) < 4 * se
    with pytest.raises(DomainError):
        DiscreteMixture.of((0.5, (1.0,)))


def test_pitman_dirichlet_basics():
    nu = PitmanDirichlet(1.0, 2)
    assert nu.support == 2
    assert not nu.is_degenerate()
    assert PitmanDirichlet(3.0, 1).is_degenerate()
    with pytest.raises(DomainError):
        PitmanDirichlet(0.0, 2)
    with pytest.raises(DomainError):
        PitmanDirichlet(1.0, 0)


def test_config_round_trip():
    for nu in (PitmanDirichlet(0.5, 3), DiscreteMixture.of((0.3, (0.5, 0.5)), (0.7, (0.9, 0.1)))):
        assert nu_from_config(nu.to_json()) == nu
    nu = nu_from_config({"type": "discrete", "atoms": [{"weight": 1, "masses": [0.5, 0.5]}]})
    assert nu == DiscreteMixture.point((0.5, 0.5))
    with pytest.raises(DomainError):
        nu_from_config({"type": "gem"})
    assert MassPartition.from_json(MassPartition((0.5, 0.5)).to_json()) == MassPartition((0.5, 0.5))


def test_largest_mass_mean_pd_1_2():
    # PD(-1/2, 1) on two coordinates: s_1 = max(U, 1 - U), U ~ Beta(1/2, 1/2)
    oracle, _ = integrate.quad(lambda u: max(u, 1 - u) * stats.beta(0.5, 0.5).pdf(u), 0, 1, points=[0.5])
    assert oracle == pytest.approx(0.5 + 1 / np.pi, abs=1e-7)
    rng = RngStream(2)
    draws = np.array([PitmanDirichlet(1.0, 2).sample(rng).masses[0] for _ in range(40_000)])
    se = draws.std() / np.sqrt(len(draws))
    assert abs(draws.mean() - oracle) < 4 * se


@pytest.mark.parametrize("shape,k", [(0.5, 3), (2.0, 4)])
def test_ranked_dirichlet_moments(shape, k):
    rng = RngStream(9)
    draws = np.array([ranked_dirichlet(shape, k, rng).masses for _ in range(20_000)])
    assert np.all(np.diff(draws, axis=1) <= 0)
    np.testing.assert_allclose(draws.sum(axis=1), 1.0, atol=1e-12)
    # second moment of the sum of squares, which ranking does not change
    sq = (draws**2).sum(axis=1)
    exact = k * shape * (shape + 1) / (k * shape * (k * shape + 1))
    assert abs(sq.mean() - exact) < 4 * sq.std() / np.sqrt(len(sq))


def test_unranked_coordinates_exchangeable():
    # before ranking, the first coordinate of Dirichlet(a, a, a) is Beta(a, 2a)
    g = RngStream(4).gen.standard_gamma(0.5, size=(20_000, 3))
    x = g[:, 0] / g.sum(axis=1)
    assert stats.kstest(x, stats.beta(0.5, 1.0).cdf).pvalue > 0.01


def test_ranked_dirichlet_deterministic():
    a = ranked_dirichlet(0.5, 3, RngStream(1))
    b = ranked_dirichlet(0.5, 3, RngStream(1))
    assert a == b
