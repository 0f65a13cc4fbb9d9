import itertools

import numpy as np
import pytest
from scipy import stats

from paintbox_markov.frequency import (
    MassTrajectory,
    column_totals,
    coupled_set_mass,
    effective_sample_size,
    empirical_frequencies,
    mass_step,
    max_of_symmetric_beta_cdf,
    occupation_sample,
    simulate_mass_process,
    stationary_ks,
    weighted_ks,
)
from paintbox_markov.masses import MassPartition, PitmanDirichlet, RngStream
from paintbox_markov.partitions import parse


def test_mass_step_all_relabellings():
    x = MassPartition((0.7, 0.3))
    p1 = MassPartition((0.6, 0.4))
    p2 = MassPartition((0.9, 0.1))
    results = set()
    for s1, s2 in itertools.product(itertools.permutations(range(2)), repeat=2):
        y = mass_step(x, [p1, p2], np.array([s1, s2]))
        results.add(tuple(round(v, 12) for v in y.masses))
    # column sums by hand: same orientation 0.7*0.6 + 0.3*0.9 = 0.69; crossed 0.7*0.6 + 0.3*0.1 = 0.45
    assert results == {(0.69, 0.31), (0.55, 0.45)}


def test_column_totals_preserve_mass():
    rng = RngStream(2)
    x = rng.gen.dirichlet(np.ones(4))
    draws = rng.gen.dirichlet(np.ones(4), size=4)
    sig = np.array([rng.permutation(4) for _ in range(4)])
    assert column_totals(x, draws, sig).sum() == pytest.approx(1.0, abs=1e-14)


def test_empirical_frequencies():
    np.testing.assert_allclose(empirical_frequencies(parse("{1}{234}"), 3), [0.75, 0.25, 0.0])
    with pytest.raises(ValueError):
        empirical_frequencies(parse("{1}{2}{3}"), 2)


def test_mass_process_rows():
    traj = simulate_mass_process(MassPartition((1.0, 0.0)), PitmanDirichlet(1.0, 2), 2, 2.0, 5.0, RngStream(6))
    rows = traj.to_rows()
    assert rows[0] == [0.0, 1.0, 0.0]
    assert all(len(r) == 3 for r in rows)
    assert all(r[1] >= r[2] for r in rows)


def test_occupation_sample_weights():
    traj = MassTrajectory(MassPartition((1.0, 0.0)), [(1.0, MassPartition((0.6, 0.4))), (3.0, MassPartition((0.5, 0.5)))], 4.0)
    vals, w = occupation_sample(traj, 0.5, 4.0)
    np.testing.assert_allclose(w, [0.5, 2.0, 1.0])
    np.testing.assert_allclose(vals[:, 0], [1.0, 0.6, 0.5])


def test_max_of_uniform_is_uniform_on_upper_half():
    x = np.array([0.4, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(max_of_symmetric_beta_cdf(x, 1.0), [0.0, 0.0, 0.5, 1.0], atol=1e-12)


def test_weighted_ks_equal_weights_matches_scipy():
    v = RngStream(3).gen.random(300)
    d, p = weighted_ks(v, np.ones_like(v), stats.uniform.cdf, n_eff=len(v))
    ref = stats.kstest(v, "uniform")
    assert d == pytest.approx(ref.statistic, abs=1e-12)
    assert p == pytest.approx(ref.pvalue, rel=1e-6)


def test_effective_sample_size_shrinks_with_correlation():
    rng = RngStream(4)
    iid = rng.gen.random(2000)
    walk = np.cumsum(rng.gen.normal(size=2000))
    w = np.ones(2000)
    assert effective_sample_size(iid, w) > 1500
    assert effective_sample_size(walk, w) < 50


def test_stationary_ks_accepts_and_rejects():
    _, p = stationary_ks(1.0, 1.0, 500.0, RngStream(10))
    assert p > 0.01
    # negative control: the same path against the wrong law
    traj = simulate_mass_process(MassPartition((1.0, 0.0)), PitmanDirichlet(1.0, 2), 2, 1.0, 500.0, RngStream(10))
    vals, w = occupation_sample(traj, 250.0, 500.0)
    _, p_bad = weighted_ks(vals[:, 0], w, lambda x: max_of_symmetric_beta_cdf(x, 5.0))
    assert p_bad < 0.01


def test_coupled_set_mass_alignment():
    run = coupled_set_mass(2000, MassPartition((0.5, 0.3, 0.2)), PitmanDirichlet(1.0, 3), 3, 1.0, 3.0, RngStream(7))
    assert len(run.errors) == len(run.masses.jumps)
    assert run.sup_error < 0.08
    for t, x in run.masses.jumps:
        assert abs(sum(x.masses) - 1.0) < 1e-12
        assert run.sets.state_at(t).num_blocks <= 3
