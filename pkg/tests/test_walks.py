import numpy as np
import pytest
from scipy import stats

from rbmsim.domains import unit_interval, unit_square
from rbmsim.lattice import build_lattice, transition_matrix
from rbmsim.oracles import chain_marginal
from rbmsim.walks import (
    covariation,
    interpolate,
    n_steps_for,
    sample_stationary_vertices,
    simulate_ctrw,
    simulate_discrete_walk,
    simulate_discrete_walks,
)


def test_step_count_uses_floor():
    assert n_steps_for(1.0, 3) == 64
    assert n_steps_for(0.3, 2) == 4


def test_one_step_from_middle_of_path_graph():
    lat = build_lattice(unit_interval(), 2)
    mid = lat.nearest_vertex([0.5])
    ens = simulate_discrete_walks(lat, mid, 1 / 16, seed=4, n_paths=20_000)
    v1 = ens.vertices[:, 1]
    assert set(np.unique(v1)) == set(lat.neighbors[mid][lat.neighbors[mid] >= 0])
    frac = np.mean(v1 == v1[0])
    assert abs(frac - 0.5) < 3 * np.sqrt(0.25 / 20_000)


def test_one_step_frequencies_match_kernel():
    lat = build_lattice(unit_square(), 3)
    corner = lat.index_of((1, 1))
    ens = simulate_discrete_walks(lat, corner, 1 / 64, seed=9, n_paths=100_000)
    counts = np.bincount(ens.vertices[:, 1], minlength=lat.size)
    row = transition_matrix(lat).dense()[corner]
    for y in np.flatnonzero(row):
        p = row[y]
        assert abs(counts[y] / 100_000 - p) < 3 * np.sqrt(p * (1 - p) / 100_000)
    assert counts[row == 0].sum() == 0


def test_stationary_start_probabilities():
    lat = build_lattice(unit_square(), 2)
    v = sample_stationary_vertices(lat, 60_000, seed=2)
    p = lat.measure / lat.measure.sum()
    center = lat.index_of((2, 2))
    assert p[center] == pytest.approx(1 / 6)
    counts = np.bincount(v, minlength=lat.size)
    assert stats.chisquare(counts, p * len(v)).pvalue > 1e-3


def test_stationary_marginal_at_step_100():
    lat = build_lattice(unit_square(), 3)
    K = transition_matrix(lat)
    pi = lat.measure / lat.measure.sum()
    assert np.allclose(chain_marginal(K, pi, 100), pi, atol=1e-12)
    ens = simulate_discrete_walks(lat, "stationary", 100 / 64, seed=5, n_paths=40_000, record="final")
    counts = np.bincount(ens, minlength=lat.size)
    assert stats.chisquare(counts, pi * len(ens)).pvalue > 1e-3


def test_every_step_is_to_a_neighbor():
    lat = build_lattice(unit_square(), 4)
    ens = simulate_discrete_walks(lat, "stationary", 0.5, seed=1, n_paths=50)
    a, b = ens.vertices[:, :-1].ravel(), ens.vertices[:, 1:].ravel()
    assert np.all((lat.neighbors[a] == b[:, None]).any(axis=1))


def test_batching_does_not_change_paths():
    lat = build_lattice(unit_square(), 4)
    ens = simulate_discrete_walks(lat, "stationary", 0.7, seed=3, n_paths=10)
    single = simulate_discrete_walk(lat, "stationary", 0.7, seed=3, path_id=7)
    assert np.array_equal(ens.vertices[7], single.vertices)
    part = simulate_discrete_walks(lat, "stationary", 0.7, seed=3, path_ids=[7, 2])
    assert np.array_equal(part.vertices[0], ens.vertices[7])
    final = simulate_discrete_walks(lat, "stationary", 0.7, seed=3, n_paths=10, record="final")
    assert np.array_equal(final, ens.vertices[:, -1])


def test_interpolation_modes():
    lat = build_lattice(unit_square(), 3)
    chain = simulate_discrete_walk(lat, lat.index_of((4, 4)), 0.25, seed=0)
    lin, step = interpolate(chain, "linear"), interpolate(chain, "step")
    dt = 4.0**-3
    pos = lat.positions[chain.vertices]
    for j in range(5):
        assert np.allclose(lin.at((j + 0.5) * dt), (pos[j] + pos[j + 1]) / 2)
        assert np.allclose(step.at(j * dt), pos[j])
        assert np.allclose(step.at((j + 1) * dt), pos[j + 1])
    assert lin.speed == 0.5


def test_constant_chain_interpolates_constant():
    from rbmsim.walks import ChainPath

    lat = build_lattice(unit_square(), 3)
    chain = ChainPath(lat, np.full(9, 10), 8 * 4.0**-3, 0, 0)
    tr = interpolate(chain)
    assert np.allclose(tr.at(np.linspace(0, tr.horizon, 17)), lat.positions[10])


def test_ctrw_holding_means():
    k = 3
    lat = build_lattice(unit_square(), k)
    inner = lat.index_of((4, 4))
    side = lat.index_of((1, 4))
    assert lat.degree[side] == 3
    for start, mean in ((inner, 4.0**-k), (side, 4.0**-k * 4 / 3)):
        first = np.array([simulate_ctrw(lat, start, 1.0, seed=11, path_id=i).times[1] for i in range(4000)])
        assert abs(first.mean() - mean) < 3 * mean / np.sqrt(len(first))


def test_ctrw_jump_chain_matches_discrete_walk():
    lat = build_lattice(unit_square(), 3)
    tr = simulate_ctrw(lat, "stationary", 0.5, seed=6, path_id=3)
    chain = simulate_discrete_walk(lat, "stationary", 10.0, seed=6, path_id=3)
    v = tr.meta["vertices"]
    assert np.array_equal(v, chain.vertices[: len(v)])
    assert tr.mode == "recorded" and np.all(np.diff(tr.times) > 0)


def test_covariation_interior_identity():
    k = 5
    lat = build_lattice(unit_square(), k)
    start = lat.index_of((16, 16))
    ens = simulate_discrete_walks(lat, start, 0.01, seed=0, n_paths=50)
    inner = lat.interior[ens.vertices].all(axis=1)
    assert inner.any()
    for i in np.flatnonzero(inner)[:10]:
        rep = covariation([ens.path(int(i))], 0.01)
        assert np.trace(np.asarray(rep.matrix)) == pytest.approx(n_steps_for(0.01, k) * 4.0**-k, abs=1e-15)


def test_covariation_stationary_ensemble():
    lat = build_lattice(unit_square(), 6)
    ens = simulate_discrete_walks(lat, "stationary", 1.0, seed=8, n_paths=1500)
    rep = covariation(ens, 1.0)
    m, se = np.asarray(rep.matrix), np.asarray(rep.stderr)
    assert abs(m[0, 1]) < 3 * se[0, 1] + 1e-12
    assert np.all(np.abs(np.diag(m) - 0.5) < 0.02)
