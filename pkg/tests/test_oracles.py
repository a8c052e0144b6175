import numpy as np
import pytest
from scipy import integrate

from rbmsim.domains import unit_interval, unit_square
from rbmsim.estimators import bootstrap_kernel_margin, spectral_margins
from rbmsim.lattice import build_lattice, transition_matrix
from rbmsim.myopic import MyopicConfig
from rbmsim.oracles import (
    box_density_oracle,
    chain_marginal,
    discretized_myopic_kernel,
    killed_survival_interval,
    reflected_density_1d,
    reflected_density_box,
)


def test_reflected_density_properties():
    assert reflected_density_1d(50.0, 0.2, 0.7) == pytest.approx(1.0, abs=1e-10)
    assert reflected_density_1d(0.2, 0.3, 0.8) == pytest.approx(reflected_density_1d(0.2, 0.8, 0.3), rel=1e-14)
    total, _ = integrate.quad(lambda y: reflected_density_1d(0.2, 0.3, y, terms=10), 0, 1, epsabs=1e-13)
    assert total == pytest.approx(1.0, abs=1e-10)
    ys = np.linspace(0, 1, 101)
    assert np.all(reflected_density_1d(0.01, 0.5, ys) >= 0)


def test_reflected_density_box():
    x0, y = np.array([0.3, 0.6]), np.array([0.5, 0.1])
    prod = reflected_density_1d(0.1, 0.3, 0.5) * reflected_density_1d(0.1, 0.6, 0.1)
    assert reflected_density_box(0.1, x0, y) == pytest.approx(prod, rel=1e-14)
    assert reflected_density_box(100.0, x0, y) == pytest.approx(1.0, abs=1e-10)
    g = (np.arange(200) + 0.5) / 200
    Y = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    assert reflected_density_box(0.1, x0, Y).mean() == pytest.approx(1.0, abs=1e-8)
    oracle = box_density_oracle(unit_square())
    assert oracle.density(0.1, x0, y) == pytest.approx(prod, rel=1e-14)


def test_killed_series():
    assert killed_survival_interval(0.1, 0.5) == pytest.approx(0.7723, abs=5e-5)
    three = killed_survival_interval(0.1, 0.5, terms=3)
    assert abs(three - killed_survival_interval(0.1, 0.5)) < 2e-6
    assert killed_survival_interval(1e-4, 0.5) == pytest.approx(1.0, abs=1e-6)
    assert killed_survival_interval(0.1, 1e-9) < 1e-6
    ts = np.linspace(0.01, 1, 50)
    assert np.all(np.diff([killed_survival_interval(t, 0.3) for t in ts]) < 0)
    xs = np.linspace(0.01, 0.99, 99)
    vals = killed_survival_interval(0.1, xs)
    assert xs[np.argmax(vals)] == pytest.approx(0.5)


def test_chain_marginal_examples():
    lat = build_lattice(unit_interval(), 2)
    K = transition_matrix(lat)
    order = np.argsort(lat.positions[:, 0])
    mid = np.zeros(3)
    mid[order[1]] = 1.0
    assert np.array_equal(chain_marginal(K, mid, 0), mid)
    one = chain_marginal(K, mid, 1)[order]
    two = chain_marginal(K, mid, 2)[order]
    assert np.allclose(one, [0.5, 0, 0.5]) and np.allclose(two, [0, 1, 0])
    sq = build_lattice(unit_square(), 4)
    m = sq.measure
    out = chain_marginal(transition_matrix(sq), m, 7)
    assert np.allclose(out, m, atol=1e-12)
    assert out.sum() == pytest.approx(m.sum(), abs=1e-14)


def test_quadrature_kernel_is_reversible():
    K = discretized_myopic_kernel(unit_interval(), cells=64, dt=0.1, method="quadrature")
    assert np.allclose(K.row_sums(), 1.0)
    assert K.defect < 1e-12
    F = np.random.default_rng(0).standard_normal((64, 20))
    assert spectral_margins(K, F, 16, mode="all").max() <= 1e-9


def test_mc_kernel_spectral_margin_within_error():
    K = discretized_myopic_kernel(unit_interval(), cells=16, dt=0.1, budget=4000, config=MyopicConfig(seed=1))
    assert np.allclose(K.row_sums(), 1.0)
    F = np.random.default_rng(1).standard_normal((16, 20))
    worst, se = bootstrap_kernel_margin(K, F, 16, reps=20, seed=2)
    assert worst <= 3 * se
