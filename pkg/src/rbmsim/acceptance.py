"""Acceptance catalog: each criterion is a registered configuration plus a
fixed tolerance, evaluated into one or more Reports."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .domains import make_comb_domain, make_koch_snowflake, make_lshape, unit_disk, unit_interval, unit_square
from .estimators import (
    Grid,
    Report,
    bootstrap_kernel_margin,
    compare_schemes,
    ks_distance,
    lattice_walk_occupation,
    lebesgue_cell_masses,
    OccupationHistogram,
    pair_symmetry_test,
    spectral_margins,
    time_reverse,
    tv_distance,
)
from .lattice import LatticeError, build_lattice, dirichlet_energy, generator, transition_matrix
from .myopic import (
    MyopicConfig,
    conditioned_step,
    estimate_survival,
    sample_stationary_myopic,
    simulate_myopic_ensemble,
)
from .oracles import discretized_myopic_kernel, killed_survival_interval, reflected_cdf_1d
from .walks import covariation, interpolate, simulate_discrete_walks


@dataclass
class CriterionResult:
    number: int
    title: str
    reports: list[Report]
    seconds: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        worst = "; ".join(r.line() for r in self.reports)
        return f"[{status}] criterion {self.number} ({self.title}) in {self.seconds:.1f}s :: {worst}"


CATALOG: dict[str, tuple[int, str, Callable[[], list[Report]]]] = {}


def criterion(number: int, suite: str, title: str):
    def register(fn):
        CATALOG[suite] = (number, title, fn)
        return fn

    return register


def run(suite: str) -> CriterionResult:
    number, title, fn = CATALOG[suite]
    t0 = time.perf_counter()
    reports = fn()
    return CriterionResult(number, title, reports, time.perf_counter() - t0)


def suites() -> list[str]:
    return sorted(CATALOG, key=lambda s: CATALOG[s][0])


# ---------------------------------------------------------------------------
# 1. covariation


@criterion(1, "covariation", "compensated covariation matrix of the stationary walk")
def covariation_suite(seed: int = 20240601) -> list[Report]:
    lat = build_lattice(unit_square(), 6)
    ens = simulate_discrete_walks(lat, "stationary", 1.0, seed, n_paths=2000)
    rep = covariation(ens, 1.0)
    diag = float(np.mean(np.diag(rep.matrix)))
    off = float(np.max(np.abs(rep.matrix - np.diag(np.diag(rep.matrix)))))
    cfg = {"k": 6, "paths": 2000, "t": 1.0, "seed": seed}
    return [
        Report("mean diagonal covariation", diag, 0.5, 0.02, "abs", stderr=float(np.mean(np.diag(rep.stderr))),
               provenance="t/n", speed=0.5, config=cfg),
        Report("max |off-diagonal covariation|", off, 0.0, 0.02, "upper",
               stderr=float(rep.stderr[0, 1]), provenance="0", speed=0.5, config=cfg),
    ]


# ---------------------------------------------------------------------------
# 2. Dirichlet energy


@criterion(2, "energy", "Dirichlet energy of f = x1 on the unit square")
def energy_suite() -> list[Report]:
    dom = unit_square()
    errs, energies = [], {}
    for k in range(3, 8):
        lat = build_lattice(dom, k)
        e = dirichlet_energy(lat, lat.positions[:, 0])
        energies[k] = e
        errs.append(abs(e - 0.25 * (2**k - 2) * (2**k - 1) * 2.0 ** (-2 * k)))
    return [
        Report("max |E^k - closed form|, k=3..7", max(errs), 0.0, 1e-12, "upper", exact=True,
               provenance="edge count", details={"energies": energies}),
        Report("|E^7 - 1/4|", abs(energies[7] - 0.25), 0.0, 0.006, "upper", exact=True, provenance="1/(2n) ∫|∇f|²"),
    ]


# ---------------------------------------------------------------------------
# 3. spectral inequalities


def small_lattices():
    return {
        "square k=3": build_lattice(unit_square(), 3),
        "lshape k=4": build_lattice(make_lshape(), 4),
        "snowflake depth 2 k=4": build_lattice(make_koch_snowflake(2), 4),
        "interval k=7": build_lattice(unit_interval(), 7),
    }


@criterion(3, "spectral", "power inequalities on lattice and myopic kernels")
def spectral_suite(seed: int = 7, n_functions: int = 100, j_max: int = 32) -> list[Report]:
    rng = np.random.default_rng(seed)
    worst, sizes = -np.inf, {}
    for name, lat in small_lattices().items():
        if lat.size > 200:
            raise LatticeError(f"{name} has {lat.size} vertices, above the 200-vertex budget")
        sizes[name] = lat.size
        Q = transition_matrix(lat)
        F = rng.standard_normal((lat.size, n_functions))
        for mode in ("even", "all"):
            worst = max(worst, float(spectral_margins(Q, F, j_max, mode).max()))
    reports = [Report("worst relative margin on lattice kernels", worst, 0.0, 1e-9, "upper", exact=True,
                      details={"sizes": sizes, "j_max": j_max, "n_functions": n_functions})]
    km = discretized_myopic_kernel(unit_interval(), cells=64, dt=0.1, budget=4000,
                                   config=MyopicConfig(seed=seed))
    F = rng.standard_normal((64, n_functions))
    margin, se = bootstrap_kernel_margin(km, F, j_max, "all", reps=40, seed=seed)
    reports.append(Report("worst relative margin on MC myopic kernel, 2 <= j <= 32", margin, 0.0, 3 * se, "upper",
                          stderr=se, details={"defect": km.defect, "cells": 64, "dt": 0.1, "budget": 4000}))
    return reports


# ---------------------------------------------------------------------------
# 4. myopic marginal against the reflected kernel


@criterion(4, "myopic-marginal", "myopic endpoint law against the image-method CDF")
def myopic_marginal_suite(seed: int = 11) -> list[Report]:
    cfg = MyopicConfig(k=8, substeps=16, bridge=True, horizon=0.2, seed=seed)
    end = simulate_myopic_ensemble(unit_interval(), [0.3], cfg, n_paths=20_000, record="final")
    d = ks_distance(end[:, 0], lambda y: reflected_cdf_1d(0.2, 0.3, y))
    return [Report("KS distance to reflected CDF", d, 0.0, 0.025, "upper", speed=1.0,
                   provenance="method of images", config={"k": 8, "s": 16, "N": 20_000, "seed": seed})]


# ---------------------------------------------------------------------------
# 5. survival


@criterion(5, "survival", "killed survival probability against the spectral series")
def survival_suite(seed: int = 5) -> list[Report]:
    ref = float(killed_survival_interval(0.1, 0.5))
    rep = estimate_survival(unit_interval(), [0.5], 0.1, 100_000, MyopicConfig(seed=seed))
    sigma = math.sqrt(ref * (1 - ref) / rep.n)
    return [Report("survival at x=0.5, dt=0.1", rep.p_hat, ref, 3 * sigma, "abs", stderr=rep.stderr,
                   provenance="odd-mode sine series", config={"n": rep.n, "seed": seed})]


# ---------------------------------------------------------------------------
# 6. occupation on the disk


def myopic_occupation(domain, cfg: MyopicConfig, grid: Grid, n_paths: int) -> OccupationHistogram:
    hist = OccupationHistogram.empty(grid, 1.0)

    def add(j, before, after):
        hist.add_segments(before, after, cfg.dt)

    simulate_myopic_ensemble(domain, "stationary", cfg, n_paths=n_paths, record="final", callback=add)
    return hist


@criterion(6, "occupation", "myopic occupation measure on the unit disk against Lebesgue")
def occupation_suite(seed: int = 13, n_paths: int = 20_000, horizon: float = 0.5) -> list[Report]:
    disk = unit_disk()
    grid = Grid.over(disk, 8)
    cfg = MyopicConfig(k=7, substeps=16, bridge=True, horizon=horizon, seed=seed)
    hist = myopic_occupation(disk, cfg, grid, n_paths)
    leb = lebesgue_cell_masses(disk, grid)
    return [Report("TV(occupation, Lebesgue)", tv_distance(hist.mass, leb), 0.0, 0.05, "upper", speed=1.0,
                   config={"k": 7, "paths": n_paths, "horizon": horizon, "aggregate_time": hist.total_time})]


# ---------------------------------------------------------------------------
# 7. speed consistency


@criterion(7, "speed", "lattice walk at time 2t against myopic scheme at time t")
def speed_suite(seed: int = 17, n: int = 20_000, t: float = 0.15, lattice_k: int = 8, myopic_k: int = 14) -> list[Report]:
    box = unit_square()
    start = np.array([0.25, 0.5])
    lat = build_lattice(box, lattice_k)
    v = simulate_discrete_walks(lat, lat.nearest_vertex(start), 2 * t, seed, n_paths=n, record="final")
    walk = lat.positions[v]
    cfg = MyopicConfig(k=myopic_k, substeps=1, bridge=True, horizon=t, seed=seed + 1)
    myo = simulate_myopic_ensemble(box, start, cfg, n_paths=n, record="final")
    rep = compare_schemes([walk, myo], [1 / 2, 1.0], [2 * t, t], alpha=0.01,
                          name="max coordinate-wise two-sample KS")
    rep.config = {"lattice_k": lattice_k, "myopic_k": myopic_k, "substeps": 1, "n": n, "t": t}
    return [rep]


# ---------------------------------------------------------------------------
# 8. comb counterexample


@criterion(8, "counterexample", "comb domain lattices coincide with the square's")
def counterexample_suite(seed: int = 19, n_paths: int = 20_000, horizon: float = 1 / 16) -> list[Report]:
    comb, square = make_comb_domain(), unit_square()
    identical = 0
    for k in range(1, 7):
        try:
            a, b = build_lattice(comb, k), build_lattice(square, k)
        except LatticeError:
            # both too coarse at the same level is also agreement
            try:
                build_lattice(square, k)
            except LatticeError:
                identical += 1
            continue
        identical += int(a.vertices_csv() == b.vertices_csv() and a.edges_csv() == b.edges_csv())
    area, se = comb.area(1_000_000, seed)
    lat = build_lattice(comb, 8)
    grid = Grid.over(comb, 16)
    hist = lattice_walk_occupation(lat, grid, "stationary", horizon, seed, n_paths=n_paths)
    tv_square = tv_distance(hist.mass, lebesgue_cell_masses(square, grid))
    tv_comb = tv_distance(hist.mass, lebesgue_cell_masses(comb, grid))
    return [
        Report("levels k=1..6 with identical exports", identical, 6, 0, "abs", exact=True),
        Report("MC area of the comb", area, 0.5, 0.0, "upper", stderr=se, config={"samples": 1_000_000}),
        Report("TV(walk occupation, square Lebesgue)", tv_square, 0.0, 0.05, "upper", speed=0.5,
               config={"k": 8, "cells": 256, "paths": n_paths, "horizon": horizon}),
        Report("TV(walk occupation, comb Lebesgue)", tv_comb, 0.25, 0.0, "lower", speed=0.5),
    ]


# ---------------------------------------------------------------------------
# 9. time reversal


@criterion(9, "time-reversal", "transition pairs of the reversed stationary chain")
def time_reversal_suite(seed: int = 23, n_pairs: int = 50_000, J: int = 8) -> list[Report]:
    lat = build_lattice(unit_square(), 5)
    dt = 4.0 ** -5
    T = J * dt
    fwd = simulate_discrete_walks(lat, "stationary", T, seed, path_ids=np.arange(n_pairs))
    bwd = simulate_discrete_walks(lat, "stationary", T, seed, path_ids=np.arange(n_pairs, 2 * n_pairs))
    forward_pairs = fwd.vertices[:, -2:]
    reversed_pairs = np.empty_like(forward_pairs)
    for i in range(n_pairs):
        r = time_reverse(interpolate(bwd.path(i), "step"), T)
        pos = r.at(np.array([0.0, dt]))
        reversed_pairs[i] = [lat.nearest_vertex(p) for p in pos]
    chi2, p = pair_symmetry_test(forward_pairs, reversed_pairs)
    return [Report("chi-square p-value, forward vs reversed pairs", p, 0.01, 0.0, "lower",
                   config={"k": 5, "pairs_per_side": n_pairs, "steps": J}, details={"chi2": chi2})]


# ---------------------------------------------------------------------------
# 10. drift bound


@criterion(10, "drift", "one-step drift of f(x)=x^2 under the myopic chain")
def drift_suite(seed: int = 29, n: int = 200_000, bins: int = 16) -> list[Report]:
    k = 6
    cfg = MyopicConfig(k=k, seed=seed)
    I = unit_interval()
    x = sample_stationary_myopic(I, k, cfg, count=n)
    y, _ = conditioned_step(I, x, cfg)
    d = y[:, 0] ** 2 - x[:, 0] ** 2
    idx = np.minimum((x[:, 0] * bins).astype(int), bins - 1)
    bound = -1.0 * 2.0 ** -k  # A_f = sup|f''| / 2 = 1
    slack, per_bin = np.inf, []
    for b in range(bins):
        sel = d[idx == b]
        m, se = sel.mean(), sel.std(ddof=1) / np.sqrt(len(sel))
        per_bin.append((float(m), float(se)))
        slack = min(slack, (m - bound) / se if se > 0 else np.inf)
    worst_bin = int(np.argmin([(m - bound) / se for m, se in per_bin]))
    return [Report("min over bins of (drift - bound) / stderr", float(slack), -3.0, 0.0, "lower",
                   config={"k": k, "n": n, "bins": bins, "bound": bound},
                   details={"per_bin": per_bin, "worst_bin": worst_bin})]


# ---------------------------------------------------------------------------
# 11. generator consistency


def smooth_step(r, a: float = 0.6, b: float = 0.95):
    """C-infinity function equal to 1 on [0, a] and 0 on [b, inf)."""
    r = np.asarray(r, dtype=float)
    u = np.clip((r - a) / (b - a), 0.0, 1.0)
    g = lambda s: np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
    return g(1 - u) / (g(1 - u) + g(u))


def bump_quadratic(x):
    """(1 - |x|^2) times a smooth cutoff: compactly supported in the unit disk, Laplacian -4 near 0."""
    r = np.linalg.norm(np.atleast_2d(x), axis=1)
    return (1 - r * r) * smooth_step(r)


def gaussian_bias(k: int, a: float = 0.6, b: float = 0.95) -> float:
    """2^k (E f(W_{2^-k}) - f(0)) - ½Δf(0) for planar W, by radial quadrature.

    Only the cutoff region contributes, since f = 1 - r² exactly for r <= a.
    """
    from scipy.integrate import quad

    var = 2.0 ** -k
    dens = lambda r: r / var * np.exp(-r * r / (2 * var))
    g = lambda r: (1 - r * r) * (float(smooth_step(r, a, b)) - 1.0) * dens(r)
    val, _ = quad(g, a, 12.0, points=[b], limit=200, epsabs=0, epsrel=1e-10)
    return 2.0 ** k * val


@criterion(11, "generator", "lattice and myopic generators against the Laplacian")
def generator_suite(seed: int = 31, n: int = 20_000) -> list[Report]:
    err = 0.0
    for k in (3, 4, 5, 6):
        lat = build_lattice(unit_square(), k)
        inner = lat.interior
        for f, lap in ((lambda p: (p ** 2).sum(axis=1), 4.0),
                       (lambda p: p[:, 0] ** 2 + 3 * p[:, 0] * p[:, 1] - p[:, 1] ** 2 + p[:, 0], 0.0)):
            Lf = 4.0 ** k * generator(lat, lat.evaluate(f))
            err = max(err, float(np.max(np.abs(Lf[inner] - lap / 4))))
    reports = [Report("max |2^{2k} L_k f - Δf/(2n)| on quadratics", err, 0.0, 1e-12, "upper", exact=True)]
    disk = unit_disk()
    biases, zs = {}, {}
    for k in (6, 7, 8):
        cfg = MyopicConfig(k=k, seed=seed + k)
        x = np.zeros((n, 2))
        y, _ = conditioned_step(disk, x, cfg)
        vals = 2.0 ** k * (bump_quadratic(y) - 1.0)
        m, se = vals.mean(), vals.std(ddof=1) / np.sqrt(n)
        zs[k] = float((m + 2.0) / se)
        biases[k] = gaussian_bias(k)
        reports.append(Report(f"2^k drift at the center, k={k}", float(m), -2.0, 3 * float(se), "abs",
                              stderr=float(se), speed=1.0, provenance="½Δf(0)"))
    trend = all(abs(biases[a]) > abs(biases[b]) for a, b in ((6, 7), (7, 8)))
    reports.append(Report("oracle bias decreasing in k", float(trend), 1.0, 0.0, "abs", exact=True,
                          details={"bias": biases, "z": zs}))
    return reports
