"""Statistics that connect simulated paths to their limiting objects."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from .domains import Box, Comb, Domain
from .lattice import KernelMatrix, Lattice, build_lattice, dirichlet_energy
from .trajectory import Trajectory


class EstimatorError(ValueError):
    pass


# ---------------------------------------------------------------------------
# reports


@dataclass
class Report:
    """A named statistic with its reference and verdict.

    ``sense`` selects the verdict rule: ``abs`` means |value - reference| <= tolerance,
    ``upper`` means value <= reference + tolerance, ``lower`` means
    value >= reference - tolerance.
    """

    name: str
    value: float
    reference: float = 0.0
    tolerance: float = 0.0
    sense: str = "abs"
    stderr: float | None = None
    exact: bool = False
    provenance: str = ""
    speed: float | None = None
    config: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        v, r, tol = self.value, self.reference, self.tolerance
        if v is None or (isinstance(v, float) and math.isnan(v)):
            return False
        if self.sense == "abs":
            return abs(v - r) <= tol
        if self.sense == "upper":
            return v <= r + tol
        if self.sense == "lower":
            return v >= r - tol
        raise EstimatorError(f"unknown sense {self.sense!r}")

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "stderr": self.stderr,
            "exact": self.exact,
            "reference": self.reference,
            "provenance": self.provenance,
            "tolerance": self.tolerance,
            "sense": self.sense,
            "verdict": self.verdict,
            "speed": self.speed,
            "config": self.config,
            "details": self.details,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), default=_jsonable)

    def line(self) -> str:
        err = f" ± {self.stderr:.3g}" if self.stderr is not None else ""
        op = {"abs": "|v-ref| <=", "upper": "v <= ref +", "lower": "v >= ref -"}[self.sense]
        return f"{self.verdict.upper()} {self.name}: value={self.value:.6g}{err} ref={self.reference:.6g} ({op} {self.tolerance:.3g})"


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------------------
# occupation measures


@dataclass(frozen=True)
class Grid:
    """Congruent axis-aligned cells covering [lower, upper]."""

    lower: tuple
    upper: tuple
    shape: tuple

    @classmethod
    def over(cls, domain: Domain, cells_per_axis: int) -> "Grid":
        return cls(tuple(map(float, domain.lo)), tuple(map(float, domain.hi)), (cells_per_axis,) * domain.dim)

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def width(self) -> np.ndarray:
        return (np.asarray(self.upper) - np.asarray(self.lower)) / np.asarray(self.shape)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.width))

    def axis_index(self, pts: np.ndarray) -> np.ndarray:
        idx = np.floor((pts - np.asarray(self.lower)) / self.width).astype(np.int64)
        return np.clip(idx, 0, np.asarray(self.shape) - 1)

    def flat_index(self, pts: np.ndarray) -> np.ndarray:
        return np.ravel_multi_index(tuple(self.axis_index(pts).T), self.shape)

    def centers(self) -> np.ndarray:
        axes = [np.asarray(self.lower)[i] + (np.arange(s) + 0.5) * self.width[i] for i, s in enumerate(self.shape)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def cell_bounds(self, flat: int) -> tuple[np.ndarray, np.ndarray]:
        ij = np.array(np.unravel_index(flat, self.shape))
        lo = np.asarray(self.lower) + ij * self.width
        return lo, lo + self.width


def split_segments(grid: Grid, p: np.ndarray, q: np.ndarray, duration) -> tuple[np.ndarray, np.ndarray]:
    """Exact occupation of straight segments p -> q traversed at constant speed.

    Returns (cell ids, durations) for all pieces; segments are cut where
    they cross cell faces.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    m, n = p.shape
    dur = np.broadcast_to(np.asarray(duration, dtype=float), (m,))
    ip, iq = grid.axis_index(p), grid.axis_index(q)
    lower, width = np.asarray(grid.lower), grid.width
    cuts = [np.zeros((m, 1)), np.ones((m, 1))]
    for a in range(n):
        d = iq[:, a] - ip[:, a]
        R = int(np.abs(d).max()) if m else 0
        if R == 0:
            continue
        r = np.arange(R)[None, :]
        line = np.where(d[:, None] > 0, ip[:, a, None] + 1 + r, ip[:, a, None] - r)
        delta = q[:, a] - p[:, a]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (lower[a] + line * width[a] - p[:, a, None]) / delta[:, None]
        valid = (r < np.abs(d)[:, None]) & np.isfinite(t)
        cuts.append(np.where(valid, np.clip(t, 0.0, 1.0), 1.0))
    if len(cuts) == 2:
        return grid.flat_index(p), dur.copy()
    t = np.sort(np.concatenate(cuts, axis=1), axis=1)
    piece = np.diff(t, axis=1)
    mid = 0.5 * (t[:, 1:] + t[:, :-1])
    pts = p[:, None, :] + mid[..., None] * (q - p)[:, None, :]
    cells = grid.flat_index(pts.reshape(-1, n))
    return cells, (piece * dur[:, None]).reshape(-1)


@dataclass(eq=False)
class OccupationHistogram:
    grid: Grid
    mass: np.ndarray
    total_time: float = 0.0
    speed: float | None = None
    weighting: str = "time"

    @classmethod
    def empty(cls, grid: Grid, speed=None, weighting="time") -> "OccupationHistogram":
        return cls(grid, np.zeros(grid.size), 0.0, speed, weighting)

    def add_segments(self, p, q, duration) -> None:
        cells, w = split_segments(self.grid, np.asarray(p), np.asarray(q), duration)
        self.mass += np.bincount(cells, weights=w, minlength=self.grid.size)
        self.total_time += float(np.sum(np.broadcast_to(duration, (len(p),))))

    def add_points(self, x, weight=1.0) -> None:
        x = np.asarray(x, dtype=float)
        w = np.broadcast_to(np.asarray(weight, dtype=float), (len(x),))
        self.mass += np.bincount(self.grid.flat_index(x), weights=w, minlength=self.grid.size)
        self.total_time += float(w.sum())

    def merge(self, other: "OccupationHistogram") -> "OccupationHistogram":
        if other.grid != self.grid:
            raise EstimatorError("cannot merge histograms on different grids")
        return OccupationHistogram(self.grid, self.mass + other.mass, self.total_time + other.total_time,
                                   self.speed, self.weighting)

    @property
    def normalized(self) -> np.ndarray:
        return self.mass / self.mass.sum()

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cell_index"] + [f"c{i + 1}" for i in range(self.grid.dim)] + ["mass", "density"])
        dens = self.normalized / self.grid.cell_volume
        for i, (c, m, d) in enumerate(zip(self.grid.centers().tolist(), self.mass.tolist(), dens.tolist())):
            w.writerow([i, *map(repr, c), repr(m), repr(d)])
        return buf.getvalue()

    def heatmap_csv(self) -> str:
        """Normalized density as a 2-D table, rows indexed by the last axis descending."""
        if self.grid.dim != 2:
            raise EstimatorError("heatmap export needs a 2-D grid")
        dens = (self.normalized / self.grid.cell_volume).reshape(self.grid.shape)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for row in dens.T[::-1]:
            w.writerow([repr(v) for v in row])
        return buf.getvalue()


def occupation_histogram(trajectories: Iterable[Trajectory], grid: Grid, weighting: str = "time") -> OccupationHistogram:
    """Occupation measure of a set of trajectories on ``grid``.

    Linear trajectories are integrated exactly segment by segment; step and
    recorded trajectories weight each position by its holding time up to the
    horizon.  ``weighting="visits"`` counts samples instead.
    """
    trajectories = list(trajectories)
    if not trajectories:
        raise EstimatorError("no trajectories supplied")
    speeds = {tr.speed for tr in trajectories}
    hist = OccupationHistogram.empty(grid, speeds.pop() if len(speeds) == 1 else None, weighting)
    for tr in trajectories:
        if tr.dim != grid.dim:
            raise EstimatorError("trajectory and grid dimensions differ")
        if weighting == "visits":
            hist.add_points(tr.positions, 1.0)
        elif weighting != "time":
            raise EstimatorError(f"unknown weighting {weighting!r}")
        elif tr.mode == "linear":
            if len(tr) > 1:
                hist.add_segments(tr.positions[:-1], tr.positions[1:], np.diff(tr.times))
        else:
            hold = np.diff(np.append(tr.times, tr.horizon))
            hist.add_points(tr.positions, hold)
    return hist


def lebesgue_cell_masses(domain: Domain, grid: Grid, resolution: int = 128) -> np.ndarray:
    """Lebesgue measure of D inside each cell.

    Exact for boxes and comb domains; otherwise midpoint sub-sampling with
    ``resolution`` points per axis per cell.
    """
    out = np.empty(grid.size)
    for c in range(grid.size):
        lo, hi = grid.cell_bounds(c)
        if isinstance(domain, Box):
            out[c] = np.prod(np.clip(np.minimum(hi, domain.hi) - np.maximum(lo, domain.lo), 0, None))
        elif isinstance(domain, Comb):
            out[c] = domain.rect_area(lo, hi)
        else:
            axes = [lo[i] + (np.arange(resolution) + 0.5) * (hi[i] - lo[i]) / resolution for i in range(grid.dim)]
            mesh = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
            out[c] = domain.contains(mesh).mean() * np.prod(hi - lo)
    return out


def lattice_cell_masses(lattice: Lattice, grid: Grid, kind: str = "edges") -> np.ndarray:
    """Aggregate the lattice's stationary objects on ``grid``.

    ``kind="vertices"`` bins m_k at the vertices.  ``kind="edges"`` bins the
    expected occupation of the linearly interpolated stationary walk, which
    spreads mass uniformly along the edges.
    """
    if kind == "vertices":
        return np.bincount(grid.flat_index(lattice.positions), weights=lattice.measure, minlength=grid.size)
    if kind != "edges":
        raise EstimatorError(f"unknown aggregate {kind!r}")
    e = lattice.edges()
    pos = lattice.positions
    cells, w = split_segments(grid, pos[e[:, 0]], pos[e[:, 1]], 1.0)
    return np.bincount(cells, weights=w, minlength=grid.size)


def tv_distance(p, q) -> float:
    """Total variation distance between two nonnegative vectors after normalization."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return 0.5 * float(np.abs(p / p.sum() - q / q.sum()).sum())


# ---------------------------------------------------------------------------
# distribution distances


def ks_distance(samples, cdf) -> float:
    """sup |F_N - F| over the sample points, using left limits on both sides.

    ``cdf`` is a vectorized callable (treated as continuous) or a table
    ``(xs, Fs)`` read as a right-continuous step function.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    N = len(x)
    if N == 0:
        raise EstimatorError("no samples")
    if callable(cdf):
        F = np.asarray(cdf(x), dtype=float)
        F_left = F
    else:
        xs, Fs = (np.asarray(a, dtype=float) for a in cdf)
        if np.any(np.diff(xs) < 0) or np.any(np.diff(Fs) < -1e-15):
            raise EstimatorError("cdf table must be monotone")
        Fs0 = np.concatenate([[0.0], Fs])
        F = Fs0[np.searchsorted(xs, x, side="right")]
        F_left = Fs0[np.searchsorted(xs, x, side="left")]
    # empirical values at x_i (after all ties) and just before x_i (before all ties)
    upper = np.searchsorted(x, x, side="right") / N
    lower = np.searchsorted(x, x, side="left") / N
    return float(max(np.max(upper - F), np.max(F_left - lower), 0.0))


def ks_critical(n: int, m: int | None = None, alpha: float = 0.01) -> float:
    """Asymptotic Kolmogorov-Smirnov critical value (one or two samples)."""
    c = math.sqrt(-0.5 * math.log(alpha / 2))
    return c / math.sqrt(n) if m is None else c * math.sqrt((n + m) / (n * m))


def ks_two_sample(a, b) -> tuple[float, float]:
    r = stats.ks_2samp(np.asarray(a).ravel(), np.asarray(b).ravel())
    return float(r.statistic), float(r.pvalue)


def pair_symmetry_test(pairs_a: np.ndarray, pairs_b: np.ndarray) -> tuple[float, float]:
    """Chi-square test that two samples of ordered pairs share one law.

    Returns (statistic, p-value) of the 2 x K contingency table over the
    observed pair categories.
    """
    a = np.asarray(pairs_a)
    b = np.asarray(pairs_b)
    both = np.concatenate([a, b])
    _, inv = np.unique(both, axis=0, return_inverse=True)
    inv = inv.ravel()
    K = inv.max() + 1
    table = np.stack([np.bincount(inv[: len(a)], minlength=K), np.bincount(inv[len(a):], minlength=K)])
    table = table[:, table.sum(axis=0) > 0]
    chi2, p, _, _ = stats.chi2_contingency(table, correction=False)
    return float(chi2), float(p)


# ---------------------------------------------------------------------------
# path functionals


def _window_candidates(tr: Trajectory, rho: float, s0: float, t0: float) -> np.ndarray:
    b = tr.times[(tr.times >= s0) & (tr.times <= t0)]
    c = np.concatenate([b, b - rho, b + rho, [s0, t0, s0 + rho, t0 - rho]])
    return np.unique(c[(c >= s0) & (c <= t0)])


def oscillation(tr: Trajectory, rho: float, s0: float = 0.0, t0: float | None = None) -> float:
    """sup |w(s) - w(t)| over s, t in [s0, t0] with |s - t| <= rho (Euclidean norm).

    Exact for piecewise linear and piecewise constant paths.
    """
    t0 = tr.horizon if t0 is None else t0
    if rho <= 0 or s0 < 0 or t0 > tr.horizon + 1e-12 or t0 < s0:
        raise EstimatorError("bad oscillation window")
    eps = 1e-12 * max(1.0, t0)
    if tr.mode == "linear":
        c = _window_candidates(tr, rho, s0, t0)
        w = tr.at(c)
        best = 0.0
        for d in range(1, len(c)):
            ok = c[d:] - c[:-d] <= rho + eps
            if not ok.any():
                break
            diff = np.linalg.norm(w[d:][ok] - w[:-d][ok], axis=1)
            best = max(best, float(diff.max()))
        return best
    # piecewise constant: value v_i on [a_i, b_i), clipped to the window
    times = np.append(tr.times, np.inf)
    i0 = np.searchsorted(tr.times, s0, side="right") - 1
    i1 = np.searchsorted(tr.times, t0, side="right") - 1
    a = np.maximum(times[i0 : i1 + 1], s0)
    b = np.minimum(times[i0 + 1 : i1 + 2], t0)
    v = tr.positions[i0 : i1 + 1]
    best = 0.0
    for d in range(1, len(v)):
        # some s < b_i and t >= a_{i+d} with t - s <= rho exist iff a_{i+d} - b_i < rho
        ok = a[d:] - b[:-d] < rho
        if not ok.any():
            break
        best = max(best, float(np.linalg.norm(v[d:][ok] - v[:-d][ok], axis=1).max()))
    return best


def time_reverse(tr: Trajectory, T: float | None = None) -> Trajectory:
    """The path s -> w((T - s)-) on [0, T].

    Linear paths reverse sample order.  Piecewise constant paths use left
    limits, so a jump at u becomes a right-continuous jump at T - u.
    """
    T = tr.horizon if T is None else T
    if abs(T - tr.horizon) > 1e-12 * max(1.0, T):
        raise EstimatorError("reversal time must equal the trajectory horizon")
    if tr.mode == "linear":
        return Trajectory(T - tr.times[::-1], tr.positions[::-1], "linear", speed=tr.speed, meta=dict(tr.meta))
    jumps = tr.times[1:]
    vals = tr.positions
    if len(jumps) and jumps[-1] >= T:
        jumps, vals = jumps[:-1], vals[:-1]
    times = np.concatenate([[0.0], T - jumps[::-1]])
    pos = vals[::-1]
    return Trajectory(times, pos, tr.mode, horizon=T, speed=tr.speed, meta=dict(tr.meta))


# ---------------------------------------------------------------------------
# inequalities and trends


def spectral_margins(kernel: KernelMatrix, F: np.ndarray, j_max: int, mode: str = "even",
                     j_min: int = 1) -> np.ndarray:
    """Relative violations of the power inequalities, shape (j_max - j_min + 1, n_functions).

    mode ``even``: max of the two gaps in
        (f - Q^{2j} f, f) <= j (f - Q^2 f, f) <= 2j (f - Q f, f);
    mode ``all``: gap in (f - Q^j f, f) <= j (f - Q f, f).
    Each gap is divided by 2j (f - Q f, f) (or j (f - Q f, f)) plus a tiny
    floor; nonpositive values mean the inequality holds.
    """
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    if kernel.defect > 1e-6 and kernel.counts is None:
        raise EstimatorError(f"kernel is not reversible (defect {kernel.defect:.3g})")
    m = kernel.measure[:, None]
    ip = lambda g: (m * g * F).sum(axis=0)
    norm = ip(F)
    e1 = ip(F - kernel.apply(F))
    QF = kernel.apply(F)
    Q2F = kernel.apply(QF)
    e2 = ip(F - Q2F)
    out = np.empty((j_max, F.shape[1]))
    cur = F.copy()
    floor = 1e-300 + 1e-15 * norm
    if mode == "even":
        for j in range(1, j_max + 1):
            cur = kernel.apply(kernel.apply(cur))
            lhs = ip(F - cur)
            scale = 2 * j * np.abs(e1) + floor
            out[j - 1] = np.maximum(lhs - j * e2, j * e2 - 2 * j * e1) / scale
    elif mode == "all":
        for j in range(1, j_max + 1):
            cur = kernel.apply(cur)
            scale = j * np.abs(e1) + floor
            out[j - 1] = (ip(F - cur) - j * e1) / scale
    else:
        raise EstimatorError(f"unknown mode {mode!r}")
    return out[j_min - 1 :]


def spectral_inequality_check(kernel: KernelMatrix, f, j_max: int, mode: str = "even",
                              slack: float = 1e-9, name: str = "spectral") -> Report:
    margins = spectral_margins(kernel, f, j_max, mode)
    worst = float(margins.max())
    return Report(name, worst, 0.0, slack, "upper", exact=True,
                  details={"j_max": j_max, "mode": mode, "n_functions": margins.shape[1]})


def bootstrap_kernel_margin(kernel: KernelMatrix, F: np.ndarray, j_max: int, mode: str = "all",
                            reps: int = 50, seed: int = 0, j_min: int = 2) -> tuple[float, float]:
    """Worst spectral margin of an estimated kernel and its bootstrap standard error.

    Rows are resampled from the stored counts (multinomial endpoints,
    binomial survival).  j = 1 is an identity, so the default starts at 2.
    """
    from .oracles import kernel_from_counts

    if kernel.counts is None:
        raise EstimatorError("kernel carries no counts to resample")
    counts, trials = kernel.counts, kernel.trials
    vol = float(kernel.measure[0] / (counts[0].sum() / trials[0]))
    worst = float(spectral_margins(kernel, F, j_max, mode, j_min).max())
    rng = np.random.default_rng(seed)
    p_surv = counts.sum(axis=1) / trials
    probs = counts / counts.sum(axis=1, keepdims=True)
    vals = []
    for _ in range(reps):
        surv = np.maximum(rng.binomial(trials, p_surv), 1)
        c = np.stack([rng.multinomial(s, p) for s, p in zip(surv, probs)])
        vals.append(spectral_margins(kernel_from_counts(c, trials, vol), F, j_max, mode, j_min).max())
    return worst, float(np.std(vals, ddof=1))


def energy_trend(domain: Domain, f: Callable[[np.ndarray], np.ndarray], k_list: Sequence[int],
                 target: float, tolerance: float = 0.006, name: str = "energy_trend") -> Report:
    """Dirichlet energies E^k(f, f) over levels, judged on the final level."""
    values = {}
    for k in k_list:
        lat = build_lattice(domain, k)
        values[int(k)] = dirichlet_energy(lat, lat.evaluate(f))
    last = values[int(k_list[-1])]
    return Report(name, last, target, tolerance, "abs", exact=True, details={"energies": values})


def compare_schemes(samples: Sequence[np.ndarray], speeds: Sequence[float | None], times: Sequence[float],
                    alpha: float = 0.01, name: str = "compare_schemes") -> Report:
    """Coordinate-wise two-sample KS between two marginals at matched unit-speed time.

    Each sample set carries its speed tag and simulated time; unit-speed
    time is ``speed * time`` and must agree between the two sets.
    """
    if len(samples) != 2 or len(speeds) != 2 or len(times) != 2:
        raise EstimatorError("compare_schemes takes exactly two sample sets")
    if any(s is None for s in speeds):
        raise EstimatorError("missing speed tag")
    unit = [s * t for s, t in zip(speeds, times)]
    if not math.isclose(unit[0], unit[1], rel_tol=1e-9):
        raise EstimatorError(f"unit-speed times differ: {unit[0]} vs {unit[1]}")
    a, b = (np.asarray(x, dtype=float).reshape(len(x), -1) for x in samples)
    stats_ = [ks_two_sample(a[:, i], b[:, i]) for i in range(a.shape[1])]
    crit = ks_critical(len(a), len(b), alpha)
    worst = max(s for s, _ in stats_)
    return Report(name, worst, 0.0, crit, "upper", provenance="two-sample KS critical value",
                  details={"per_coordinate": [s for s, _ in stats_], "p_values": [p for _, p in stats_],
                           "unit_time": unit[0], "n": [len(a), len(b)]})


def lattice_walk_occupation(lattice: Lattice, grid: Grid, start, horizon: float, seed: int,
                            n_paths: int | None = None, path_ids=None, chunk: int = 4096) -> OccupationHistogram:
    """Occupation of linearly interpolated discrete walks, streamed.

    Only directed-edge traversal counts are accumulated while walking; each
    lattice edge is split over the grid once at the end, which gives the
    same measure as integrating every step segment.
    """
    from .walks import _start_ids, n_steps_for, walk_blocks

    if path_ids is None:
        if not n_paths or n_paths < 1:
            raise EstimatorError("need at least one path")
        path_ids = np.arange(n_paths)
    path_ids = np.asarray(path_ids, dtype=np.int64)
    n, N = lattice.dim, lattice.size
    J = n_steps_for(horizon, lattice.level)
    starts = _start_ids(lattice, start, len(path_ids), seed, path_ids)
    counts = np.zeros(N * 2 * n, dtype=np.int64)
    coords = lattice.coords
    for lo in range(0, len(path_ids), chunk):
        sl = slice(lo, lo + chunk)
        for _, block in walk_blocks(lattice, starts[sl], J, seed, path_ids[sl]):
            a, b = block[:, :-1].ravel(), block[:, 1:].ravel()
            d = coords[b] - coords[a]
            axis = np.argmax(np.abs(d), axis=1)
            neg = d[np.arange(len(d)), axis] < 0
            counts += np.bincount(a * 2 * n + 2 * axis + neg, minlength=N * 2 * n)
    key = np.flatnonzero(counts)
    a = key // (2 * n)
    direction = key % (2 * n)
    step = np.zeros((len(key), n))
    step[np.arange(len(key)), direction // 2] = np.where(direction % 2 == 1, -1.0, 1.0)
    p = lattice.positions[a]
    dt = 4.0 ** -lattice.level
    cells, w = split_segments(grid, p, p + step * lattice.spacing, counts[key] * dt)
    hist = OccupationHistogram.empty(grid, 1.0 / n)
    hist.mass += np.bincount(cells, weights=w, minlength=grid.size)
    hist.total_time = float(counts.sum() * dt)
    return hist
