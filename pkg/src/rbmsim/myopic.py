"""Myopic conditioning of killed Brownian motion.

A myopic path is a concatenation of segments of length 2^{-k}; each is a
Brownian segment conditioned not to leave the domain during that segment.
The killed segment is discretized into ``s`` Gaussian substeps, optionally
corrected with the Brownian-bridge crossing probability between consecutive
substeps, and conditioning is exact rejection sampling.

Random counters: c0 = normal block, c1 = segment index, c2 = rejection
attempt, c3 = path (or sample) index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .domains import Domain, DomainError
from .rng import Stream
from .trajectory import Trajectory

SAMPLE_CHUNK = 1 << 15
_MIN_UNIFORM = 0.5 * 2.0 ** -32


class RejectionBudgetError(RuntimeError):
    """Raised when a conditioned segment is not accepted within the attempt budget."""

    def __init__(self, message: str, path_ids=None, points=None):
        super().__init__(message)
        self.path_ids = path_ids
        self.points = points


@dataclass
class MyopicConfig:
    k: int = 8
    substeps: int = 16
    bridge: bool = True
    max_attempts: int = 10_000
    horizon: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("level k must be nonnegative")
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")

    @property
    def dt(self) -> float:
        return 2.0 ** -self.k

    @property
    def n_segments(self) -> int:
        return int(np.floor(self.horizon * 2.0 ** self.k + 1e-9))


@dataclass
class SegmentSample:
    start: np.ndarray
    positions: np.ndarray
    survived: bool
    attempts: int = 1

    @property
    def end(self) -> np.ndarray:
        return self.positions[-1]


@dataclass
class SurvivalReport:
    x: list
    dt: float
    p_hat: float
    stderr: float
    n: int

    def to_json(self) -> str:
        return json.dumps({"x": self.x, "dt": self.dt, "p_hat": self.p_hat, "stderr": self.stderr, "n": self.n})


# ---------------------------------------------------------------------------
# segment engine


def _as_points(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[-1] != dim:
        raise DomainError(f"expected points of dimension {dim}")
    return x


def killed_segments(
    domain: Domain,
    x: np.ndarray,
    dt: float,
    substeps: int,
    bridge: bool,
    stream: Stream,
    segment: int,
    attempt,
    ids: np.ndarray,
    keep_path: bool = False,
):
    """One killed-segment attempt for each row of ``x``.

    Returns (survived, endpoints, paths) where ``paths`` has shape
    (P, s + 1, n) when ``keep_path`` is set, else None.
    """
    P, n = x.shape
    s = substeps
    h = dt / s
    z = stream.normal_block(s * n, segment, attempt, ids).reshape(P, s, n)
    pos = x[:, None, :] + np.sqrt(h) * np.cumsum(z, axis=1)
    alive = domain.contains(pos.reshape(-1, n)).reshape(P, s).all(axis=1)
    if bridge and domain.exact_distance and alive.any():
        idx = np.flatnonzero(alive)
        pts = np.concatenate([x[idx, None, :], pos[idx]], axis=1)
        d = domain.distance_to_boundary(pts.reshape(-1, n)).reshape(len(idx), s + 1)
        p_cross = np.exp(-2.0 * d[:, :-1] * d[:, 1:] / h)
        # stream uniforms are never below 2^-33, so such rows survive whatever the draw;
        # skipping their draws leaves every outcome unchanged
        test = np.flatnonzero(p_cross.max(axis=1) >= _MIN_UNIFORM)
        if len(test):
            u = stream.child("bridge").uniform_block(s, segment, attempt, ids[idx[test]])
            alive[idx[test]] = np.all(u >= p_cross[test], axis=1)
    paths = np.concatenate([x[:, None, :], pos], axis=1) if keep_path else None
    return alive, pos[:, -1, :], paths


def conditioned_segments(
    domain: Domain,
    x: np.ndarray,
    config: MyopicConfig,
    stream: Stream,
    segment: int,
    ids: np.ndarray,
    keep_path: bool = False,
):
    """Exact rejection sampling of conditioned segments for every row of ``x``.

    Returns (endpoints, attempts, paths).
    """
    P, n = x.shape
    out = np.empty_like(x)
    attempts = np.zeros(P, dtype=np.int64)
    paths = np.empty((P, config.substeps + 1, n)) if keep_path else None
    active = np.arange(P)
    a = 0
    while len(active):
        if a >= config.max_attempts:
            raise RejectionBudgetError(
                f"{len(active)} segment(s) not accepted within {config.max_attempts} attempts",
                path_ids=ids[active], points=x[active])
        ok, end, pth = killed_segments(domain, x[active], config.dt, config.substeps, config.bridge,
                                       stream, segment, a, ids[active], keep_path)
        hit = active[ok]
        out[hit] = end[ok]
        attempts[hit] = a + 1
        if keep_path:
            paths[hit] = pth[ok]
        active = active[~ok]
        a += 1
    return out, attempts, paths


def sample_killed_segment(domain: Domain, x, dt: float, substeps: int = 16, bridge: bool = True,
                          seed: int = 0, index: int = 0) -> SegmentSample:
    x = _as_points(x, domain.dim)
    if not domain.contains(x[0]):
        raise DomainError("segment start lies outside the domain")
    if dt <= 0:
        raise ValueError("dt must be positive")
    ids = np.array([index], dtype=np.uint64)
    ok, _, path = killed_segments(domain, x, dt, substeps, bridge, Stream(seed, "killed"), 0, 0, ids, True)
    return SegmentSample(x[0], path[0], bool(ok[0]))


def sample_conditioned_segment(domain: Domain, x, config: MyopicConfig, index: int = 0) -> SegmentSample:
    x = _as_points(x, domain.dim)
    if not domain.contains(x[0]):
        raise DomainError("segment start lies outside the domain")
    ids = np.array([index], dtype=np.uint64)
    _, att, path = conditioned_segments(domain, x, config, Stream(config.seed, "conditioned"), 0, ids, True)
    return SegmentSample(x[0], path[0], True, int(att[0]))


def conditioned_step(domain: Domain, x, config: MyopicConfig, ids=None, label: str = "step"):
    """Endpoints (and attempt counts) of one conditioned segment from each row of ``x``."""
    x = _as_points(x, domain.dim)
    if not np.all(domain.contains(x)):
        raise DomainError("segment start lies outside the domain")
    ids = np.arange(len(x), dtype=np.uint64) if ids is None else np.asarray(ids, dtype=np.uint64)
    end = np.empty_like(x)
    att = np.empty(len(x), dtype=np.int64)
    stream = Stream(config.seed, label)
    for lo in range(0, len(x), SAMPLE_CHUNK):
        sl = slice(lo, lo + SAMPLE_CHUNK)
        end[sl], att[sl], _ = conditioned_segments(domain, x[sl], config, stream, 0, ids[sl])
    return end, att


# ---------------------------------------------------------------------------
# survival and stationary starts


def estimate_survival(domain: Domain, x, dt: float, n_samples: int, config: MyopicConfig | None = None,
                      seed: int | None = None) -> SurvivalReport:
    """Monte Carlo estimate of P^D_dt 1(x) with binomial standard error."""
    config = config or MyopicConfig()
    seed = config.seed if seed is None else seed
    x = _as_points(x, domain.dim)
    if not domain.contains(x[0]):
        raise DomainError("point lies outside the domain")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    stream = Stream(seed, "survival")
    hits = 0
    for lo in range(0, n_samples, SAMPLE_CHUNK):
        m = min(SAMPLE_CHUNK, n_samples - lo)
        ids = np.arange(lo, lo + m, dtype=np.uint64)
        ok, _, _ = killed_segments(domain, np.repeat(x, m, axis=0), dt, config.substeps, config.bridge,
                                   stream, 0, 0, ids)
        hits += int(ok.sum())
    p = hits / n_samples
    return SurvivalReport(x[0].tolist(), dt, p, float(np.sqrt(p * (1 - p) / n_samples)), n_samples)


def sample_stationary_myopic(domain: Domain, k: int, config: MyopicConfig, count: int | None = None,
                             ids=None, max_rounds: int = 100_000) -> np.ndarray:
    """Points distributed as the normalized measure 1_D(x) P^D_{2^{-k}} 1(x) dx.

    Each sample proposes uniformly in the bounding box and is accepted iff
    the proposal is in D and one killed segment from it survives.
    """
    single = count is None and ids is None
    if ids is None:
        ids = np.arange(1 if count is None else count, dtype=np.uint64)
    ids = np.asarray(ids, dtype=np.uint64)
    prop = Stream(config.seed, "stationary/proposal")
    seg = Stream(config.seed, "stationary/segment")
    n = domain.dim
    out = np.empty((len(ids), n))
    active = np.arange(len(ids))
    dt = 2.0 ** -k
    r = 0
    while len(active):
        if r >= max_rounds:
            raise RejectionBudgetError("stationary sampler exceeded its proposal budget", ids[active])
        u = prop.uniform_block(n, r, 0, ids[active])
        pts = domain.lo + u * (domain.hi - domain.lo)
        inside = domain.contains(pts)
        acc = np.zeros(len(active), dtype=bool)
        if inside.any():
            sel = np.flatnonzero(inside)
            ok, _, _ = killed_segments(domain, pts[sel], dt, config.substeps, config.bridge, seg, 0, r,
                                       ids[active][sel])
            acc[sel[ok]] = True
        out[active[acc]] = pts[acc]
        active = active[~acc]
        r += 1
    return out[0] if single else out


# ---------------------------------------------------------------------------
# paths


@dataclass(eq=False)
class MyopicEnsemble:
    """Recorded myopic paths: ``positions`` has shape (P, m, n) on the time grid ``times``."""

    times: np.ndarray
    positions: np.ndarray
    view: str
    config: MyopicConfig
    path_ids: np.ndarray
    attempts: np.ndarray = field(default=None, repr=False)

    def trajectory(self, i: int) -> Trajectory:
        return Trajectory(self.times, self.positions[i], "linear", speed=1.0,
                          meta={"view": self.view, "k": self.config.k})


def _starts(domain: Domain, start, config: MyopicConfig, ids: np.ndarray) -> np.ndarray:
    if isinstance(start, str):
        if start != "stationary":
            raise ValueError(f"unknown start mode {start!r}")
        return sample_stationary_myopic(domain, config.k, config, ids=ids)
    x = np.asarray(start, dtype=float)
    x = np.broadcast_to(x, (len(ids), domain.dim)).copy()
    if not np.all(domain.contains(x)):
        raise DomainError("start point lies outside the domain")
    return x


def simulate_myopic_ensemble(
    domain: Domain,
    start,
    config: MyopicConfig,
    n_paths: int | None = None,
    path_ids: Sequence[int] | None = None,
    view: str = "linear",
    record: str = "full",
    callback: Callable[[int, np.ndarray, np.ndarray], None] | None = None,
):
    """Simulate many myopic paths.

    ``view="linear"`` keeps segment endpoints, ``view="full"`` keeps every
    substep.  ``record="final"`` returns only the final positions (P, n).
    ``callback(j, before, after)`` is called after each segment with the
    endpoint arrays, which allows streaming estimators without storing paths.
    """
    if path_ids is None:
        if not n_paths or n_paths < 1:
            raise ValueError("need at least one path")
        path_ids = np.arange(n_paths)
    ids = np.asarray(path_ids, dtype=np.uint64)
    if view not in ("linear", "full"):
        raise ValueError(f"unknown view {view!r}")
    if record not in ("full", "final"):
        raise ValueError(f"unknown record option {record!r}")
    J, s = config.n_segments, config.substeps
    cur = _starts(domain, start, config, ids)
    stream = Stream(config.seed, "myopic")
    keep_path = view == "full" and record == "full"
    per = s if view == "full" else 1
    P, n = cur.shape
    store = None
    if record == "full":
        store = np.empty((P, J * per + 1, n))
        store[:, 0] = cur
    attempts = np.zeros(P, dtype=np.int64)
    for j in range(J):
        end, att, paths = conditioned_segments(domain, cur, config, stream, j, ids, keep_path)
        attempts += att
        if record == "full":
            if keep_path:
                store[:, j * s + 1 : (j + 1) * s + 1] = paths[:, 1:]
            else:
                store[:, j + 1] = end
        if callback is not None:
            callback(j, cur, end)
        cur = end
    if record == "final":
        return cur
    times = np.arange(J * per + 1) * (config.dt / per)
    return MyopicEnsemble(times, store, view, config, ids, attempts)


def simulate_myopic(domain: Domain, start, config: MyopicConfig, view: str = "linear", path_id: int = 0) -> Trajectory:
    ens = simulate_myopic_ensemble(domain, start, config, path_ids=[path_id], view=view)
    return ens.trajectory(0)
